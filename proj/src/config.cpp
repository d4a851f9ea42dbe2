#include "qrsim/config.hpp"

#include <cmath>
#include <initializer_list>
#include <limits>

namespace qrsim {

using nlohmann::json;

ConfigError::ConfigError(std::string path, const std::string& message)
  : std::runtime_error(path.empty() ? message : path + ": " + message), path_(std::move(path))
{
}

namespace {

// Walks one JSON object, rejecting keys it was not asked about.
class Section
{
public:
  Section(const json& j, std::string path, std::initializer_list<const char*> allowed)
    : j_(j), path_(std::move(path))
  {
    if (!j_.is_object()) {
      throw ConfigError(path_, "expected an object");
    }
    for (const auto& [key, value] : j_.items()) {
      bool known = false;
      for (const char* a : allowed) {
        known = known || key == a;
      }
      if (!known) {
        throw ConfigError(path_ + "/" + key, "unknown key");
      }
    }
  }

  const std::string& path() const { return path_; }
  std::string child(const char* key) const { return path_ + "/" + key; }

  const json* find(const char* key) const
  {
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const char* key, double& out) const
  {
    if (const json* v = find(key)) {
      if (!v->is_number()) {
        throw ConfigError(child(key), "expected a number");
      }
      out = v->get<double>();
      if (!std::isfinite(out)) {
        throw ConfigError(child(key), "must be finite");
      }
    }
  }

  void positive(const char* key, double& out) const
  {
    number(key, out);
    if (!(out > 0.0)) {
      throw ConfigError(child(key), "must be positive");
    }
  }

  void non_negative(const char* key, double& out) const
  {
    number(key, out);
    if (!(out >= 0.0)) {
      throw ConfigError(child(key), "must be >= 0");
    }
  }

  void stride(const char* key, int& out) const
  {
    if (const json* v = find(key)) {
      if (!v->is_number_integer() || v->get<long long>() < 1 ||
          v->get<long long>() > std::numeric_limits<int>::max()) {
        throw ConfigError(child(key), "expected an integer >= 1");
      }
      out = v->get<int>();
    }
  }

  void boolean(const char* key, bool& out) const
  {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) {
        throw ConfigError(child(key), "expected true or false");
      }
      out = v->get<bool>();
    }
  }

  void string(const char* key, std::string& out) const
  {
    if (const json* v = find(key)) {
      if (!v->is_string() || v->get<std::string>().empty()) {
        throw ConfigError(child(key), "expected a non-empty string");
      }
      out = v->get<std::string>();
    }
  }

private:
  const json& j_;
  std::string path_;
};

struct NamedLink
{
  const char* key;
  LinkParams QrmLinks::*member;
};

constexpr NamedLink kLinks[] = {
    {"crank", &QrmLinks::crank},   {"slider", &QrmLinks::slider}, {"rocker", &QrmLinks::rocker},
    {"rod", &QrmLinks::rod},       {"slider2", &QrmLinks::slider2},
};

struct NamedCoupling
{
  const char* key;
  SpringDamper QrmCouplings::*member;
};

constexpr NamedCoupling kCouplings[] = {
    {"01", &QrmCouplings::k01}, {"12", &QrmCouplings::k12}, {"3C", &QrmCouplings::k3c},
    {"23r", &QrmCouplings::k23r}, {"03", &QrmCouplings::k03}, {"34", &QrmCouplings::k34},
    {"45", &QrmCouplings::k45}, {"5C", &QrmCouplings::k5c},
};

} // namespace

RunConfig parse_config(std::string_view document)
{
  json root;
  try {
    root = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed document: ") + e.what());
  }

  RunConfig cfg;
  const Section top(root, "", {"sim", "geometry", "links", "couplings", "drive", "gravity",
                               "sliding_friction", "output"});

  if (const json* j = top.find("sim")) {
    const Section s(*j, "/sim", {"dt", "t_end", "record_stride", "renormalize_stride"});
    s.positive("dt", cfg.sim.dt);
    s.positive("t_end", cfg.sim.t_end);
    s.stride("record_stride", cfg.sim.record_stride);
    s.stride("renormalize_stride", cfg.sim.renormalize_stride);
    if (cfg.sim.t_end < cfg.sim.dt) {
      throw ConfigError("/sim/t_end", "must be >= dt");
    }
  }

  QrmParameters& model = cfg.model;
  if (const json* j = top.find("geometry")) {
    const Section s(*j, "/geometry", {"crank_radius", "rocker_length", "rod_length",
                                      "pivot_distance", "slider_line_y", "initial_crank_angle"});
    QrmGeometry& g = model.geometry;
    s.positive("crank_radius", g.crank_radius);
    s.positive("rocker_length", g.rocker_length);
    s.positive("rod_length", g.rod_length);
    s.positive("pivot_distance", g.pivot_distance);
    s.number("slider_line_y", g.slider_line_y);
    s.number("initial_crank_angle", g.initial_crank_angle);
  }
  try {
    model.geometry.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("/geometry", e.what());
  }

  if (const json* j = top.find("links")) {
    const Section s(*j, "/links", {"crank", "slider", "rocker", "rod", "slider2"});
    for (const auto& link : kLinks) {
      if (const json* lj = s.find(link.key)) {
        const Section ls(*lj, s.child(link.key), {"mass", "lx", "ly", "lz"});
        LinkParams& p = model.links.*link.member;
        ls.positive("mass", p.mass);
        ls.positive("lx", p.lx);
        ls.positive("ly", p.ly);
        ls.positive("lz", p.lz);
      }
    }
  }

  if (const json* j = top.find("couplings")) {
    const Section s(*j, "/couplings", {"01", "12", "3C", "23r", "03", "34", "45", "5C"});
    for (const auto& c : kCouplings) {
      if (const json* cj = s.find(c.key)) {
        const Section cs(*cj, s.child(c.key), {"K", "R"});
        SpringDamper& sd = model.couplings.*c.member;
        cs.non_negative("K", sd.stiffness);
        cs.non_negative("R", sd.damping);
      }
    }
  }

  if (const json* j = top.find("drive")) {
    const Section s(*j, "/drive", {"rate", "K", "R"});
    s.number("rate", model.drive.rate);
    s.non_negative("K", model.drive.stiffness);
    s.non_negative("R", model.drive.damping);
  }

  if (const json* j = top.find("gravity")) {
    if (!j->is_array() || j->size() != 3) {
      throw ConfigError("/gravity", "expected an array of three numbers");
    }
    for (std::size_t i = 0; i < 3; ++i) {
      const json& v = (*j)[i];
      if (!v.is_number() || !std::isfinite(v.get<double>())) {
        throw ConfigError("/gravity/" + std::to_string(i), "expected a finite number");
      }
      model.gravity[static_cast<Eigen::Index>(i)] = v.get<double>();
    }
  }

  top.boolean("sliding_friction", model.sliding_friction);

  if (const json* j = top.find("output")) {
    const Section s(*j, "/output", {"csv"});
    s.string("csv", cfg.csv_path);
  }
  return cfg;
}

json to_json(const RunConfig& cfg)
{
  const QrmParameters& m = cfg.model;
  json links = json::object();
  for (const auto& link : kLinks) {
    const LinkParams& p = m.links.*link.member;
    links[link.key] = {{"mass", p.mass}, {"lx", p.lx}, {"ly", p.ly}, {"lz", p.lz}};
  }
  json couplings = json::object();
  for (const auto& c : kCouplings) {
    const SpringDamper& sd = m.couplings.*c.member;
    couplings[c.key] = {{"K", sd.stiffness}, {"R", sd.damping}};
  }
  const QrmGeometry& g = m.geometry;
  return json{
      {"sim",
       {{"dt", cfg.sim.dt},
        {"t_end", cfg.sim.t_end},
        {"record_stride", cfg.sim.record_stride},
        {"renormalize_stride", cfg.sim.renormalize_stride}}},
      {"geometry",
       {{"crank_radius", g.crank_radius},
        {"rocker_length", g.rocker_length},
        {"rod_length", g.rod_length},
        {"pivot_distance", g.pivot_distance},
        {"slider_line_y", g.slider_line_y},
        {"initial_crank_angle", g.initial_crank_angle}}},
      {"links", links},
      {"couplings", couplings},
      {"drive", {{"rate", m.drive.rate}, {"K", m.drive.stiffness}, {"R", m.drive.damping}}},
      {"gravity", {m.gravity.x(), m.gravity.y(), m.gravity.z()}},
      {"sliding_friction", m.sliding_friction},
      {"output", {{"csv", cfg.csv_path}}},
  };
}

} // namespace qrsim
