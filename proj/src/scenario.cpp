#include "qrsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace qrsim {

namespace {

constexpr BodyId kCrank{1};
constexpr BodyId kSliderBlock{2};
constexpr BodyId kRocker{3};
constexpr BodyId kRod{4};
constexpr BodyId kOutputSlider{5};

std::string fmt(double v)
{
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

RigidBody make_body(BodyId id, std::string name, const LinkParams& p,
                    std::vector<Attachment> attachments)
{
  return RigidBody(id, std::move(name), p.mass, box_inertia(p.mass, p.lx, p.ly, p.lz),
                   std::move(attachments));
}

TranslationalCoupling pin(std::string name, AnchorRef a, AnchorRef b, const SpringDamper& sd)
{
  TranslationalCoupling c;
  c.name = std::move(name);
  c.a = a;
  c.b = b;
  c.stiffness = Vec3::Constant(sd.stiffness);
  c.damping = Vec3::Constant(sd.damping);
  return c;
}

// Slide along x of the projection frame.
TranslationalCoupling slide(std::string name, AnchorRef a, AnchorRef b, const SpringDamper& sd,
                            std::optional<BodyId> frame, bool friction)
{
  TranslationalCoupling c = pin(std::move(name), a, b, sd);
  c.frame = frame;
  c.stiffness.x() = 0.0;
  if (friction) {
    c.damping.x() = sd.damping;
  } else {
    c.damping.x() = 0.0;
    c.free_axes[0] = true;
  }
  return c;
}

BodyState at_rest(const Vec3& r_com, double heading)
{
  BodyState s;
  s.r_com = r_com;
  s.R = rot_z(heading).matrix();
  return s;
}

} // namespace

void QrmGeometry::validate() const
{
  const double r = crank_radius;
  const double d = pivot_distance;
  const double l3 = rocker_length;
  const double l4 = rod_length;
  for (double v : {r, d, l3, l4, slider_line_y, initial_crank_angle}) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("geometry: all values must be finite");
    }
  }
  if (!(r > 0.0 && l3 > 0.0 && l4 > 0.0)) {
    throw std::invalid_argument("geometry: lengths must be positive");
  }
  if (!(r < d)) {
    throw std::invalid_argument("geometry: requires crank_radius < pivot_distance (" + fmt(r) +
                                " < " + fmt(d) + ")");
  }
  if (!(l3 > d + r)) {
    throw std::invalid_argument("geometry: requires rocker_length > pivot_distance + crank_radius (" +
                                fmt(l3) + " > " + fmt(d + r) + ")");
  }
  const double alpha = std::asin(r / d);
  const double gap_extreme = slider_line_y - (-d + l3 * std::cos(alpha));
  const double gap_top = slider_line_y - (-d + l3);
  const double gap = std::max(std::abs(gap_extreme), std::abs(gap_top));
  if (!(l4 > gap)) {
    throw std::invalid_argument("geometry: requires rod_length > max vertical gap to the slider line (" +
                                fmt(l4) + " > " + fmt(gap) + ")");
  }
}

KinematicPose kinematic_oracle(double theta, const QrmGeometry& geom)
{
  geom.validate();
  const double ax = geom.crank_radius * std::cos(theta);
  const double ay = geom.crank_radius * std::sin(theta);
  KinematicPose pose;
  pose.psi = std::atan2(ay + geom.pivot_distance, ax);
  pose.tip = Vec3(geom.rocker_length * std::cos(pose.psi),
                  -geom.pivot_distance + geom.rocker_length * std::sin(pose.psi), 0.0);
  const double dy = geom.slider_line_y - pose.tip.y();
  const double arg = geom.rod_length * geom.rod_length - dy * dy;
  if (arg < 0.0) {
    throw std::domain_error("kinematic_oracle: rod cannot reach the slider line");
  }
  pose.slider_x = pose.tip.x() + std::sqrt(arg);
  return pose;
}

double theoretical_time_ratio(double crank_radius, double pivot_distance)
{
  if (!(crank_radius > 0.0 && crank_radius < pivot_distance)) {
    throw std::domain_error("theoretical_time_ratio: requires 0 < r < d");
  }
  const double alpha = std::asin(crank_radius / pivot_distance);
  return (std::numbers::pi + 2.0 * alpha) / (std::numbers::pi - 2.0 * alpha);
}

QuickReturnModel build_quick_return(const QrmParameters& params)
{
  const QrmGeometry& g = params.geometry;
  g.validate();

  const double r = g.crank_radius;
  const double l3 = g.rocker_length;
  const double l4 = g.rod_length;
  const double theta = g.initial_crank_angle;

  const KinematicPose pose = kinematic_oracle(theta, g);
  const Vec3 pin_a(r * std::cos(theta), r * std::sin(theta), 0.0);
  const Vec3 pivot_o3(0.0, -g.pivot_distance, 0.0);
  const Vec3 rocker_dir(std::cos(pose.psi), std::sin(pose.psi), 0.0);
  const Vec3 c5(pose.slider_x, g.slider_line_y, 0.0);
  const Vec3 rod_vec = c5 - pose.tip;
  const double rod_heading = std::atan2(rod_vec.y(), rod_vec.x());

  std::vector<RigidBody> bodies;
  bodies.push_back(make_body(kCrank, "crank", params.links.crank,
                             {{"O1", Vec3(-r / 2, 0, 0)}, {"A1", Vec3(r / 2, 0, 0)}}));
  bodies.push_back(make_body(kSliderBlock, "slider", params.links.slider, {{"A2", Vec3::Zero()}}));
  bodies.push_back(make_body(kRocker, "rocker", params.links.rocker,
                             {{"O3", Vec3(-l3 / 2, 0, 0)}, {"A33", Vec3(l3 / 2, 0, 0)}}));
  bodies.push_back(make_body(kRod, "rod", params.links.rod,
                             {{"A33", Vec3(-l4 / 2, 0, 0)}, {"C5", Vec3(l4 / 2, 0, 0)}}));
  bodies.push_back(make_body(kOutputSlider, "slider2", params.links.slider2, {{"C5", Vec3::Zero()}}));

  const QrmCouplings& k = params.couplings;
  namespace cn = coupling_names;
  std::vector<TranslationalCoupling> trans;
  trans.push_back(pin(cn::kO1, {kGround, Vec3::Zero()}, {kCrank, Vec3(-r / 2, 0, 0)}, k.k01));
  trans.push_back(pin(cn::kA, {kCrank, Vec3(r / 2, 0, 0)}, {kSliderBlock, Vec3::Zero()}, k.k12));
  trans.push_back(slide(cn::kSlide3, {kRocker, Vec3::Zero()}, {kSliderBlock, Vec3::Zero()}, k.k3c,
                        kRocker, params.sliding_friction));
  trans.push_back(pin(cn::kO3, {kGround, pivot_o3}, {kRocker, Vec3(-l3 / 2, 0, 0)}, k.k03));
  trans.push_back(pin(cn::kA33, {kRocker, Vec3(l3 / 2, 0, 0)}, {kRod, Vec3(-l4 / 2, 0, 0)}, k.k34));
  trans.push_back(pin(cn::kC5, {kRod, Vec3(l4 / 2, 0, 0)}, {kOutputSlider, Vec3::Zero()}, k.k45));
  trans.push_back(slide(cn::kSlide5, {kGround, Vec3(0.0, g.slider_line_y, 0.0)},
                        {kOutputSlider, Vec3::Zero()}, k.k5c, std::nullopt,
                        params.sliding_friction));

  std::vector<RotationalCoupling> rot;
  rot.push_back(RotationalCoupling{cn::kLock23, kSliderBlock, kRocker, k.k23r.stiffness,
                                   k.k23r.damping});

  VelocityDriver driver{kCrank, Vec3::UnitZ(), params.drive.rate, params.drive.stiffness,
                        params.drive.damping};

  ProbeLayout layout{kCrank, kRocker, kRod, kOutputSlider, 0, 1, 3, 5};

  Mechanism mech(std::move(bodies), std::move(trans), std::move(rot), driver, params.gravity,
                 layout);

  SystemState s;
  s.bodies = {
      at_rest(pin_a / 2.0, theta),
      at_rest(pin_a, pose.psi),
      at_rest(pivot_o3 + rocker_dir * (l3 / 2), pose.psi),
      at_rest(0.5 * (pose.tip + c5), rod_heading),
      at_rest(c5, 0.0),
  };
  s.theta = {Vec3::Zero()};
  s.theta_err = 0.0;
  s.t = 0.0;
  return QuickReturnModel{std::move(mech), std::move(s)};
}

StrokeReport stroke_analysis(std::span<const double> t, std::span<const double> x, double cutoff)
{
  if (t.size() != x.size()) {
    throw std::invalid_argument("stroke_analysis: t and x differ in length");
  }
  std::size_t first = 0;
  while (first < t.size() && t[first] < cutoff) {
    ++first;
  }
  const std::size_t last = t.size();
  if (last - first < 3) {
    throw std::invalid_argument("stroke_analysis: fewer than 3 samples after the cutoff");
  }

  const auto [mn, mx] = std::minmax_element(x.begin() + static_cast<std::ptrdiff_t>(first), x.end());
  const double range = *mx - *mn;
  const double hysteresis = 0.01 * range;

  struct Extremum
  {
    std::size_t index;
    bool is_max;
  };
  std::vector<Extremum> extrema;
  int dir = 0;
  std::size_t hi = first;
  std::size_t lo = first;
  for (std::size_t i = first + 1; i < last; ++i) {
    if (x[i] > x[hi]) {
      hi = i;
    }
    if (x[i] < x[lo]) {
      lo = i;
    }
    if (dir >= 0 && x[hi] - x[i] > hysteresis) {
      if (hi != first) {
        extrema.push_back({hi, true});
      }
      dir = -1;
      lo = i;
    } else if (dir <= 0 && x[i] - x[lo] > hysteresis) {
      if (lo != first) {
        extrema.push_back({lo, false});
      }
      dir = 1;
      hi = i;
    }
  }

  StrokeReport rep;
  rep.stroke_length = range;
  for (const auto& e : extrema) {
    const std::size_t j = e.index;
    double tv = t[j];
    if (j > first && j + 1 < last) {
      const double d1 = t[j] - t[j - 1];
      const double d2 = t[j + 1] - t[j];
      const double s1 = (x[j] - x[j - 1]) / d1;
      const double s2 = (x[j + 1] - x[j]) / d2;
      const double a = (s2 - s1) / (d1 + d2);
      if (a != 0.0) {
        const double b = s1 + a * d1;
        tv += std::clamp(-b / (2.0 * a), -d1, d2);
      }
    }
    rep.reversal_times.push_back(tv);
  }
  if (rep.reversal_times.size() < 3) {
    throw std::invalid_argument("stroke_analysis: found " +
                                std::to_string(rep.reversal_times.size()) +
                                " reversals, need at least 3");
  }

  double rise_sum = 0.0;
  double fall_sum = 0.0;
  int rises = 0;
  int falls = 0;
  for (std::size_t i = 1; i < extrema.size(); ++i) {
    const double dt = rep.reversal_times[i] - rep.reversal_times[i - 1];
    if (extrema[i].is_max) {
      rise_sum += dt;
      ++rises;
    } else {
      fall_sum += dt;
      ++falls;
    }
  }
  const double rise = rise_sum / rises;
  const double fall = fall_sum / falls;
  rep.forward_duration = std::max(rise, fall);
  rep.return_duration = std::min(rise, fall);
  rep.time_ratio = rep.forward_duration / rep.return_duration;
  return rep;
}

} // namespace qrsim
