#include "qrsim/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

namespace qrsim {

StateShape shape_of(const Mechanism& m)
{
  return StateShape{m.bodies().size(), m.rotational().size()};
}

FlatState flatten(const SystemState& s)
{
  FlatState f;
  f.t = s.t;
  f.values.reserve(18 * s.bodies.size() + 3 * s.theta.size() + 1);
  auto push3 = [&](const Vec3& v) { f.values.insert(f.values.end(), {v.x(), v.y(), v.z()}); };
  for (const auto& b : s.bodies) {
    push3(b.r_com);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        f.values.push_back(b.R(r, c));
      }
    }
    push3(b.p);
    push3(b.L);
  }
  for (const auto& th : s.theta) {
    push3(th);
  }
  f.values.push_back(s.theta_err);
  return f;
}

SystemState unflatten(const FlatState& f, StateShape shape)
{
  if (f.values.size() != shape.flat_size()) {
    throw std::invalid_argument("unflatten: expected " + std::to_string(shape.flat_size()) +
                                " values, got " + std::to_string(f.values.size()));
  }
  SystemState s;
  s.t = f.t;
  std::size_t i = 0;
  auto take3 = [&] {
    Vec3 v(f.values[i], f.values[i + 1], f.values[i + 2]);
    i += 3;
    return v;
  };
  s.bodies.resize(shape.bodies);
  for (auto& b : s.bodies) {
    b.r_com = take3();
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        b.R(r, c) = f.values[i++];
      }
    }
    b.p = take3();
    b.L = take3();
  }
  s.theta.resize(shape.rotational);
  for (auto& th : s.theta) {
    th = take3();
  }
  s.theta_err = f.values[i];
  return s;
}

void SimConfig::validate() const
{
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("SimConfig.dt must be positive");
  }
  if (!(t_end >= dt) || !std::isfinite(t_end)) {
    throw std::invalid_argument("SimConfig.t_end must be >= dt");
  }
  if (record_stride < 1) {
    throw std::invalid_argument("SimConfig.record_stride must be >= 1");
  }
  if (renormalize_stride < 1) {
    throw std::invalid_argument("SimConfig.renormalize_stride must be >= 1");
  }
}

std::int64_t SimConfig::step_count() const
{
  return std::llround(t_end / dt);
}

namespace {

// out = s + h * rate
void advance(const SystemState& s, const StateRate& rate, double h, SystemState& out)
{
  out.bodies.resize(s.bodies.size());
  for (std::size_t i = 0; i < s.bodies.size(); ++i) {
    const BodyState& b = s.bodies[i];
    const BodyRate& r = rate.bodies[i];
    BodyState& o = out.bodies[i];
    o.r_com = b.r_com + h * r.r_dot;
    o.R = b.R + h * r.R_dot;
    o.p = b.p + h * r.p_dot;
    o.L = b.L + h * r.L_dot;
  }
  out.theta.resize(s.theta.size());
  for (std::size_t k = 0; k < s.theta.size(); ++k) {
    out.theta[k] = s.theta[k] + h * rate.theta_rate[k];
  }
  out.theta_err = s.theta_err + h * rate.theta_err_rate;
  out.t = s.t + h;
}

std::vector<double> flat_rate(const Mechanism& m, const SystemState& s)
{
  const StateRate r = derivative(m, s);
  std::vector<double> out;
  out.reserve(shape_of(m).flat_size());
  auto push3 = [&](const Vec3& v) { out.insert(out.end(), {v.x(), v.y(), v.z()}); };
  for (const auto& b : r.bodies) {
    push3(b.r_dot);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        out.push_back(b.R_dot(i, j));
      }
    }
    push3(b.p_dot);
    push3(b.L_dot);
  }
  for (const auto& th : r.theta_rate) {
    push3(th);
  }
  out.push_back(r.theta_err_rate);
  return out;
}

Eigen::VectorXcd linearized_spectrum(const Mechanism& m, const SystemState& s)
{
  const StateShape shape = shape_of(m);
  const FlatState x0 = flatten(s);
  const auto n = static_cast<Eigen::Index>(shape.flat_size());
  Eigen::MatrixXd jac(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    const double h = 1e-7 * std::max(1.0, std::abs(x0.values[ju]));
    FlatState plus = x0;
    FlatState minus = x0;
    plus.values[ju] += h;
    minus.values[ju] -= h;
    const auto fp = flat_rate(m, unflatten(plus, shape));
    const auto fm = flat_rate(m, unflatten(minus, shape));
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto iu = static_cast<std::size_t>(i);
      jac(i, j) = (fp[iu] - fm[iu]) / (2.0 * h);
    }
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(jac, false);
  return solver.eigenvalues();
}

StabilityReport assess(const Eigen::VectorXcd& eigenvalues, double dt)
{
  StabilityReport rep;
  rep.dt = dt;
  rep.max_excess = -1.0;
  for (const auto& lambda : eigenvalues) {
    const std::complex<double> z = lambda * dt;
    const std::complex<double> p = 1.0 + z * (1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0)));
    const double excess = std::abs(p) - std::max(1.0, std::exp(z.real()));
    if (excess > rep.max_excess) {
      rep.max_excess = excess;
      rep.limiting_eigenvalue = lambda;
    }
    rep.spectral_radius = std::max(rep.spectral_radius, std::abs(lambda));
  }
  rep.stable = rep.max_excess <= 1e-9;
  return rep;
}

} // namespace

StabilityReport linear_stability(const Mechanism& m, const SystemState& s, double dt)
{
  return assess(linearized_spectrum(m, s), dt);
}

double max_stable_dt(const Mechanism& m, const SystemState& s)
{
  const Eigen::VectorXcd spectrum = linearized_spectrum(m, s);
  double lo = 0.0;
  double hi = 1.0;
  if (assess(spectrum, hi).stable) {
    return hi;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (assess(spectrum, mid).stable ? lo : hi) = mid;
  }
  return lo;
}

Rk4Stepper::Rk4Stepper(const Mechanism& m) : m_(m) {}

void Rk4Stepper::step(SystemState& s, double dt, bool renormalize)
{
  evaluate(m_, s, k_[0]);
  advance(s, k_[0].rate, 0.5 * dt, stage_);
  evaluate(m_, stage_, k_[1]);
  advance(s, k_[1].rate, 0.5 * dt, stage_);
  evaluate(m_, stage_, k_[2]);
  advance(s, k_[2].rate, dt, stage_);
  evaluate(m_, stage_, k_[3]);

  const double w = dt / 6.0;
  for (std::size_t i = 0; i < s.bodies.size(); ++i) {
    const BodyRate& a = k_[0].rate.bodies[i];
    const BodyRate& b = k_[1].rate.bodies[i];
    const BodyRate& c = k_[2].rate.bodies[i];
    const BodyRate& d = k_[3].rate.bodies[i];
    BodyState& x = s.bodies[i];
    x.r_com += w * (a.r_dot + 2.0 * b.r_dot + 2.0 * c.r_dot + d.r_dot);
    x.R += w * (a.R_dot + 2.0 * b.R_dot + 2.0 * c.R_dot + d.R_dot);
    x.p += w * (a.p_dot + 2.0 * b.p_dot + 2.0 * c.p_dot + d.p_dot);
    x.L += w * (a.L_dot + 2.0 * b.L_dot + 2.0 * c.L_dot + d.L_dot);
    if (renormalize) {
      x.R = orthonormalize(x.R).matrix();
    }
  }
  for (std::size_t k = 0; k < s.theta.size(); ++k) {
    s.theta[k] += w * (k_[0].rate.theta_rate[k] + 2.0 * k_[1].rate.theta_rate[k] +
                       2.0 * k_[2].rate.theta_rate[k] + k_[3].rate.theta_rate[k]);
  }
  s.theta_err += w * (k_[0].rate.theta_err_rate + 2.0 * k_[1].rate.theta_err_rate +
                      2.0 * k_[2].rate.theta_err_rate + k_[3].rate.theta_err_rate);
  s.t += dt;
}

SystemState rk4_step(const Mechanism& m, const SystemState& s, double dt, bool renormalize)
{
  SystemState next = s;
  Rk4Stepper stepper(m);
  stepper.step(next, dt, renormalize);
  return next;
}

SimulationError::SimulationError(double t, const std::string& what)
  : std::runtime_error("at t = " + std::to_string(t) + " s: " + what), t_(t)
{
}

TimeSeries simulate(const Mechanism& m, const SystemState& s0, const SimConfig& cfg,
                    const Observer& observer)
{
  cfg.validate();
  check_state_shape(m, s0);
  const StabilityReport stab = linear_stability(m, s0, cfg.dt);
  if (!stab.stable) {
    throw std::invalid_argument(
        "dt = " + std::to_string(cfg.dt) + " s is outside the RK4 stability region for eigenvalue " +
        std::to_string(stab.limiting_eigenvalue.real()) + (stab.limiting_eigenvalue.imag() < 0 ? "" : "+") +
        std::to_string(stab.limiting_eigenvalue.imag()) + "i 1/s");
  }

  const bool has_probes = m.probe_layout().has_value();
  const std::size_t crank = has_probes ? static_cast<std::size_t>(index_of(m.probe_layout()->crank)) : 0;

  TimeSeries out;
  const std::int64_t n = cfg.step_count();
  if (has_probes) {
    out.rows.reserve(static_cast<std::size_t>(n / cfg.record_stride + 2));
  }

  SystemState s = s0;
  Rk4Stepper stepper(m);
  Evaluation eval;
  double unwrapped = has_probes ? angle_about_z(s.bodies[crank].R) : 0.0;

  auto record = [&] {
    evaluate(m, s, eval);
    ProbeRecord rec;
    if (has_probes) {
      rec = probes(m, s, eval);
      rec.crank_angle_unwrapped = unwrapped;
      out.rows.push_back(rec);
    } else {
      rec.t = s.t;
    }
    if (observer) {
      observer(s, eval, rec);
    }
  };

  std::int64_t k = 0;
  try {
    s.t = s0.t;
    record();
    for (k = 1; k <= n; ++k) {
      const bool renormalize = k % cfg.renormalize_stride == 0;
      stepper.step(s, cfg.dt, renormalize);
      s.t = s0.t + static_cast<double>(k) * cfg.dt;
      if (has_probes) {
        unwrapped = unwrap_angle(unwrapped, angle_about_z(s.bodies[crank].R));
      }
      if (k % cfg.record_stride == 0 || k == n) {
        record();
      }
    }
  } catch (const std::exception& e) {
    throw SimulationError(s0.t + static_cast<double>(k) * cfg.dt, e.what());
  }
  return out;
}

} // namespace qrsim
