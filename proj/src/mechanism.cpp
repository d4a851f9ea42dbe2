#include "qrsim/mechanism.hpp"

#include <cmath>

namespace qrsim {

namespace {

void check_body_id(BodyId id, std::size_t n, const std::string& where)
{
  const int i = static_cast<int>(id);
  if (i < 0 || i > static_cast<int>(n)) {
    throw std::invalid_argument(where + ": unknown body id " + std::to_string(i));
  }
}

void guard(const Vec3& f, const std::string& name)
{
  if (!f.allFinite() || f.cwiseAbs().maxCoeff() > kForceSentinel) {
    throw BlowUpError("coupling '" + name + "' effort left the range |e| <= 1e9 (" +
                      std::to_string(f.norm()) + ")");
  }
}

} // namespace

Mechanism::Mechanism(std::vector<RigidBody> bodies, std::vector<TranslationalCoupling> translational,
                     std::vector<RotationalCoupling> rotational, VelocityDriver driver,
                     Vec3 gravity, std::optional<ProbeLayout> probes)
  : bodies_(std::move(bodies)), translational_(std::move(translational)),
    rotational_(std::move(rotational)), driver_(std::move(driver)), gravity_(std::move(gravity)),
    probes_(std::move(probes))
{
  if (bodies_.empty()) {
    throw std::invalid_argument("Mechanism: the driver needs at least one body");
  }
  for (std::size_t i = 0; i < bodies_.size(); ++i) {
    if (index_of(bodies_[i].id()) != static_cast<int>(i)) {
      throw std::invalid_argument("Mechanism: body ids must be unique and numbered 1..n in order");
    }
  }
  const std::size_t n = bodies_.size();
  for (const auto& c : translational_) {
    validate(c);
    check_body_id(c.a.body, n, "coupling '" + c.name + "'");
    check_body_id(c.b.body, n, "coupling '" + c.name + "'");
  }
  for (const auto& c : rotational_) {
    validate(c);
    check_body_id(c.a, n, "rotational coupling '" + c.name + "'");
    check_body_id(c.b, n, "rotational coupling '" + c.name + "'");
  }
  validate(driver_);
  check_body_id(driver_.body, n, "driver");
  if (!gravity_.allFinite()) {
    throw std::invalid_argument("Mechanism: gravity must be finite");
  }
  if (probes_) {
    for (BodyId id : {probes_->crank, probes_->rocker, probes_->rod, probes_->output_slider}) {
      if (id == kGround) {
        throw std::invalid_argument("ProbeLayout: probed bodies must be moving links");
      }
      check_body_id(id, n, "ProbeLayout");
    }
    for (std::size_t k : {probes_->pin_o1, probes_->pin_a, probes_->pin_o3, probes_->pin_c5}) {
      if (k >= translational_.size()) {
        throw std::invalid_argument("ProbeLayout: coupling index out of range");
      }
    }
  }
}

std::size_t Mechanism::translational_index(const std::string& name) const
{
  for (std::size_t i = 0; i < translational_.size(); ++i) {
    if (translational_[i].name == name) {
      return i;
    }
  }
  throw std::out_of_range("Mechanism: no translational coupling named '" + name + "'");
}

bool SystemState::operator==(const SystemState& o) const
{
  if (bodies.size() != o.bodies.size() || theta != o.theta || theta_err != o.theta_err || t != o.t) {
    return false;
  }
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    const auto& a = bodies[i];
    const auto& b = o.bodies[i];
    if (a.r_com != b.r_com || a.R != b.R || a.p != b.p || a.L != b.L) {
      return false;
    }
  }
  return true;
}

void check_state_shape(const Mechanism& m, const SystemState& s)
{
  if (s.bodies.size() != m.bodies().size() || s.theta.size() != m.rotational().size()) {
    throw std::invalid_argument("SystemState does not match the mechanism layout");
  }
}

void evaluate(const Mechanism& m, const SystemState& s, Evaluation& out)
{
  check_state_shape(m, s);
  const auto& bodies = m.bodies();
  const std::size_t n = bodies.size();

  out.motions.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.motions[i] = motion_of(bodies[i], s.bodies[i]);
  }
  const MotionLookup lookup{out.motions};

  auto& rate = out.rate;
  rate.bodies.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    BodyRate& r = rate.bodies[i];
    r.r_dot = out.motions[i].v_com;
    r.R_dot = skew(out.motions[i].omega) * s.bodies[i].R;
    r.p_dot = bodies[i].mass() * m.gravity();
    r.L_dot.setZero();
  }

  auto apply = [&](BodyId id, const Vec3& force, const Vec3& torque) {
    if (id == kGround) {
      return;
    }
    BodyRate& r = rate.bodies[static_cast<std::size_t>(index_of(id))];
    r.p_dot += force;
    r.L_dot += torque;
  };

  out.translational.resize(m.translational().size());
  for (std::size_t k = 0; k < m.translational().size(); ++k) {
    const auto& c = m.translational()[k];
    auto& res = out.translational[k];
    res = translational_wrench(c, lookup);
    guard(res.on_b.force, c.name);
    apply(c.a.body, res.on_a.force, res.on_a.torque_about_com);
    apply(c.b.body, res.on_b.force, res.on_b.torque_about_com);
  }

  out.rotational.resize(m.rotational().size());
  rate.theta_rate.resize(m.rotational().size());
  for (std::size_t k = 0; k < m.rotational().size(); ++k) {
    const auto& c = m.rotational()[k];
    auto& res = out.rotational[k];
    res = rotational_torque(c, s.theta[k], lookup);
    guard(res.couple_on_a, c.name);
    apply(c.a, Vec3::Zero(), res.couple_on_a);
    apply(c.b, Vec3::Zero(), res.couple_on_b);
    rate.theta_rate[k] = res.theta_rate;
  }

  const VelocityDriver& d = m.driver();
  out.driver = driver_torque(d, s.theta_err, lookup(d.body));
  guard(out.driver.couple, "driver");
  apply(d.body, Vec3::Zero(), out.driver.couple);
  rate.theta_err_rate = out.driver.theta_err_rate;
}

Evaluation evaluate(const Mechanism& m, const SystemState& s)
{
  Evaluation e;
  evaluate(m, s, e);
  return e;
}

StateRate derivative(const Mechanism& m, const SystemState& s)
{
  return evaluate(m, s).rate;
}

ProbeRecord probes(const Mechanism& m, const SystemState& s, const Evaluation& eval)
{
  if (!m.probe_layout()) {
    throw std::logic_error("probes: mechanism has no probe layout");
  }
  const ProbeLayout& layout = *m.probe_layout();
  auto state = [&](BodyId id) -> const BodyState& {
    return s.bodies[static_cast<std::size_t>(index_of(id))];
  };
  auto motion = [&](BodyId id) -> const BodyMotion& {
    return eval.motions[static_cast<std::size_t>(index_of(id))];
  };

  ProbeRecord rec;
  rec.t = s.t;
  rec.R1 = state(layout.crank).R;
  rec.crank_angle = angle_about_z(rec.R1);
  rec.crank_angle_unwrapped = rec.crank_angle;
  rec.omega1 = motion(layout.crank).omega;
  rec.L1 = state(layout.crank).L;
  rec.F_O1 = eval.translational[layout.pin_o1].on_b.force;
  rec.Tc = eval.driver.torque;
  rec.F_A2 = eval.translational[layout.pin_a].on_b.force;
  rec.r_C3 = state(layout.rocker).r_com;
  rec.p3 = state(layout.rocker).p;
  rec.F_O3 = eval.translational[layout.pin_o3].on_b.force;
  rec.r_C5 = state(layout.output_slider).r_com;
  rec.p5 = state(layout.output_slider).p;
  rec.F_C5 = eval.translational[layout.pin_c5].on_b.force;
  rec.R4 = state(layout.rod).R;
  return rec;
}

ProbeRecord probes(const Mechanism& m, const SystemState& s)
{
  return probes(m, s, evaluate(m, s));
}

EnergyAudit energy_audit(const Mechanism& m, const SystemState& s, const Evaluation& eval)
{
  EnergyAudit audit;
  for (std::size_t i = 0; i < m.bodies().size(); ++i) {
    const RigidBody& body = m.bodies()[i];
    const BodyState& st = s.bodies[i];
    const Vec3& omega = eval.motions[i].omega;
    audit.kinetic += 0.5 * st.p.squaredNorm() / body.mass() +
                     0.5 * omega.dot(world_inertia(st.R, body.inertia_body()) * omega);
    audit.potential -= body.mass() * m.gravity().dot(st.r_com);
  }
  for (std::size_t k = 0; k < m.translational().size(); ++k) {
    const auto& c = m.translational()[k];
    const auto& res = eval.translational[k];
    audit.potential += 0.5 * res.deflection.dot(c.stiffness.cwiseProduct(res.deflection));
    audit.power_diss += res.rate.dot(c.damping.cwiseProduct(res.rate));
  }
  for (std::size_t k = 0; k < m.rotational().size(); ++k) {
    const auto& c = m.rotational()[k];
    audit.potential += 0.5 * c.stiffness * s.theta[k].squaredNorm();
    audit.power_diss += c.damping * eval.rotational[k].theta_rate.squaredNorm();
  }
  const VelocityDriver& d = m.driver();
  audit.potential += 0.5 * d.stiffness * s.theta_err * s.theta_err;
  audit.power_diss += d.damping * eval.driver.theta_err_rate * eval.driver.theta_err_rate;
  audit.power_in = eval.driver.torque * d.rate;
  return audit;
}

EnergyAudit energy_audit(const Mechanism& m, const SystemState& s)
{
  return energy_audit(m, s, evaluate(m, s));
}

} // namespace qrsim
