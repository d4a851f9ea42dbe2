#include <cmath>
#include <numbers>
#include <stdexcept>

#include <gtest/gtest.h>

#include "qrsim/csv_table.hpp"
#include "qrsim/integrator.hpp"
#include "qrsim/scenario.hpp"

using namespace qrsim;

namespace {

// One 0.1 kg body on a ground spring-damper acting along world x only.
Mechanism oscillator(double k = 1e5, double d = 20.0)
{
  TranslationalCoupling c;
  c.name = "spring";
  c.a = {kGround, Vec3::Zero()};
  c.b = {body_id(1), Vec3::Zero()};
  c.stiffness = Vec3(k, 0, 0);
  c.damping = Vec3(d, 0, 0);
  c.free_axes = {false, true, true};
  return Mechanism({RigidBody(body_id(1), "mass", 0.1, box_inertia(0.1, 0.01, 0.01, 0.01))}, {c},
                   {}, VelocityDriver{body_id(1), Vec3::UnitZ(), 0, 0, 0});
}

SystemState displaced(double x0)
{
  SystemState s;
  s.bodies.resize(1);
  s.bodies[0].r_com = Vec3(x0, 0, 0);
  return s;
}

// Underdamped free response from rest at x0.
double damped_closed_form(double x0, double m, double k, double d, double t)
{
  const double wn = std::sqrt(k / m);
  const double zeta = d / (2 * std::sqrt(k * m));
  const double wd = wn * std::sqrt(1 - zeta * zeta);
  return x0 * std::exp(-zeta * wn * t) *
         (std::cos(wd * t) + zeta / std::sqrt(1 - zeta * zeta) * std::sin(wd * t));
}

double oscillator_max_error(double dt, int periods)
{
  const Mechanism m = oscillator();
  SystemState s = displaced(1e-3);
  const double period = 2 * std::numbers::pi / (1000.0 * std::sqrt(1 - 0.01));
  const auto steps = static_cast<long>(std::llround(periods * period / dt));
  Rk4Stepper stepper(m);
  double worst = 0.0;
  for (long k = 1; k <= steps; ++k) {
    stepper.step(s, dt);
    const double exact = damped_closed_form(1e-3, 0.1, 1e5, 20.0, k * dt);
    worst = std::max(worst, std::abs(s.bodies[0].r_com.x() - exact));
  }
  return worst;
}

Mechanism spinning_top(const Mat3& inertia)
{
  return Mechanism({RigidBody(body_id(1), "top", 1.0, inertia)}, {}, {},
                   VelocityDriver{body_id(1), Vec3::UnitZ(), 0, 0, 0});
}

} // namespace

TEST(Flatten, ScenarioLengthAndRoundTrip)
{
  const QuickReturnModel model = build_quick_return({});
  const StateShape shape = shape_of(model.mechanism);
  EXPECT_EQ(shape.flat_size(), 94u);
  SystemState s = model.initial;
  s.t = 0.123;
  s.theta_err = -0.5;
  s.bodies[3].L = Vec3(1e-300, -2.5, std::nextafter(1.0, 2.0));
  const FlatState f = flatten(s);
  EXPECT_EQ(f.values.size(), 94u);
  EXPECT_TRUE(unflatten(f, shape) == s);

  FlatState shorter = f;
  shorter.values.pop_back();
  EXPECT_THROW(unflatten(shorter, shape), std::invalid_argument);
}

TEST(Rk4, FreeParticleAdvancesExactly)
{
  const Mechanism m({RigidBody(body_id(1), "p", 0.1, box_inertia(0.1, 0.01, 0.01, 0.01))}, {}, {},
                    VelocityDriver{body_id(1), Vec3::UnitZ(), 0, 0, 0});
  SystemState s;
  s.bodies.resize(1);
  s.bodies[0].p = Vec3(0.1, 0, 0);
  const SystemState next = rk4_step(m, s, 1e-4);
  EXPECT_EQ(next.bodies[0].r_com, Vec3(1e-4, 0, 0));
  EXPECT_EQ(next.t, 1e-4);
}

TEST(Rk4, ConstantSpinAdvancesAngle)
{
  const Mat3 I = box_inertia(0.5, 0.2, 0.01, 0.01);
  const Mechanism m = spinning_top(I);
  SystemState s;
  s.bodies.resize(1);
  s.bodies[0].R = rot_z(0.2).matrix();
  s.bodies[0].L = Vec3(0, 0, 5 * I(2, 2));
  Rk4Stepper stepper(m);
  double angle = 0.2;
  for (int k = 0; k < 1000; ++k) {
    stepper.step(s, 1e-4);
    angle = unwrap_angle(angle, angle_about_z(s.bodies[0].R));
  }
  EXPECT_NEAR(angle - 0.2, 0.5, 1e-9);
}

TEST(Rk4, DampedOscillatorMatchesClosedForm)
{
  EXPECT_LE(oscillator_max_error(1e-4, 10), 1e-4 * 1e-3);
}

TEST(Rk4, FourthOrderConvergenceOnOscillator)
{
  const double e1 = oscillator_max_error(2e-4, 5);
  const double e2 = oscillator_max_error(1e-4, 5);
  const double e3 = oscillator_max_error(5e-5, 5);
  EXPECT_GE(e1 / e2, 12.0);
  EXPECT_GE(e2 / e3, 12.0);
  EXPECT_LE(e1 / e2, 20.0);
}

TEST(Rk4, TorqueFreeTopConservesMomentumAndEnergy)
{
  const Mat3 I = Vec3(0.01, 0.02, 0.035).asDiagonal();
  const Mechanism m = spinning_top(I);
  SystemState s;
  s.bodies.resize(1);
  s.bodies[0].L = I * Vec3(1.0, 3.0, 0.5);
  const Vec3 L0 = s.bodies[0].L;
  const double ke0 = energy_audit(m, s).kinetic;
  Rk4Stepper stepper(m);
  double worst_defect = 0.0;
  for (int k = 0; k < 10000; ++k) {
    stepper.step(s, 1e-4);
    worst_defect = std::max(worst_defect, orthonormality_defect(s.bodies[0].R));
  }
  EXPECT_LE((s.bodies[0].L - L0).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(std::abs(energy_audit(m, s).kinetic - ke0) / ke0, 1e-6);
  EXPECT_LE(worst_defect, 1e-12);
}

TEST(Rk4, InternalPinRigConservesMomentum)
{
  TranslationalCoupling pin;
  pin.name = "pin";
  pin.a = {body_id(1), Vec3(0.1, 0, 0)};
  pin.b = {body_id(2), Vec3(-0.2, 0, 0)};
  pin.stiffness = Vec3::Constant(1e5);
  pin.damping = Vec3::Constant(20);
  const Mechanism m({RigidBody(body_id(1), "a", 0.5, box_inertia(0.5, 0.2, 0.01, 0.01)),
                     RigidBody(body_id(2), "b", 0.3, box_inertia(0.3, 0.4, 0.01, 0.01))},
                    {pin}, {}, VelocityDriver{body_id(1), Vec3::UnitZ(), 0, 0, 0});
  SystemState s;
  s.bodies.resize(2);
  s.bodies[1].r_com = Vec3(0.3005, 0.0003, 0.0);
  s.bodies[0].p = Vec3(0.2, 0.1, 0.0);
  s.bodies[1].p = Vec3(-0.05, 0.3, 0.01);
  s.bodies[0].L = Vec3(0, 0, 0.004);
  s.bodies[1].L = Vec3(1e-5, 0, -0.01);
  const Vec3 p0 = s.bodies[0].p + s.bodies[1].p;
  Rk4Stepper stepper(m);
  for (int k = 0; k < 100000; ++k) {
    stepper.step(s, 1e-5);
  }
  EXPECT_LE((s.bodies[0].p + s.bodies[1].p - p0).norm(), 1e-9);
}

TEST(Stability, OscillatorBoundBracketsTheRk4Limit)
{
  const Mechanism m = oscillator();
  const SystemState s = displaced(1e-3);
  EXPECT_TRUE(linear_stability(m, s, 1e-4).stable);
  EXPECT_FALSE(linear_stability(m, s, 3e-3).stable);
  const double dt_max = max_stable_dt(m, s);
  // |λ| ≈ 1000 1/s with 10% damping; RK4's imaginary-axis reach is 2.83.
  EXPECT_GT(dt_max, 2.5e-3);
  EXPECT_LT(dt_max, 3.0e-3);
  EXPECT_NEAR(linear_stability(m, s, 1e-4).spectral_radius, 1000.0, 1.0);
}

TEST(Simulate, RejectsUnstableStepForScenario)
{
  const QuickReturnModel model = build_quick_return({});
  SimConfig cfg;
  cfg.dt = 1e-4;
  cfg.t_end = 0.01;
  EXPECT_THROW(simulate(model.mechanism, model.initial, cfg), std::invalid_argument);
  EXPECT_LT(max_stable_dt(model.mechanism, model.initial), 1e-5);
}

TEST(Simulate, RejectsBadConfig)
{
  SimConfig cfg;
  cfg.dt = -1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = SimConfig{};
  cfg.record_stride = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Simulate, RowScheduleAndDeterminism)
{
  const QuickReturnModel model = build_quick_return({});
  SimConfig cfg;
  cfg.t_end = 0.0501;
  cfg.record_stride = 1000;
  const TimeSeries a = simulate(model.mechanism, model.initial, cfg);
  const TimeSeries b = simulate(model.mechanism, model.initial, cfg);
  // 10020 steps: rows at 0, 1000, ..., 10000 and the last step.
  ASSERT_EQ(a.rows.size(), 12u);
  EXPECT_EQ(a.rows.front().t, 0.0);
  EXPECT_NEAR(a.rows.back().t, 0.0501, 1e-12);
  for (std::size_t i = 1; i < a.rows.size(); ++i) {
    EXPECT_GT(a.rows[i].t, a.rows[i - 1].t);
  }
  EXPECT_EQ(format_probe_csv(a), format_probe_csv(b));
}

TEST(Simulate, LockDisplacementIsIntegralOfRelativeSpin)
{
  const QuickReturnModel model = build_quick_return({});
  const Mechanism& m = model.mechanism;
  const auto& lock = m.rotational().front();
  SimConfig cfg;
  cfg.t_end = 1.0;
  cfg.record_stride = 1;
  double integral = 0.0;
  double prev_t = 0.0;
  double prev_w = 0.0;
  double theta = 0.0;
  bool first = true;
  simulate(m, model.initial, cfg,
           [&](const SystemState& s, const Evaluation& e, const ProbeRecord& rec) {
             const double w = e.motions[static_cast<std::size_t>(index_of(lock.b))].omega.z() -
                              e.motions[static_cast<std::size_t>(index_of(lock.a))].omega.z();
             if (!first) {
               integral += 0.5 * (w + prev_w) * (rec.t - prev_t);
             }
             first = false;
             prev_t = rec.t;
             prev_w = w;
             theta = s.theta.front().z();
           });
  EXPECT_NEAR(theta, integral, 1e-6);
}
