#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qrsim/body.hpp"
#include "qrsim/couplings.hpp"

namespace qrsim {

/// Raised when a coupling force leaves the plausible range (or goes
/// non-finite); names the offending coupling.
class BlowUpError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kForceSentinel = 1e9; // N

/// Which bodies and couplings feed the logged channels. Reaction channels
/// report the b-side force, i.e. the force exerted on the named link.
struct ProbeLayout
{
  BodyId crank{1};
  BodyId rocker{3};
  BodyId rod{4};
  BodyId output_slider{5};
  std::size_t pin_o1 = 0;  // crank bearing, b = crank
  std::size_t pin_a = 0;   // crank pin, b = slider block (A2)
  std::size_t pin_o3 = 0;  // rocker bearing, b = rocker
  std::size_t pin_c5 = 0;  // rod to output slider, b = output slider
};

/// Bodies, couplings and the drive, assembled into one system. Bodies must
/// be numbered 1..n in order.
class Mechanism
{
public:
  Mechanism(std::vector<RigidBody> bodies, std::vector<TranslationalCoupling> translational,
            std::vector<RotationalCoupling> rotational, VelocityDriver driver,
            Vec3 gravity = Vec3::Zero(), std::optional<ProbeLayout> probes = std::nullopt);

  const std::vector<RigidBody>& bodies() const { return bodies_; }
  const RigidBody& body(BodyId id) const { return bodies_.at(static_cast<std::size_t>(index_of(id))); }
  const std::vector<TranslationalCoupling>& translational() const { return translational_; }
  const std::vector<RotationalCoupling>& rotational() const { return rotational_; }
  const VelocityDriver& driver() const { return driver_; }
  const Vec3& gravity() const { return gravity_; }
  const std::optional<ProbeLayout>& probe_layout() const { return probes_; }

  /// Index of a translational coupling by name; throws std::out_of_range.
  std::size_t translational_index(const std::string& name) const;

private:
  std::vector<RigidBody> bodies_;
  std::vector<TranslationalCoupling> translational_;
  std::vector<RotationalCoupling> rotational_;
  VelocityDriver driver_;
  Vec3 gravity_;
  std::optional<ProbeLayout> probes_;
};

/// Every integrally-causal storage state: body momenta and configurations,
/// rotational-lock displacements and the drive's accumulated error.
struct SystemState
{
  std::vector<BodyState> bodies;
  std::vector<Vec3> theta; // one per rotational coupling
  double theta_err = 0.0;
  double t = 0.0;

  bool operator==(const SystemState&) const;
};

struct BodyRate
{
  Vec3 r_dot = Vec3::Zero();
  Mat3 R_dot = Mat3::Zero();
  Vec3 p_dot = Vec3::Zero();
  Vec3 L_dot = Vec3::Zero();
};

struct StateRate
{
  std::vector<BodyRate> bodies;
  std::vector<Vec3> theta_rate;
  double theta_err_rate = 0.0;
};

/// One full pass over the junction structure. `derivative`, `probes` and
/// `energy_audit` all read from this, so they always agree.
struct Evaluation
{
  std::vector<BodyMotion> motions;
  std::vector<TranslationalResult> translational;
  std::vector<RotationalResult> rotational;
  DriverResult driver;
  StateRate rate;
};

/// Throws std::invalid_argument if the state does not match the mechanism.
void check_state_shape(const Mechanism& m, const SystemState& s);

/// Fills `out`, reusing its storage.
void evaluate(const Mechanism& m, const SystemState& s, Evaluation& out);
Evaluation evaluate(const Mechanism& m, const SystemState& s);

StateRate derivative(const Mechanism& m, const SystemState& s);

/// Logged channels. Forces in N, world frame; reaction forces act on the
/// named link.
struct ProbeRecord
{
  double t = 0.0;
  double crank_angle = 0.0;
  double crank_angle_unwrapped = 0.0;
  Vec3 omega1 = Vec3::Zero();
  Vec3 L1 = Vec3::Zero();
  Vec3 F_O1 = Vec3::Zero();
  double Tc = 0.0;
  Vec3 F_A2 = Vec3::Zero();
  Vec3 r_C3 = Vec3::Zero();
  Vec3 p3 = Vec3::Zero();
  Vec3 F_O3 = Vec3::Zero();
  Vec3 r_C5 = Vec3::Zero();
  Vec3 p5 = Vec3::Zero();
  Vec3 F_C5 = Vec3::Zero();
  Mat3 R1 = Mat3::Identity();
  Mat3 R4 = Mat3::Identity();
};

/// Requires a probe layout. crank_angle_unwrapped is set equal to the
/// principal value; `simulate` continues it across steps.
ProbeRecord probes(const Mechanism& m, const SystemState& s, const Evaluation& eval);
ProbeRecord probes(const Mechanism& m, const SystemState& s);

struct EnergyAudit
{
  double kinetic = 0.0;     // J
  double potential = 0.0;   // J, springs, locks, drive compliance, gravity
  double power_in = 0.0;    // W, delivered by the velocity source
  double power_diss = 0.0;  // W, all dampers, >= 0
};

EnergyAudit energy_audit(const Mechanism& m, const SystemState& s, const Evaluation& eval);
EnergyAudit energy_audit(const Mechanism& m, const SystemState& s);

} // namespace qrsim
