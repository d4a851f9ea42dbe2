#pragma once

// Penalty realizations of the joint elements: every kinematic constraint is
// replaced by a stiff spring-damper whose effort becomes a function of state.

#include <array>
#include <optional>
#include <span>
#include <string>

#include "qrsim/body.hpp"
#include "qrsim/spatial.hpp"

namespace qrsim {

/// Kinematic snapshot of one body, everything a coupling reads.
struct BodyMotion
{
  Vec3 r_com = Vec3::Zero();
  Mat3 R = Mat3::Identity();
  Vec3 v_com = Vec3::Zero();
  Vec3 omega = Vec3::Zero();
};

BodyMotion motion_of(const RigidBody& body, const BodyState& state);

/// Resolves body ids to motions; the fixed frame resolves to a motionless
/// identity frame at the origin.
class MotionLookup
{
public:
  explicit MotionLookup(std::span<const BodyMotion> bodies) : bodies_(bodies) {}

  const BodyMotion& operator()(BodyId id) const;

private:
  std::span<const BodyMotion> bodies_;
};

/// A point fixed on a body (offset in body frame) or, for kGround, a fixed
/// world point.
struct AnchorRef
{
  BodyId body = kGround;
  Vec3 offset = Vec3::Zero();
};

/// Spring-damper between two anchors, resolved in a projection frame.
///
/// With `frame` unset the stiffness and damping act along world axes. With
/// `frame` naming body a, the coupling is a slide on that body: deflections
/// and rates are expressed in a's frame, and the reaction on a acts at the
/// material point of a that currently coincides with anchor b. Free axes
/// carry no stiffness and no damping.
struct TranslationalCoupling
{
  std::string name;
  AnchorRef a;
  AnchorRef b;
  Vec3 stiffness = Vec3::Zero(); // diagonal, N/m
  Vec3 damping = Vec3::Zero();   // diagonal, N·s/m
  std::optional<BodyId> frame;
  std::array<bool, 3> free_axes{false, false, false};
};

/// Throws std::invalid_argument on negative or non-finite coefficients, a free
/// axis with nonzero stiffness or damping, or a projection frame that is not
/// body a.
void validate(const TranslationalCoupling& c);

/// Relative-rotation lock. Its angular displacement is an integrated state
/// owned by the system state, not by this record.
struct RotationalCoupling
{
  std::string name;
  BodyId a = kGround;
  BodyId b = kGround;
  double stiffness = 0.0; // N·m/rad
  double damping = 0.0;   // N·m·s/rad
};

void validate(const RotationalCoupling& c);

/// Compliant angular-velocity source acting on one body about a world axis.
/// The accumulated rate error is an integrated state.
struct VelocityDriver
{
  BodyId body = kGround;
  Vec3 axis = Vec3::UnitZ();
  double rate = 0.0;      // rad/s
  double stiffness = 0.0; // N·m/rad
  double damping = 0.0;   // N·m·s/rad
};

void validate(const VelocityDriver& d);

struct Wrench
{
  Vec3 force = Vec3::Zero();
  Vec3 torque_about_com = Vec3::Zero();
  Vec3 application_point = Vec3::Zero();
};

struct TranslationalResult
{
  Wrench on_a;
  Wrench on_b;
  Vec3 deflection = Vec3::Zero(); // in projection frame, free axes zeroed
  Vec3 rate = Vec3::Zero();       // in projection frame, free axes zeroed
  Vec3 effort = Vec3::Zero();     // K·deflection + D·rate, projection frame
};

TranslationalResult translational_wrench(const TranslationalCoupling& c,
                                         const MotionLookup& motions);

struct RotationalResult
{
  Vec3 couple_on_a = Vec3::Zero();
  Vec3 couple_on_b = Vec3::Zero();
  Vec3 theta_rate = Vec3::Zero();
};

RotationalResult rotational_torque(const RotationalCoupling& c, const Vec3& theta,
                                   const MotionLookup& motions);

struct DriverResult
{
  Vec3 couple = Vec3::Zero();
  double theta_err_rate = 0.0;
  double torque = 0.0; // T_c
};

DriverResult driver_torque(const VelocityDriver& d, double theta_err, const BodyMotion& body);

} // namespace qrsim
