#include "qrsim/couplings.hpp"

#include <cmath>
#include <stdexcept>

namespace qrsim {

namespace {

const BodyMotion kGroundMotion{};

bool non_negative_finite(double v) { return std::isfinite(v) && v >= 0.0; }

} // namespace

BodyMotion motion_of(const RigidBody& body, const BodyState& state)
{
  return BodyMotion{state.r_com, state.R, state.p / body.mass(),
                    omega_from_state(state, body.inertia_body())};
}

const BodyMotion& MotionLookup::operator()(BodyId id) const
{
  if (id == kGround) {
    return kGroundMotion;
  }
  const int i = index_of(id);
  if (i < 0 || i >= static_cast<int>(bodies_.size())) {
    throw std::out_of_range("MotionLookup: unknown body id " + std::to_string(i + 1));
  }
  return bodies_[static_cast<std::size_t>(i)];
}

void validate(const TranslationalCoupling& c)
{
  for (int k = 0; k < 3; ++k) {
    if (!non_negative_finite(c.stiffness[k]) || !non_negative_finite(c.damping[k])) {
      throw std::invalid_argument("coupling '" + c.name +
                                  "': stiffness and damping must be finite and >= 0");
    }
    if (c.free_axes[static_cast<std::size_t>(k)] && (c.stiffness[k] != 0.0 || c.damping[k] != 0.0)) {
      throw std::invalid_argument("coupling '" + c.name + "': free axis " + std::to_string(k) +
                                  " must carry zero stiffness and damping");
    }
  }
  if (!c.a.offset.allFinite() || !c.b.offset.allFinite()) {
    throw std::invalid_argument("coupling '" + c.name + "': non-finite anchor offset");
  }
  if (c.a.body == c.b.body) {
    throw std::invalid_argument("coupling '" + c.name + "': both anchors on the same body");
  }
  if (c.frame && (*c.frame != c.a.body || c.a.body == kGround)) {
    throw std::invalid_argument("coupling '" + c.name +
                                "': a body projection frame must be the moving body of anchor a");
  }
}

void validate(const RotationalCoupling& c)
{
  if (!non_negative_finite(c.stiffness) || !non_negative_finite(c.damping)) {
    throw std::invalid_argument("rotational coupling '" + c.name +
                                "': stiffness and damping must be finite and >= 0");
  }
  if (c.a == c.b) {
    throw std::invalid_argument("rotational coupling '" + c.name + "': a and b coincide");
  }
}

void validate(const VelocityDriver& d)
{
  if (d.body == kGround) {
    throw std::invalid_argument("driver must act on a moving body");
  }
  if (std::abs(d.axis.norm() - 1.0) > 1e-12) {
    throw std::invalid_argument("driver axis must be a unit vector");
  }
  if (!non_negative_finite(d.stiffness) || !non_negative_finite(d.damping) ||
      !std::isfinite(d.rate)) {
    throw std::invalid_argument("driver stiffness and damping must be finite and >= 0");
  }
}

TranslationalResult translational_wrench(const TranslationalCoupling& c,
                                         const MotionLookup& motions)
{
  for (int k = 0; k < 3; ++k) {
    if (c.free_axes[static_cast<std::size_t>(k)] && (c.stiffness[k] != 0.0 || c.damping[k] != 0.0)) {
      throw std::invalid_argument("coupling '" + c.name + "': free axis " + std::to_string(k) +
                                  " must carry zero stiffness and damping");
    }
  }

  const BodyMotion& ma = motions(c.a.body);
  const BodyMotion& mb = motions(c.b.body);

  const Vec3 arm_b = mb.R * c.b.offset;
  const Vec3 xb = mb.r_com + arm_b;
  const Vec3 vb = mb.v_com + mb.omega.cross(arm_b);
  const Vec3 xa_anchor = ma.r_com + ma.R * c.a.offset;

  // On a slide the reaction on a acts where b currently touches it.
  const Vec3 xa = c.frame ? xb : xa_anchor;
  const Vec3 va = ma.v_com + ma.omega.cross(xa - ma.r_com);
  const Mat3 rf = c.frame ? ma.R : Mat3(Mat3::Identity());

  TranslationalResult out;
  out.deflection = rf.transpose() * (xb - xa_anchor);
  out.rate = rf.transpose() * (vb - va);
  for (int k = 0; k < 3; ++k) {
    if (c.free_axes[static_cast<std::size_t>(k)]) {
      out.deflection[k] = 0.0;
      out.rate[k] = 0.0;
    }
  }
  out.effort = c.stiffness.cwiseProduct(out.deflection) + c.damping.cwiseProduct(out.rate);

  const Vec3 force_b = -(rf * out.effort);
  out.on_b = Wrench{force_b, (xb - mb.r_com).cross(force_b), xb};
  out.on_a = Wrench{-force_b, (xa - ma.r_com).cross(-force_b), xa};
  return out;
}

RotationalResult rotational_torque(const RotationalCoupling& c, const Vec3& theta,
                                   const MotionLookup& motions)
{
  const Vec3 omega_rel = motions(c.b).omega - motions(c.a).omega;
  const Vec3 couple = c.stiffness * theta + c.damping * omega_rel;
  return RotationalResult{couple, -couple, omega_rel};
}

DriverResult driver_torque(const VelocityDriver& d, double theta_err, const BodyMotion& body)
{
  const double slip = d.rate - body.omega.dot(d.axis);
  const double torque = d.stiffness * theta_err + d.damping * slip;
  return DriverResult{torque * d.axis, slip, torque};
}

} // namespace qrsim
