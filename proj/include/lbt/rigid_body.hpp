#pragma once

#include <functional>
#include <utility>

#include "lbt/so3.hpp"
#include "lbt/types.hpp"

namespace lbt {

/// Mass, inertia tensor and body-fixed thrust axis of the vehicle.
struct VehicleParams {
  double m = 1.0;                  // [kg]
  Mat3 J = Mat3::Identity();       // [kg m^2], symmetric positive definite
  Vec3 e = Vec3(0, 0, 1);          // unit thrust direction, body frame

  /// Throws on m <= 0, non-SPD J or non-unit e.
  void validate() const;
};

/// Full vehicle state on SE(3) x R^6.
/// p, v are world frame; omega is body frame.
struct BodyState {
  Mat3 R = Mat3::Identity();
  Vec3 p = Vec3::Zero();     // [m]
  Vec3 omega = Vec3::Zero(); // [rad/s]
  Vec3 v = Vec3::Zero();     // [m/s], world-frame dp/dt

  /// Translational state x = [p; v].
  Vec6 x() const {
    Vec6 out;
    out << p, v;
    return out;
  }

  bool finite() const {
    return R.allFinite() && p.allFinite() && omega.allFinite() && v.allFinite();
  }
};

struct StateDerivative {
  Mat3 dR;
  Vec3 dp;
  Vec3 domega;
  Vec3 dv;
};

/// Rigid-body dynamics:
///   m dv     = R e u + f
///   dR       = R hat(omega)
///   J domega = (J omega) x omega + tau + f_omega
StateDerivative dynamics(const BodyState& s, double u, const Vec3& tau,
                         const Vec3& f, const Vec3& f_omega,
                         const VehicleParams& params);

/// Controller dynamic-extension state carried through the integrator:
/// aux = [u, u_dot], daux = [u_dot, u_ddot].
using Aux = Eigen::Vector2d;

/// Evaluates time derivatives of the plant state and the extension state.
using DerivFn = std::function<std::pair<StateDerivative, Aux>(
    double t, const BodyState& s, const Aux& aux)>;

/// One classical RK4 step of (R, p, omega, v, aux). The rotation is
/// re-projected onto SO(3) after the update. Throws IntegrationError
/// if the result is non-finite.
std::pair<BodyState, Aux> rk4_step(double t, const BodyState& s,
                                   const Aux& aux, const DerivFn& deriv,
                                   double dt);

}  // namespace lbt
