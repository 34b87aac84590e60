#include "lbt/rigid_body.hpp"

#include <cmath>

namespace lbt {

void VehicleParams::validate() const {
  if (!(m > 0.0)) throw Error("VehicleParams: mass must be positive");
  if ((J - J.transpose()).norm() > 1e-12 * (1.0 + J.norm())) {
    throw Error("VehicleParams: inertia tensor must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(J);
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw Error("VehicleParams: inertia tensor must be positive definite");
  }
  if (std::abs(e.norm() - 1.0) > 1e-12) {
    throw Error("VehicleParams: thrust axis must be a unit vector");
  }
}

StateDerivative dynamics(const BodyState& s, double u, const Vec3& tau,
                         const Vec3& f, const Vec3& f_omega,
                         const VehicleParams& params) {
  StateDerivative d;
  d.dp = s.v;
  d.dv = (s.R * params.e * u + f) / params.m;
  d.dR = s.R * hat(s.omega);
  const Vec3 gyro = (params.J * s.omega).cross(s.omega);
  d.domega = params.J.ldlt().solve(gyro + tau + f_omega);
  return d;
}

namespace {

struct Increment {
  Mat3 dR;
  Vec3 dp, domega, dv;
  Aux daux;
};

BodyState advance(const BodyState& s, const Increment& k, double h) {
  BodyState out;
  out.R = s.R + h * k.dR;
  out.p = s.p + h * k.dp;
  out.omega = s.omega + h * k.domega;
  out.v = s.v + h * k.dv;
  return out;
}

}  // namespace

std::pair<BodyState, Aux> rk4_step(double t, const BodyState& s,
                                   const Aux& aux, const DerivFn& deriv,
                                   double dt) {
  auto eval = [&](double tt, const BodyState& ss, const Aux& aa) {
    auto [ds, da] = deriv(tt, ss, aa);
    return Increment{ds.dR, ds.dp, ds.domega, ds.dv, da};
  };

  const Increment k1 = eval(t, s, aux);
  const Increment k2 =
      eval(t + 0.5 * dt, advance(s, k1, 0.5 * dt), aux + 0.5 * dt * k1.daux);
  const Increment k3 =
      eval(t + 0.5 * dt, advance(s, k2, 0.5 * dt), aux + 0.5 * dt * k2.daux);
  const Increment k4 = eval(t + dt, advance(s, k3, dt), aux + dt * k3.daux);

  const double w = dt / 6.0;
  BodyState out;
  out.R = s.R + w * (k1.dR + 2 * k2.dR + 2 * k3.dR + k4.dR);
  out.p = s.p + w * (k1.dp + 2 * k2.dp + 2 * k3.dp + k4.dp);
  out.omega = s.omega + w * (k1.domega + 2 * k2.domega + 2 * k3.domega + k4.domega);
  out.v = s.v + w * (k1.dv + 2 * k2.dv + 2 * k3.dv + k4.dv);
  Aux aux_out = aux + w * (k1.daux + 2 * k2.daux + 2 * k3.daux + k4.daux);

  if (!out.finite() || !aux_out.allFinite()) throw IntegrationError(t);
  out.R = project_so3(out.R);
  return {out, aux_out};
}

}  // namespace lbt
