#pragma once

#include "lbt/oracle.hpp"
#include "lbt/rigid_body.hpp"
#include "lbt/trajectory.hpp"
#include "lbt/types.hpp"

namespace lbt {

/// System matrix A of the translational double integrator x = [p; v].
Mat6 system_matrix();

/// Input matrix B = [0; I/m].
Mat63 input_matrix(double m);

/// Solves P A_cl + A_cl' P = -Q for symmetric positive definite P via the
/// vectorized (Kronecker) 36x36 linear system. Requires A_cl Hurwitz and
/// Q positive definite; throws CertificateError otherwise.
Mat6 solve_lyapunov(const Mat6& A_cl, const Mat6& Q);

/// Feedback-gain schedule and backstepping gains.
struct GainParams {
  Mat36 G0 = Mat36::Zero();      // initial feedback gain
  double gamma = 0.9;            // per-update decay, in (0, 1]
  Mat3 Gz1 = 2.0 * Mat3::Identity();
  Mat3 Gz2 = 2.0 * Mat3::Identity();
  Mat6 Q = Mat6::Identity();

  void validate() const;
};

/// Lyapunov certificate for the n-th gain: G_n = gamma^n G0 with P_n
/// solving the Lyapunov equation and the error-ball radius factor b_n.
struct GainCertificate {
  int n = 0;
  Mat36 G = Mat36::Zero();
  Mat6 P = Mat6::Identity();
  Mat6 Q = Mat6::Identity();
  double b = 1.0;  // sqrt(max{eig P, 1} / min{eig P, 1})
};

/// Computes the certificate for index n; throws CertificateError if the
/// decayed gain no longer renders A - B G_n Hurwitz.
GainCertificate gain_schedule(const GainParams& params, int n, double m);

/// Dynamic thrust extension: u is integrated from the commanded u_ddot.
struct ControllerState {
  double u = 0.0;      // [N]
  double u_dot = 0.0;  // [N/s]
};

struct ControllerConfig {
  double u_min = 0.1;    // singularity guard threshold [N]
  double k_u = 50.0;     // guard recovery rate [1/s^2]
  double u_hover = 9.81; // guard target thrust [N]
};

struct ControlOutput {
  Vec3 tau = Vec3::Zero();
  double u_ddot = 0.0;
  // diagnostics
  Vec6 z0 = Vec6::Zero();
  Vec3 z1 = Vec3::Zero();
  Vec3 z2 = Vec3::Zero();
  double V = 0.0;
  double rho_bar = 0.0;
  double bound = 0.0;  // rho_bar * b_n
  bool guard_active = false;
};

/// State-derivative estimate that avoids measured accelerations:
/// xhat_dot = A x + B (g + f_hat).
Vec6 xhat_dot(const Vec6& x, const Vec3& g, const Vec3& fhat, double m);

/// State Jacobian of xhat_dot: A + B * (d f_hat / d x).
Mat6 xhat_dot_jacobian(const Mat36& jac_f, double m);

/// Desired virtual force g_d = m a_d - G z0 - f_hat.
Vec3 desired_force(const TrajectoryPoint& d, const GainCertificate& cert,
                   const Vec6& x, const Vec3& fhat, double m);

/// Desired virtual force rate
/// g_dd = m j_d - G (xhat_dot - xd_dot) - B'P z0 - Gz1 z1 - jac_f xhat_dot.
Vec3 desired_force_dot(const TrajectoryPoint& d, const GainCertificate& cert,
                       const Vec6& x, const Prediction& pred, const Vec3& g,
                       double m, const Mat3& Gz1);

/// Desired virtual force second derivative (the feedforward driving the
/// torque/thrust law). `sec_f` is the oracle's second-derivative term at
/// v = xhat_dot.
Vec3 desired_force_ddot(const TrajectoryPoint& d, const GainCertificate& cert,
                        const Vec6& x, const Prediction& pred,
                        const Vec3& sec_f, const Vec3& g, const Vec3& g_dot,
                        double m, const Mat3& Gz1, const Mat3& Gz2);

/// One evaluation of the full control law. Pure in all inputs.
ControlOutput control_step(double t, const GainCertificate& cert,
                           const BodyState& s, const DesiredTrajectory& traj,
                           const Oracle& oracle, const ControllerState& ctl,
                           const VehicleParams& vehicle,
                           const GainParams& gains,
                           const ControllerConfig& cc);

/// Ultimate tracking-error bound max rho_bar * b_n.
double ultimate_bound(const GainCertificate& cert, double rho_max);

/// lambda_n = (||P B|| + ||Dbar B|| + ||Ebar B|| + cbar) /
///            min{eig Q, eig Gz1, eig Gz2}.
/// Dbar, Ebar are empirical sups of the proof quantities D(x), E(x);
/// diagnostic only, not a certified bound.
double lambda_diagnostic(const GainCertificate& cert, const GainParams& gains,
                         const Mat36& Dbar, const Mat36& Ebar, double cbar,
                         double m);

}  // namespace lbt
