#include "lbt/controller.hpp"

#include <cmath>

namespace lbt {

Mat6 system_matrix() {
  Mat6 A = Mat6::Zero();
  A.topRightCorner<3, 3>().setIdentity();
  return A;
}

Mat63 input_matrix(double m) {
  Mat63 B = Mat63::Zero();
  B.bottomRows<3>() = Mat3::Identity() / m;
  return B;
}

namespace {

bool symmetric_pd(const MatX& M, double tol = 1e-12) {
  if ((M - M.transpose()).norm() > tol * (1.0 + M.norm())) return false;
  Eigen::SelfAdjointEigenSolver<MatX> es(M);
  return es.eigenvalues().minCoeff() > 0.0;
}

double spectral_norm(const MatX& M) {
  return M.jacobiSvd().singularValues()(0);
}

}  // namespace

void GainParams::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw Error("GainParams: gamma must be in (0, 1]");
  }
  if (!symmetric_pd(Gz1)) throw Error("GainParams: Gz1 must be symmetric PD");
  if (!symmetric_pd(Gz2)) throw Error("GainParams: Gz2 must be symmetric PD");
  Eigen::SelfAdjointEigenSolver<Mat6> es(0.5 * (Q + Q.transpose()));
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw Error("GainParams: Q must be positive definite");
  }
}

Mat6 solve_lyapunov(const Mat6& A_cl, const Mat6& Q) {
  {
    Eigen::SelfAdjointEigenSolver<Mat6> esq(0.5 * (Q + Q.transpose()));
    if (esq.eigenvalues().minCoeff() <= 0.0) {
      throw CertificateError("solve_lyapunov: Q must be positive definite");
    }
  }
  Eigen::EigenSolver<Mat6> es(A_cl);
  for (int i = 0; i < 6; ++i) {
    const auto ev = es.eigenvalues()[i];
    if (ev.real() >= 0.0) {
      throw CertificateError(
          "solve_lyapunov: A_cl is not Hurwitz, eigenvalue " +
          std::to_string(ev.real()) + (ev.imag() >= 0 ? "+" : "") +
          std::to_string(ev.imag()) + "i");
    }
  }
  // vec(P A_cl) + vec(A_cl' P) = -vec(Q), column-major vectorization:
  //   (A_cl' (x) I + I (x) A_cl') vec(P) = -vec(Q)
  MatX M = MatX::Zero(36, 36);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      // kron(A_cl', I): block (i,j) = A_cl(j,i) * I
      for (int k = 0; k < 6; ++k) M(6 * i + k, 6 * j + k) += A_cl(j, i);
    }
    // kron(I, A_cl'): diagonal blocks A_cl'
    M.block<6, 6>(6 * i, 6 * i) += A_cl.transpose();
  }
  VecX q(36);
  for (int j = 0; j < 6; ++j)
    for (int i = 0; i < 6; ++i) q[6 * j + i] = -Q(i, j);
  const VecX p = M.partialPivLu().solve(q);
  Mat6 P;
  for (int j = 0; j < 6; ++j)
    for (int i = 0; i < 6; ++i) P(i, j) = p[6 * j + i];
  P = 0.5 * (P + P.transpose()).eval();

  const double residual = (P * A_cl + A_cl.transpose() * P + Q).norm();
  if (residual > 1e-9 * Q.norm()) {
    throw CertificateError("solve_lyapunov: residual " +
                           std::to_string(residual) + " exceeds tolerance");
  }
  Eigen::SelfAdjointEigenSolver<Mat6> esp(P);
  if (esp.eigenvalues().minCoeff() <= 0.0) {
    throw CertificateError("solve_lyapunov: P is not positive definite");
  }
  return P;
}

GainCertificate gain_schedule(const GainParams& params, int n, double m) {
  params.validate();
  if (n < 0) throw Error("gain_schedule: n must be >= 0");
  GainCertificate cert;
  cert.n = n;
  cert.G = std::pow(params.gamma, n) * params.G0;
  cert.Q = params.Q;
  const Mat6 A_cl = system_matrix() - input_matrix(m) * cert.G;
  cert.P = solve_lyapunov(A_cl, params.Q);
  Eigen::SelfAdjointEigenSolver<Mat6> es(cert.P);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  cert.b = std::sqrt(std::max(hi, 1.0) / std::min(lo, 1.0));
  return cert;
}

Vec6 xhat_dot(const Vec6& x, const Vec3& g, const Vec3& fhat, double m) {
  Vec6 out;
  out.head<3>() = x.tail<3>();
  out.tail<3>() = (g + fhat) / m;
  return out;
}

Mat6 xhat_dot_jacobian(const Mat36& jac_f, double m) {
  return system_matrix() + input_matrix(m) * jac_f;
}

Vec3 desired_force(const TrajectoryPoint& d, const GainCertificate& cert,
                   const Vec6& x, const Vec3& fhat, double m) {
  Vec6 xd;
  xd << d.p, d.v;
  return m * d.a - cert.G * (x - xd) - fhat;
}

Vec3 desired_force_dot(const TrajectoryPoint& d, const GainCertificate& cert,
                       const Vec6& x, const Prediction& pred, const Vec3& g,
                       double m, const Mat3& Gz1) {
  const Vec3 fhat = pred.mean.head<3>();
  Vec6 xd, xd_dot;
  xd << d.p, d.v;
  xd_dot << d.v, d.a;
  const Vec6 z0 = x - xd;
  const Vec3 z1 = g - desired_force(d, cert, x, fhat, m);
  const Vec6 xdh = xhat_dot(x, g, fhat, m);
  const Mat63 B = input_matrix(m);
  return m * d.j - cert.G * (xdh - xd_dot) - B.transpose() * cert.P * z0 -
         Gz1 * z1 - pred.jac_f * xdh;
}

Vec3 desired_force_ddot(const TrajectoryPoint& d, const GainCertificate& cert,
                        const Vec6& x, const Prediction& pred,
                        const Vec3& sec_f, const Vec3& g, const Vec3& g_dot,
                        double m, const Mat3& Gz1, const Mat3& Gz2) {
  const Vec3 fhat = pred.mean.head<3>();
  Vec6 xd, xd_dot, xd_ddot;
  xd << d.p, d.v;
  xd_dot << d.v, d.a;
  xd_ddot << d.a, d.j;
  const Vec6 z0 = x - xd;
  const Vec6 xdh = xhat_dot(x, g, fhat, m);
  const Mat6 Jxdh = xhat_dot_jacobian(pred.jac_f, m);
  const Mat63 B = input_matrix(m);
  const Eigen::Matrix<double, 3, 6> BtP = B.transpose() * cert.P;

  // d/dt xhat_dot = Jxdh * xhat_dot + B * g_dot: the estimate depends on x
  // and on g, so its full time derivative carries a B g_dot contribution
  // through both the G_n and the jac_f feedforward terms.
  return m * d.snap
         - cert.G * (Jxdh * xdh + B * g_dot - xd_ddot)
         - BtP * (xdh - xd_dot)
         - (Gz1 + Gz2) *
               (g_dot - m * d.j + cert.G * (xdh - xd_dot) + pred.jac_f * xdh)
         - (Gz2 * Gz1 + Mat3::Identity()) *
               (g - m * d.a + cert.G * z0 + fhat)
         - Gz2 * (BtP * z0)
         - sec_f - pred.jac_f * (B * g_dot);
}

ControlOutput control_step(double t, const GainCertificate& cert,
                           const BodyState& s, const DesiredTrajectory& traj,
                           const Oracle& oracle, const ControllerState& ctl,
                           const VehicleParams& vehicle,
                           const GainParams& gains,
                           const ControllerConfig& cc) {
  const TrajectoryPoint d = traj(t);
  const Prediction pred = oracle.predict(s);
  const Vec3 fhat = pred.mean.head<3>();
  const Vec3 fw_hat = pred.mean.tail<3>();
  const double m = vehicle.m;
  const Vec3& e = vehicle.e;

  const Vec6 x = s.x();
  const Mat3 W = hat(s.omega);
  const Vec3 g = s.R * e * ctl.u;
  const Vec3 g_dot = s.R * (W * e * ctl.u + e * ctl.u_dot);

  const Vec6 xdh = xhat_dot(x, g, fhat, m);
  const Mat6 Jxdh = xhat_dot_jacobian(pred.jac_f, m);
  const Vec3 sec_f = oracle.mean_second_term(s, xdh, Jxdh);

  const Vec3 g_d = desired_force(d, cert, x, fhat, m);
  const Vec3 g_dd = desired_force_dot(d, cert, x, pred, g, m, gains.Gz1);
  const Vec3 g_ddd = desired_force_ddot(d, cert, x, pred, sec_f, g, g_dot, m,
                                        gains.Gz1, gains.Gz2);

  ControlOutput out;
  Vec6 xd;
  xd << d.p, d.v;
  out.z0 = x - xd;
  out.z1 = g - g_d;
  out.z2 = g_dot - g_dd;
  out.V = 0.5 * out.z0.dot(cert.P * out.z0) + 0.5 * out.z1.squaredNorm() +
          0.5 * out.z2.squaredNorm();
  out.rho_bar = oracle.error_bound(s);
  out.bound = out.rho_bar * cert.b;

  if (std::abs(ctl.u) < cc.u_min) {
    // Singularity guard: the torque law divides by u.
    out.guard_active = true;
    out.tau = Vec3::Zero();
    out.u_ddot = cc.k_u * (cc.u_hover - ctl.u);
    return out;
  }

  const Vec3 w =
      s.R.transpose() * g_ddd - W * W * e * ctl.u - 2.0 * W * e * ctl.u_dot;
  out.u_ddot = e.dot(w);
  out.tau = vehicle.J * (e.cross(w) / ctl.u) -
            (vehicle.J * s.omega).cross(s.omega) - fw_hat;
  return out;
}

double ultimate_bound(const GainCertificate& cert, double rho_max) {
  if (rho_max < 0.0) throw Error("ultimate_bound: rho_max must be >= 0");
  return rho_max * cert.b;
}

double lambda_diagnostic(const GainCertificate& cert, const GainParams& gains,
                         const Mat36& Dbar, const Mat36& Ebar, double cbar,
                         double m) {
  const Mat63 B = input_matrix(m);
  const double num = spectral_norm(cert.P * B) + spectral_norm(Dbar * B) +
                     spectral_norm(Ebar * B) + cbar;
  auto min_eig = [](const MatX& M) {
    return Eigen::SelfAdjointEigenSolver<MatX>(0.5 * (M + M.transpose()))
        .eigenvalues()
        .minCoeff();
  };
  const double den =
      std::min({min_eig(cert.Q), min_eig(gains.Gz1), min_eig(gains.Gz2)});
  return num / den;
}

}  // namespace lbt
