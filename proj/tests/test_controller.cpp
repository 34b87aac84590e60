#include <cmath>

#include "doctest.h"
#include "lbt/controller.hpp"
#include "lbt/truth.hpp"
#include "test_util.hpp"

using namespace lbt;

namespace {

GainParams paper_gains() {
  GainParams g;
  g.G0.leftCols<3>() = Vec3(10.0, 10.0, 40.0).asDiagonal();
  g.G0.rightCols<3>() = Vec3(10.0, 10.0, 10.0).asDiagonal();
  return g;
}

VehicleParams paper_vehicle() {
  VehicleParams v;
  v.m = 1.0;
  v.J = Vec3(2.0, 2.0, 1.0).asDiagonal();
  v.e = Vec3(0, 0, 1);
  return v;
}

TrajectoryPoint quiescent() {
  return TrajectoryPoint{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(),
                         Vec3::Zero(), Vec3::Zero()};
}

TrajectoryPoint random_traj_point(std::mt19937_64& rng) {
  return TrajectoryPoint{test::random_vec3(rng), test::random_vec3(rng),
                         test::random_vec3(rng), test::random_vec3(rng),
                         test::random_vec3(rng)};
}

double spec_norm(const MatX& M) { return M.jacobiSvd().singularValues()(0); }

}  // namespace

TEST_CASE("system and input matrices have the double-integrator structure") {
  const Mat6 A = system_matrix();
  CHECK(A.topRightCorner<3, 3>().isIdentity(0.0));
  CHECK(A.norm() == doctest::Approx(std::sqrt(3.0)));
  const Mat63 B = input_matrix(2.0);
  CHECK(B.topRows<3>().isZero(0.0));
  CHECK((B.bottomRows<3>() - 0.5 * Mat3::Identity()).norm() == 0.0);
}

TEST_CASE("solve_lyapunov: diagonal closed form") {
  const Mat6 P = solve_lyapunov(-Mat6::Identity(), 2.0 * Mat6::Identity());
  CHECK((P - Mat6::Identity()).norm() <= 1e-12);
}

TEST_CASE("solve_lyapunov rejects a non-Hurwitz system") {
  // G = 0 leaves the double integrator with zero eigenvalues.
  CHECK_THROWS_AS(solve_lyapunov(system_matrix(), Mat6::Identity()),
                  CertificateError);
  CHECK_THROWS_AS(solve_lyapunov(-Mat6::Identity(), -Mat6::Identity()),
                  CertificateError);
}

TEST_CASE("solve_lyapunov: reference gain residual") {
  const GainParams g = paper_gains();
  const Mat6 A_cl = system_matrix() - input_matrix(1.0) * g.G0;
  const Mat6 Q = Mat6::Identity();
  const Mat6 P = solve_lyapunov(A_cl, Q);
  CHECK((P * A_cl + A_cl.transpose() * P + Q).norm() <= 1e-9 * Q.norm());
  CHECK((P - P.transpose()).norm() <= 1e-12);
  Eigen::SelfAdjointEigenSolver<Mat6> es(P);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("solve_lyapunov on random Hurwitz systems") {
  std::mt19937_64 rng(50);
  for (int i = 0; i < 20; ++i) {
    Mat6 A = Mat6::Random() - 8.0 * Mat6::Identity();  // diagonally dominant
    Mat6 Qh = Mat6::Random();
    const Mat6 Q = Qh * Qh.transpose() + Mat6::Identity();
    const Mat6 P = solve_lyapunov(A, Q);
    CHECK((P * A + A.transpose() * P + Q).norm() <= 1e-9 * Q.norm());
  }
}

TEST_CASE("gain_schedule decays exactly by gamma per index") {
  const GainParams g = paper_gains();
  const auto c0 = gain_schedule(g, 0, 1.0);
  CHECK((c0.G - g.G0).norm() == 0.0);
  const auto c1 = gain_schedule(g, 1, 1.0);
  CHECK((c1.G - 0.9 * g.G0).norm() == 0.0);
  CHECK(c1.G.norm() / c0.G.norm() == doctest::Approx(0.9).epsilon(1e-14));
  for (int n = 0; n <= 24; ++n) {
    const auto c = gain_schedule(g, n, 1.0);
    CHECK(c.G.norm() == doctest::Approx(std::pow(0.9, n) * g.G0.norm())
                            .epsilon(1e-13));
    CHECK(c.b >= 1.0);
    const Mat6 A_cl = system_matrix() - input_matrix(1.0) * c.G;
    CHECK((c.P * A_cl + A_cl.transpose() * c.P + c.Q).norm() <=
          1e-9 * c.Q.norm());
  }
}

TEST_CASE("gain_schedule validates its parameters") {
  GainParams bad = paper_gains();
  bad.gamma = 0.0;
  CHECK_THROWS_AS(gain_schedule(bad, 0, 1.0), Error);
  bad = paper_gains();
  bad.Gz1 = -Mat3::Identity();
  CHECK_THROWS_AS(gain_schedule(bad, 0, 1.0), Error);
  // zero gain cannot certify the double integrator
  GainParams zero;
  CHECK_THROWS_AS(gain_schedule(zero, 0, 1.0), CertificateError);
}

TEST_CASE("xhat_dot basics and direct substitution") {
  // x = 0, g = -fhat: cancellation
  CHECK(xhat_dot(Vec6::Zero(), Vec3(1, -2, 3), Vec3(-1, 2, -3), 1.0).norm() ==
        0.0);
  // f = 0, g = [0,0,m a]: acceleration a in the last slot
  const Vec6 d = xhat_dot(Vec6::Zero(), Vec3(0, 0, 2.5 * 4.0), Vec3::Zero(),
                          2.5);
  CHECK((d.tail<3>() - Vec3(0, 0, 4.0)).norm() <= 1e-15);

  std::mt19937_64 rng(51);
  for (int i = 0; i < 50; ++i) {
    const Vec6 x = test::random_vec6(rng);
    const Vec3 g = test::random_vec3(rng);
    const Vec3 f = test::random_vec3(rng);
    const double m = 1.7;
    const Vec6 ref =
        system_matrix() * x + input_matrix(m) * (g + f);  // Eq. with rho = 0
    CHECK((xhat_dot(x, g, f, m) - ref).norm() <= 1e-14);
  }
}

TEST_CASE("xhat_dot_jacobian composes A and B jac_f") {
  std::mt19937_64 rng(52);
  Mat36 jac;
  for (int c = 0; c < 6; ++c) jac.col(c) = test::random_vec3(rng);
  const double m = 2.2;
  const Mat6 ref = system_matrix() + input_matrix(m) * jac;
  CHECK((xhat_dot_jacobian(jac, m) - ref).norm() == 0.0);
}

TEST_CASE("desired_force examples") {
  const auto cert = gain_schedule(paper_gains(), 0, 1.0);
  // zero error, fhat = 0, no feedforward
  CHECK(desired_force(quiescent(), cert, Vec6::Zero(), Vec3::Zero(), 1.0)
            .norm() == 0.0);
  // hover with fhat = gravity -> exact compensation
  CHECK((desired_force(quiescent(), cert, Vec6::Zero(), Vec3(0, 0, -9.81),
                       1.0) -
         Vec3(0, 0, 9.81))
            .norm() == 0.0);
  // direct substitution on random inputs
  std::mt19937_64 rng(53);
  for (int i = 0; i < 50; ++i) {
    const auto d = random_traj_point(rng);
    const Vec6 x = test::random_vec6(rng);
    const Vec3 fhat = test::random_vec3(rng);
    const double m = 1.4;
    Vec6 xd;
    xd << d.p, d.v;
    const Vec3 ref = m * d.a - cert.G * (x - xd) - fhat;
    CHECK((desired_force(d, cert, x, fhat, m) - ref).norm() <= 1e-14);
  }
}

TEST_CASE("desired_force_dot: trivial and structural cases") {
  // perfect tracking of a stationary point with constant fhat
  GainCertificate cert = gain_schedule(paper_gains(), 0, 1.0);
  Prediction pred;
  pred.mean.head<3>() = Vec3(0, 0, -9.81);
  const Vec3 g = Vec3(0, 0, 9.81);  // equals g_d at zero error
  const Vec3 out = desired_force_dot(quiescent(), cert, Vec6::Zero(), pred, g,
                                     1.0, 2.0 * Mat3::Identity());
  CHECK(out.norm() <= 1e-12);

  // B'P structure: P = I, z0 = e6, everything else silent -> -[0,0,1]
  GainCertificate flat;
  flat.G = Mat36::Zero();
  flat.P = Mat6::Identity();
  Vec6 x = Vec6::Zero();
  x[5] = 1.0;  // z0 = e6 against the origin hover point
  Prediction zero_pred;
  const Vec3 contrib = desired_force_dot(quiescent(), flat, x, zero_pred,
                                         Vec3::Zero(), 1.0, Mat3::Identity());
  CHECK((contrib - Vec3(0, 0, -1)).norm() <= 1e-14);
}

TEST_CASE("desired_force_dot matches direct substitution") {
  const auto cert = gain_schedule(paper_gains(), 2, 1.0);
  const Mat3 Gz1 = 2.0 * Mat3::Identity();
  std::mt19937_64 rng(54);
  for (int i = 0; i < 50; ++i) {
    const auto d = random_traj_point(rng);
    const Vec6 x = test::random_vec6(rng);
    Prediction pred;
    pred.mean = test::random_vec6(rng);
    for (int c = 0; c < 6; ++c) pred.jac_f.col(c) = test::random_vec3(rng);
    const Vec3 g = test::random_vec3(rng, 3.0);
    const double m = 1.0;

    Vec6 xd, xd_dot;
    xd << d.p, d.v;
    xd_dot << d.v, d.a;
    const Vec3 fhat = pred.mean.head<3>();
    const Vec6 z0 = x - xd;
    const Vec3 g_d = m * d.a - cert.G * z0 - fhat;
    const Vec3 z1 = g - g_d;
    Vec6 xdh;
    xdh << x.tail<3>(), (g + fhat) / m;
    const Vec3 ref = m * d.j - cert.G * (xdh - xd_dot) -
                     input_matrix(m).transpose() * cert.P * z0 - Gz1 * z1 -
                     pred.jac_f * xdh;
    CHECK((desired_force_dot(d, cert, x, pred, g, m, Gz1) - ref).norm() <=
          1e-12);
  }
}

TEST_CASE("desired_force_ddot: quiescent fixed point gives zero") {
  const auto cert = gain_schedule(paper_gains(), 0, 1.0);
  Prediction pred;  // fhat = 0, jac = 0
  const Vec3 out = desired_force_ddot(
      quiescent(), cert, Vec6::Zero(), pred, Vec3::Zero(), Vec3::Zero(),
      Vec3::Zero(), 1.0, 2.0 * Mat3::Identity(), 2.0 * Mat3::Identity());
  CHECK(out.norm() == 0.0);
}

TEST_CASE("desired_force_ddot matches an independent re-derivation") {
  const auto cert = gain_schedule(paper_gains(), 1, 1.0);
  const Mat3 Gz1 = 2.0 * Mat3::Identity();
  Mat3 Gz2;
  Gz2 << 3, 0.5, 0, 0.5, 2, 0, 0, 0, 1.5;  // SPD, non-scalar
  std::mt19937_64 rng(55);
  for (int i = 0; i < 100; ++i) {
    const auto d = random_traj_point(rng);
    const Vec6 x = test::random_vec6(rng);
    Prediction pred;
    pred.mean = test::random_vec6(rng);
    for (int c = 0; c < 6; ++c) pred.jac_f.col(c) = test::random_vec3(rng);
    const Vec3 sec_f = test::random_vec3(rng);
    const Vec3 g = test::random_vec3(rng, 3.0);
    const Vec3 g_dot = test::random_vec3(rng, 3.0);
    const double m = 1.0;

    // independent evaluation, term by term
    const Mat6 A = system_matrix();
    const Mat63 B = input_matrix(m);
    const Vec3 fhat = pred.mean.head<3>();
    Vec6 xd, xd_dot, xd_ddot;
    xd << d.p, d.v;
    xd_dot << d.v, d.a;
    xd_ddot << d.a, d.j;
    const Vec6 z0 = x - xd;
    const Vec6 xdh = A * x + B * (g + fhat);
    const Mat6 Jxdh = A + B * pred.jac_f;
    const Vec3 t1 = m * d.snap;
    // full derivative of xdh along the flow: Jxdh xdh + B g_dot
    const Vec3 t2 = -cert.G * (Jxdh * xdh + B * g_dot - xd_ddot);
    const Vec3 t3 = -B.transpose() * (cert.P * (xdh - xd_dot));
    const Vec3 z1dot_like =
        g_dot - m * d.j + cert.G * (xdh - xd_dot) + pred.jac_f * xdh;
    const Vec3 t4 = -(Gz1 + Gz2) * z1dot_like;
    const Vec3 z1_like = g - m * d.a + cert.G * z0 + fhat;
    const Vec3 t5 = -(Gz2 * Gz1 + Mat3::Identity()) * z1_like;
    const Vec3 t6 = -Gz2 * (B.transpose() * (cert.P * z0));
    const Vec3 ref =
        t1 + t2 + t3 + t4 + t5 + t6 - sec_f - pred.jac_f * (B * g_dot);

    const Vec3 out = desired_force_ddot(d, cert, x, pred, sec_f, g, g_dot, m,
                                        Gz1, Gz2);
    CHECK((out - ref).norm() <= 1e-11 * (1.0 + ref.norm()));
  }
}

TEST_CASE("desired_force_ddot: Gz2 = 0 structural reduction") {
  const auto cert = gain_schedule(paper_gains(), 0, 1.0);
  const Mat3 Gz1 = 2.0 * Mat3::Identity();
  std::mt19937_64 rng(56);
  for (int i = 0; i < 20; ++i) {
    const auto d = random_traj_point(rng);
    const Vec6 x = test::random_vec6(rng);
    Prediction pred;
    pred.mean = test::random_vec6(rng);
    for (int c = 0; c < 6; ++c) pred.jac_f.col(c) = test::random_vec3(rng);
    const Vec3 sec_f = test::random_vec3(rng);
    const Vec3 g = test::random_vec3(rng);
    const Vec3 g_dot = test::random_vec3(rng);
    const double m = 1.0;

    const Mat63 B = input_matrix(m);
    const Vec3 fhat = pred.mean.head<3>();
    Vec6 xd, xd_dot, xd_ddot;
    xd << d.p, d.v;
    xd_dot << d.v, d.a;
    xd_ddot << d.a, d.j;
    const Vec6 z0 = x - xd;
    const Vec6 xdh = xhat_dot(x, g, fhat, m);
    const Mat6 Jxdh = xhat_dot_jacobian(pred.jac_f, m);
    // manual reduction with Gz2 = 0: the Gz2-weighted terms vanish
    const Vec3 ref =
        m * d.snap - cert.G * (Jxdh * xdh + B * g_dot - xd_ddot) -
        B.transpose() * cert.P * (xdh - xd_dot) -
        Gz1 * (g_dot - m * d.j + cert.G * (xdh - xd_dot) + pred.jac_f * xdh) -
        (g - m * d.a + cert.G * z0 + fhat) - sec_f -
        pred.jac_f * (B * g_dot);
    const Vec3 out = desired_force_ddot(d, cert, x, pred, sec_f, g, g_dot, m,
                                        Gz1, Mat3::Zero());
    CHECK((out - ref).norm() <= 1e-11 * (1.0 + ref.norm()));
  }
}

TEST_CASE("control_step: exact oracle at a hover fixed point") {
  const VehicleParams vp = paper_vehicle();
  const GainParams gains = paper_gains();
  const auto cert = gain_schedule(gains, 0, vp.m);
  const TruthOracle oracle;
  const TruthModel truth;
  const DesiredTrajectory hover = make_hover(Vec3::Zero());

  BodyState s;  // identity attitude at the origin, at rest
  const Vec3 f = truth.f(s.x());  // [0, 0, -8.81]
  ControllerState ctl;
  ctl.u = -f.z();  // g = g_d so that z1 = 0
  ctl.u_dot = 0.0;

  const auto out = control_step(0.0, cert, s, hover, oracle, ctl, vp, gains,
                                ControllerConfig{});
  CHECK(out.z0.norm() == 0.0);
  CHECK(out.z1.norm() <= 1e-12);
  CHECK(out.z2.norm() <= 1e-12);
  CHECK_FALSE(out.guard_active);
  // torque exactly compensates f_omega; the closed loop has domega = 0
  const Vec3 fw = truth.f_omega(s);
  CHECK((out.tau + fw).norm() <= 1e-12);
  CHECK(std::abs(out.u_ddot) <= 1e-12);
  const auto d = dynamics(s, ctl.u, out.tau, f, fw, vp);
  CHECK(d.domega.norm() <= 1e-12);
  CHECK(d.dv.norm() <= 1e-12);
  CHECK(out.rho_bar == 0.0);
  CHECK(out.bound == 0.0);
}

TEST_CASE("control_step: thrust-axis cross-product structure") {
  // e = [0,0,1]: u_ddot = w3 and e x w = [-w2, w1, 0], so the torque law
  // contributes no yaw moment beyond gyroscopic and fw_hat compensation.
  const VehicleParams vp = paper_vehicle();
  const GainParams gains = paper_gains();
  const auto cert = gain_schedule(gains, 0, vp.m);
  Vec6 prior;
  prior << 0, 0, -10, 0, 0, 0;
  const ZeroOracle oracle(prior, 3.0);
  const DesiredTrajectory traj =
      make_lissajous(Vec3(1.2, 1.2, 0.6), Vec3(2, 2, 1),
                     Vec3(0, M_PI / 2, 0), Vec3(0, -1.2, 0));
  std::mt19937_64 rng(57);
  for (int i = 0; i < 20; ++i) {
    BodyState s = test::random_state(rng);
    ControllerState ctl{5.0 + i * 0.3, 0.4};
    const auto out = control_step(0.3 * i, cert, s, traj, oracle, ctl, vp,
                                  gains, ControllerConfig{});
    // reconstruct w from the published outputs
    const Vec3 exw_over_u =
        vp.J.inverse() *
        (out.tau + (vp.J * s.omega).cross(s.omega) + prior.tail<3>());
    const Vec3 exw = exw_over_u * ctl.u;
    CHECK(std::abs(exw.z()) <= 1e-9 * (1.0 + exw.norm()));  // no yaw term
    // recompute w independently and compare both outputs
    const Mat3 W = hat(s.omega);
    const Vec6 x = s.x();
    const Vec3 g = s.R * vp.e * ctl.u;
    const Vec3 g_dot = s.R * (W * vp.e * ctl.u + vp.e * ctl.u_dot);
    const Prediction pred = oracle.predict(s);
    const Vec6 xdh = xhat_dot(x, g, pred.mean.head<3>(), vp.m);
    const Vec3 sec =
        oracle.mean_second_term(s, xdh, xhat_dot_jacobian(pred.jac_f, vp.m));
    const Vec3 g_ddd =
        desired_force_ddot(traj(0.3 * i), cert, x, pred, sec, g, g_dot, vp.m,
                           gains.Gz1, gains.Gz2);
    const Vec3 w = s.R.transpose() * g_ddd - W * W * vp.e * ctl.u -
                   2.0 * W * vp.e * ctl.u_dot;
    CHECK(out.u_ddot == doctest::Approx(w.z()).epsilon(1e-12));
    CHECK((exw - vp.e.cross(w)).norm() <= 1e-8 * (1.0 + w.norm()));
    // V consistency with the published errors
    const double V = 0.5 * out.z0.dot(cert.P * out.z0) +
                     0.5 * out.z1.squaredNorm() + 0.5 * out.z2.squaredNorm();
    CHECK(out.V == doctest::Approx(V).epsilon(1e-12));
    CHECK(out.V >= 0.0);
  }
}

TEST_CASE("control_step: Lyapunov value for unit errors and P = I") {
  // V = 1/2 z0'P z0 + 1/2 |z1|^2 + 1/2 |z2|^2 = 1.5 for unit-norm errors.
  Vec6 z0 = Vec6::Unit(2);
  Vec3 z1 = Vec3::UnitX(), z2 = Vec3::UnitY();
  const double V = 0.5 * z0.dot(Mat6::Identity() * z0) +
                   0.5 * z1.squaredNorm() + 0.5 * z2.squaredNorm();
  CHECK(V == doctest::Approx(1.5));
}

TEST_CASE("control_step singularity guard") {
  const VehicleParams vp = paper_vehicle();
  const GainParams gains = paper_gains();
  const auto cert = gain_schedule(gains, 0, vp.m);
  const TruthOracle oracle;
  ControllerConfig cc;
  BodyState s;
  ControllerState ctl{0.05, 0.0};  // below u_min = 0.1
  const auto out = control_step(0.0, cert, s, make_hover(Vec3::Zero()),
                                oracle, ctl, vp, gains, cc);
  CHECK(out.guard_active);
  CHECK(out.tau.norm() == 0.0);
  CHECK(out.u_ddot == doctest::Approx(cc.k_u * (cc.u_hover - ctl.u)));
  CHECK(out.V >= 0.0);  // diagnostics still populated
}

TEST_CASE("ultimate_bound") {
  const auto cert = gain_schedule(paper_gains(), 0, 1.0);
  CHECK(ultimate_bound(cert, 0.0) == 0.0);
  CHECK(ultimate_bound(cert, 2.0) == doctest::Approx(2.0 * cert.b));
  GainCertificate unit;
  unit.b = 1.0;
  CHECK(ultimate_bound(unit, 0.7) == doctest::Approx(0.7));
  CHECK_THROWS_AS(ultimate_bound(cert, -1.0), Error);
}

TEST_CASE("lambda_diagnostic") {
  GainParams gains = paper_gains();
  Mat3 Gz1 = Mat3::Identity();
  Gz1(0, 0) = 0.5;  // smallest eigenvalue across Q, Gz1, Gz2
  gains.Gz1 = Gz1;
  gains.Gz2 = 2.0 * Mat3::Identity();
  gains.Q = Mat6::Identity();
  const auto cert = gain_schedule(gains, 0, 1.0);

  const double lam0 = lambda_diagnostic(cert, gains, Mat36::Zero(),
                                        Mat36::Zero(), 0.0, 1.0);
  const double pb = spec_norm(cert.P * input_matrix(1.0));
  CHECK(lam0 == doctest::Approx(pb / 0.5));

  // affine in cbar
  const double lam1 = lambda_diagnostic(cert, gains, Mat36::Zero(),
                                        Mat36::Zero(), 1.0, 1.0);
  const double lam3 = lambda_diagnostic(cert, gains, Mat36::Zero(),
                                        Mat36::Zero(), 3.0, 1.0);
  CHECK(lam3 - lam0 == doctest::Approx(3.0 * (lam1 - lam0)).epsilon(1e-12));
}
