#pragma once

#include "lbt/oracle.hpp"
#include "lbt/rigid_body.hpp"

namespace lbt {

/// Closed-form ground-truth disturbances used by the simulated plant:
/// a wind field plus gravity acting on the translational dynamics and a
/// position/rate dependent torque disturbance.
///   f(x)       = [0, 0, 2 sin(x1) + exp(-5 x2^2) - 9.81]
///   f_omega(s) = [2 exp(-x1^2 - x2^2) + w1 cos(x2)^2, 0, 0]
struct TruthModel {
  Vec3 f(const Vec6& x) const;
  Vec3 f_omega(const BodyState& s) const;

  /// Analytic d f / d x (3 x 6).
  Mat36 f_jacobian(const Vec6& x) const;

  /// Analytic d/dx[(df/dx) v(x)] v = (v' H_i v)_i + (df/dx) Jv v.
  Vec3 f_second_term(const Vec6& x, const Vec6& v, const Mat6& Jv) const;
};

/// Exact oracle: predicts the true disturbances with zero error bound.
/// Used for controller verification runs (rho == 0).
class TruthOracle final : public Oracle {
 public:
  explicit TruthOracle(TruthModel model = {}) : model_(model) {}

  Prediction predict(const BodyState& s) const override {
    Prediction p;
    p.mean.head<3>() = model_.f(s.x());
    p.mean.tail<3>() = model_.f_omega(s);
    p.jac_f = model_.f_jacobian(s.x());
    return p;
  }
  Vec3 mean_second_term(const BodyState& s, const Vec6& v,
                        const Mat6& Jv) const override {
    return model_.f_second_term(s.x(), v, Jv);
  }
  double error_bound(const BodyState&) const override { return 0.0; }
  void absorb(std::span<const TrainingPoint>) override {}
  int training_size() const override { return 0; }
  const char* name() const override { return "truth"; }

 private:
  TruthModel model_;
};

/// Samples `samples` states uniformly from a box around the operating
/// region, compares oracle predictions against the truth, and returns the
/// delta-quantile of |residual_i| / sqrt(var_i) per output: an empirical,
/// data-driven choice of beta.
Vec6 calibrate_beta(const GPModel& model, const TruthModel& truth,
                    double delta, int samples, std::uint64_t seed);

}  // namespace lbt
