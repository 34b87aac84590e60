#pragma once

#include <cstdint>
#include <memory>
#include <span>

#include "lbt/gp.hpp"

namespace lbt {

/// A learned model of the unknown force/torque residuals, exposing the
/// prediction, its derivatives with respect to x = [p; v], and a
/// high-probability pointwise error bound rho_bar.
class Oracle {
 public:
  virtual ~Oracle() = default;

  virtual Prediction predict(const BodyState& s) const = 0;

  /// d/dx[(d f_hat/dx) v(x)] v for a supplied v and its state Jacobian.
  virtual Vec3 mean_second_term(const BodyState& s, const Vec6& v,
                                const Mat6& Jv) const = 0;

  /// rho_bar(s) such that the prediction error stays below it with the
  /// configured probability.
  virtual double error_bound(const BodyState& s) const = 0;

  /// Integrates newly collected training data.
  virtual void absorb(std::span<const TrainingPoint> points) = 0;

  /// Re-tunes internal hyperparameters on the absorbed data (optional).
  virtual void reoptimize(std::uint64_t /*seed*/) {}

  virtual int training_size() const = 0;
  virtual const char* name() const = 0;
};

/// Predicts the constant prior mean everywhere; rho_bar is a configured
/// constant. Ignores training data.
class ZeroOracle final : public Oracle {
 public:
  ZeroOracle(const Vec6& prior_mean, double rho_const)
      : mean_(prior_mean), rho_(rho_const) {}

  Prediction predict(const BodyState&) const override {
    Prediction p;
    p.mean = mean_;
    return p;
  }
  Vec3 mean_second_term(const BodyState&, const Vec6&,
                        const Mat6&) const override {
    return Vec3::Zero();
  }
  double error_bound(const BodyState&) const override { return rho_; }
  void absorb(std::span<const TrainingPoint>) override {}
  int training_size() const override { return 0; }
  const char* name() const override { return "zero"; }

 private:
  Vec6 mean_;
  double rho_;
};

/// Per-output affine model y_i = w_i' z + b_i fitted by normal equations
/// on the accumulated data. Falls back to a ridge-regularized solve (with
/// a warning) when the normal equations are rank deficient.
class LinearOracle final : public Oracle {
 public:
  LinearOracle(const FeatureMap& fmap, double rho_const)
      : fmap_(fmap), rho_(rho_const),
        W_(MatX::Zero(6, fmap.dim())), b_(Vec6::Zero()) {}

  Prediction predict(const BodyState& s) const override;
  Vec3 mean_second_term(const BodyState& s, const Vec6& v,
                        const Mat6& Jv) const override;
  double error_bound(const BodyState&) const override { return rho_; }
  void absorb(std::span<const TrainingPoint> points) override;
  int training_size() const override { return static_cast<int>(data_.size()); }
  const char* name() const override { return "linear"; }

  const MatX& weights() const { return W_; }
  const Vec6& intercept() const { return b_; }
  bool regularized() const { return regularized_; }

 private:
  void refit();

  FeatureMap fmap_;
  double rho_;
  Dataset data_;
  MatX W_;  // 6 x d
  Vec6 b_;
  bool regularized_ = false;
};

/// GP-backed oracle; wraps an immutable GPModel that is replaced on
/// absorb/reoptimize.
class GpOracle final : public Oracle {
 public:
  GpOracle(const FeatureMap& fmap, const std::array<KernelParams, 6>& init,
           const Vec6& prior_mean, const ErrorBoundParams& ebp,
           const HyperOptBudget& budget);

  Prediction predict(const BodyState& s) const override {
    return model_.predict(s);
  }
  Vec3 mean_second_term(const BodyState& s, const Vec6& v,
                        const Mat6& Jv) const override {
    return model_.mean_second_term(s, v, Jv);
  }
  double error_bound(const BodyState& s) const override {
    return model_.error_bound(s, ebp_);
  }
  void absorb(std::span<const TrainingPoint> points) override;
  void reoptimize(std::uint64_t seed) override;
  int training_size() const override { return model_.size(); }
  const char* name() const override { return "gp"; }

  const GPModel& model() const { return model_; }
  const Dataset& dataset() const { return data_; }
  const ErrorBoundParams& error_bound_params() const { return ebp_; }

 private:
  FeatureMap fmap_;
  Vec6 prior_mean_;
  ErrorBoundParams ebp_;
  HyperOptBudget budget_;
  Dataset data_;
  GPModel model_;
};

}  // namespace lbt
