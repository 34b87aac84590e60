#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "lbt/dataset.hpp"
#include "lbt/features.hpp"
#include "lbt/types.hpp"

namespace lbt {

/// Squared-exponential kernel hyperparameters for one output dimension.
struct KernelParams {
  VecX lengthscales;        // one per input dimension, > 0
  double signal_var = 1.0;  // > 0
  double noise_std = 0.0;   // >= 0 (0 only in tests)

  static KernelParams isotropic(int dim, double lengthscale,
                                double signal_var, double noise_std);
  void validate() const;
};

/// k(z1, z2) = signal_var * exp(-1/2 sum_j (z1_j - z2_j)^2 / l_j^2)
double kernel_eval(const VecX& z1, const VecX& z2, const KernelParams& params);

struct ErrorBoundParams {
  Vec6 beta = Vec6::Constant(2.0);
  double delta = 0.95;
  void validate() const;
};

/// Posterior at one test state. sec_f (the contraction of the posterior
/// mean's second derivative with a supplied velocity field) is computed
/// separately, see GPModel::mean_second_term.
struct Prediction {
  Vec6 mean = Vec6::Zero();       // [f_hat; f_omega_hat]
  Vec6 var = Vec6::Zero();        // per-output posterior variance
  Mat36 jac_f = Mat36::Zero();    // d f_hat / d x, x = [p; v]
};

/// Multi-output GP with one squared-exponential kernel per output
/// dimension (shared family, independent hyperparameters) and constant
/// prior means. Immutable after construction: fit/updated return values.
class GPModel {
 public:
  GPModel() = default;

  /// Factorizes the Gram matrix per output. Escalating jitter is added if
  /// the Cholesky fails; throws FitError after the last escalation.
  static GPModel fit(const Dataset& data,
                     const std::array<KernelParams, 6>& params,
                     const Vec6& prior_mean, const FeatureMap& fmap);

  /// Incremental factor extension; equivalent to fit() on the union.
  GPModel updated(std::span<const TrainingPoint> new_points) const;

  Prediction predict(const BodyState& s) const;

  /// Analytic d f_hat / d x (also available inside predict()).
  Mat36 mean_jacobian(const BodyState& s) const;

  /// d/dx[(d f_hat/dx) v(x)] v = (v' H_i v)_i + jac * Jv * v,
  /// with H_i the analytic posterior-mean Hessian of output i.
  Vec3 mean_second_term(const BodyState& s, const Vec6& v,
                        const Mat6& Jv) const;

  /// rho_bar(s) = sqrt(sum_i beta_i^2 var_i(s)).
  double error_bound(const BodyState& s, const ErrorBoundParams& ebp) const;

  int size() const { return static_cast<int>(X_.cols()); }
  const std::array<KernelParams, 6>& params() const { return params_; }
  const Vec6& prior_mean() const { return prior_mean_; }
  const FeatureMap& feature_map() const { return fmap_; }
  const MatX& inputs() const { return X_; }

 private:
  FeatureMap fmap_;
  std::array<KernelParams, 6> params_{};
  Vec6 prior_mean_ = Vec6::Zero();
  MatX X_;                      // d x N feature matrix
  MatX Y_;                      // N x 6 outputs
  std::array<MatX, 6> L_;      // lower Cholesky of K_i = K(X,X) + sigma^2 I
  std::array<VecX, 6> alpha_;  // K_i^{-1} (Y_i - m_i)

  void factorize();
  void factorize_extend(int old_n);
};

/// Negative log marginal likelihood of one output dimension:
///   1/2 y'K^{-1}y + 1/2 log det K + N/2 log 2*pi, y mean-centered.
double neg_log_marginal_likelihood(const MatX& X, const VecX& y_centered,
                                   const KernelParams& params);

/// Sum over the six outputs.
double neg_log_marginal_likelihood(const Dataset& data,
                                   const std::array<KernelParams, 6>& params,
                                   const Vec6& prior_mean,
                                   const FeatureMap& fmap);

/// Budget and box constraints for the likelihood search.
struct HyperOptBudget {
  int starts = 4;
  int evals_per_start = 200;
  double lengthscale_min = 1e-2;
  double lengthscale_max = 1e2;
  double signal_var_min = 1e-4;
  double signal_var_max = 1e4;
};

/// Deterministic seeded multi-start coordinate search in log-space for one
/// output. noise_std stays fixed. Never returns a worse objective than
/// `init`; returns init unchanged if every probe fails to factorize.
KernelParams optimize_hyperparameters_single(const MatX& X,
                                             const VecX& y_centered,
                                             const KernelParams& init,
                                             const HyperOptBudget& budget,
                                             std::uint64_t seed);

/// All six outputs (the likelihood is separable across outputs).
std::array<KernelParams, 6> optimize_hyperparameters(
    const Dataset& data, const std::array<KernelParams, 6>& init,
    const Vec6& prior_mean, const FeatureMap& fmap,
    const HyperOptBudget& budget, std::uint64_t seed);

}  // namespace lbt
