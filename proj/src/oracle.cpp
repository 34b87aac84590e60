#include "lbt/oracle.hpp"

#include <iostream>

namespace lbt {

Prediction LinearOracle::predict(const BodyState& s) const {
  Prediction p;
  p.mean = W_ * fmap_.eval(s) + b_;
  // jac_f = W restricted to the x-columns of the feature map
  p.jac_f = W_.topRows<3>() * fmap_.jacobian_x();
  return p;
}

Vec3 LinearOracle::mean_second_term(const BodyState& s, const Vec6& v,
                                    const Mat6& Jv) const {
  // Hessian of an affine model is zero; only the Jacobian term remains.
  const Mat36 jac = W_.topRows<3>() * fmap_.jacobian_x();
  (void)s;
  return jac * Jv * v;
}

void LinearOracle::absorb(std::span<const TrainingPoint> points) {
  data_.append(points);
  // keep the zero model until the normal equations are determined
  if (static_cast<int>(data_.size()) >= fmap_.dim() + 1) refit();
}

void LinearOracle::refit() {
  const int n = static_cast<int>(data_.size());
  const int d = fmap_.dim();
  MatX Phi(n, d + 1);  // augmented [z', 1]
  MatX Y(n, 6);
  for (int j = 0; j < n; ++j) {
    Phi.row(j).head(d) = fmap_.eval(data_.points()[j].s).transpose();
    Phi(j, d) = 1.0;
    Y.row(j) = data_.points()[j].y.transpose();
  }
  MatX G = Phi.transpose() * Phi;
  Eigen::FullPivLU<MatX> lu(G);
  regularized_ = false;
  if (lu.rank() < d + 1) {
    regularized_ = true;
    std::cerr << "warning: LinearOracle normal equations rank deficient "
                 "(rank " << lu.rank() << " of " << d + 1
              << "), using ridge-regularized solve\n";
    G.diagonal().array() += 1e-8 * std::max(G.diagonal().mean(), 1.0);
  }
  const MatX Theta = G.ldlt().solve(Phi.transpose() * Y);  // (d+1) x 6
  W_ = Theta.topRows(d).transpose();
  b_ = Theta.row(d).transpose();
}

GpOracle::GpOracle(const FeatureMap& fmap,
                   const std::array<KernelParams, 6>& init,
                   const Vec6& prior_mean, const ErrorBoundParams& ebp,
                   const HyperOptBudget& budget)
    : fmap_(fmap), prior_mean_(prior_mean), ebp_(ebp), budget_(budget) {
  ebp_.validate();
  model_ = GPModel::fit(data_, init, prior_mean_, fmap_);
}

void GpOracle::absorb(std::span<const TrainingPoint> points) {
  data_.append(points);
  model_ = model_.updated(points);
}

void GpOracle::reoptimize(std::uint64_t seed) {
  if (data_.size() < 2) return;
  const auto tuned = optimize_hyperparameters(data_, model_.params(),
                                              prior_mean_, fmap_, budget_,
                                              seed);
  model_ = GPModel::fit(data_, tuned, prior_mean_, fmap_);
}

}  // namespace lbt
