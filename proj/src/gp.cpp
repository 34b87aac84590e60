#include "lbt/gp.hpp"

#include <cmath>
#include <iostream>
#include <random>

namespace lbt {

KernelParams KernelParams::isotropic(int dim, double lengthscale,
                                     double signal_var, double noise_std) {
  KernelParams p;
  p.lengthscales = VecX::Constant(dim, lengthscale);
  p.signal_var = signal_var;
  p.noise_std = noise_std;
  return p;
}

void KernelParams::validate() const {
  if (lengthscales.size() == 0 || (lengthscales.array() <= 0.0).any()) {
    throw Error("KernelParams: lengthscales must be positive");
  }
  if (!(signal_var > 0.0)) throw Error("KernelParams: signal_var must be positive");
  if (noise_std < 0.0) throw Error("KernelParams: noise_std must be >= 0");
}

void ErrorBoundParams::validate() const {
  if (!beta.allFinite() || (beta.array() < 0.0).any()) {
    throw Error("ErrorBoundParams: beta must be finite and nonnegative");
  }
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw Error("ErrorBoundParams: delta must be in (0, 1]");
  }
}

double kernel_eval(const VecX& z1, const VecX& z2, const KernelParams& p) {
  if (z1.size() != z2.size() || z1.size() != p.lengthscales.size()) {
    throw Error("kernel_eval: dimension mismatch");
  }
  const double q =
      ((z1 - z2).array() / p.lengthscales.array()).square().sum();
  return p.signal_var * std::exp(-0.5 * q);
}

namespace {

// Noise-free cross-covariance matrix K(A, B), columns are inputs.
MatX cross_cov(const MatX& A, const MatX& B, const KernelParams& p) {
  const auto inv_l = p.lengthscales.cwiseInverse();
  MatX K(A.cols(), B.cols());
  for (Eigen::Index j = 0; j < B.cols(); ++j) {
    const VecX bj = B.col(j).cwiseProduct(inv_l);
    for (Eigen::Index i = 0; i < A.cols(); ++i) {
      const double q = (A.col(i).cwiseProduct(inv_l) - bj).squaredNorm();
      K(i, j) = p.signal_var * std::exp(-0.5 * q);
    }
  }
  return K;
}

MatX gram(const MatX& X, const KernelParams& p) {
  MatX K = cross_cov(X, X, p);
  K.diagonal().array() += p.noise_std * p.noise_std;
  return K;
}

// Cholesky with the escalating-jitter policy: 1e-10 * mean(diag K),
// escalating x10 up to 1e-4 * mean(diag K).
MatX chol_with_jitter(MatX K) {
  const double scale = K.diagonal().mean();
  double jitter = 0.0;
  for (int attempt = 0; attempt <= 7; ++attempt) {
    MatX Kj = K;
    if (jitter > 0.0) Kj.diagonal().array() += jitter;
    Eigen::LLT<MatX> llt(Kj);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    jitter = (jitter == 0.0) ? 1e-10 * scale : jitter * 10.0;
    if (jitter > 1e-4 * scale) break;
  }
  throw FitError("Gram matrix not SPD after jitter escalation (n=" +
                 std::to_string(K.rows()) +
                 ", mean diag=" + std::to_string(scale) + ")");
}

VecX solve_chol(const MatX& L, const VecX& b) {
  return L.transpose()
      .triangularView<Eigen::Upper>()
      .solve(L.triangularView<Eigen::Lower>().solve(b));
}

}  // namespace

GPModel GPModel::fit(const Dataset& data,
                     const std::array<KernelParams, 6>& params,
                     const Vec6& prior_mean, const FeatureMap& fmap) {
  GPModel m;
  m.fmap_ = fmap;
  m.params_ = params;
  m.prior_mean_ = prior_mean;
  for (const auto& p : params) {
    p.validate();
    if (p.lengthscales.size() != fmap.dim()) {
      throw Error("GPModel::fit: lengthscale dimension != feature dimension");
    }
  }
  const int n = static_cast<int>(data.size());
  m.X_.resize(fmap.dim(), n);
  m.Y_.resize(n, 6);
  for (int j = 0; j < n; ++j) {
    m.X_.col(j) = fmap.eval(data.points()[j].s);
    m.Y_.row(j) = data.points()[j].y.transpose();
  }
  m.factorize();
  return m;
}

void GPModel::factorize() {
  const int n = size();
  for (int i = 0; i < 6; ++i) {
    if (n == 0) {
      L_[i].resize(0, 0);
      alpha_[i].resize(0);
      continue;
    }
    L_[i] = chol_with_jitter(gram(X_, params_[i]));
    alpha_[i] = solve_chol(L_[i], Y_.col(i).array() - prior_mean_[i]);
  }
}

GPModel GPModel::updated(std::span<const TrainingPoint> new_points) const {
  if (new_points.empty()) throw Error("GPModel::updated: no new points");
  GPModel m = *this;
  const int old_n = size();
  const int add = static_cast<int>(new_points.size());
  m.X_.conservativeResize(Eigen::NoChange, old_n + add);
  m.Y_.conservativeResize(old_n + add, Eigen::NoChange);
  for (int j = 0; j < add; ++j) {
    m.X_.col(old_n + j) = fmap_.eval(new_points[j].s);
    m.Y_.row(old_n + j) = new_points[j].y.transpose();
  }
  if (old_n == 0) {
    m.factorize();
  } else {
    m.factorize_extend(old_n);
  }
  return m;
}

// Extends each output's Cholesky factor by the new block:
//   L = [L11 0; L21 L22],  L21 = (L11^{-1} K12)',  L22 = chol(K22 - L21 L21').
void GPModel::factorize_extend(int old_n) {
  const int n = size();
  const int add = n - old_n;
  for (int i = 0; i < 6; ++i) {
    const auto& p = params_[i];
    const MatX K12 = cross_cov(X_.leftCols(old_n), X_.rightCols(add), p);
    MatX K22 = gram(X_.rightCols(add), p);
    const MatX L11inv_K12 =
        L_[i].triangularView<Eigen::Lower>().solve(K12);  // old_n x add
    MatX S = K22 - L11inv_K12.transpose() * L11inv_K12;
    Eigen::LLT<MatX> llt(S);
    if (llt.info() != Eigen::Success) {
      // Schur complement lost definiteness; fall back to a full refit.
      factorize();
      return;
    }
    MatX L(n, n);
    L.setZero();
    L.topLeftCorner(old_n, old_n) = L_[i];
    L.bottomLeftCorner(add, old_n) = L11inv_K12.transpose();
    L.bottomRightCorner(add, add) = MatX(llt.matrixL());
    L_[i] = std::move(L);
    alpha_[i] = solve_chol(L_[i], Y_.col(i).array() - prior_mean_[i]);
  }
}

Prediction GPModel::predict(const BodyState& s) const {
  Prediction out;
  const int n = size();
  if (n == 0) {
    out.mean = prior_mean_;
    for (int i = 0; i < 6; ++i) out.var[i] = params_[i].signal_var;
    return out;
  }
  const VecX z = fmap_.eval(s);
  for (int i = 0; i < 6; ++i) {
    const auto& p = params_[i];
    const VecX k = cross_cov(X_, z, p);  // z as single column
    out.mean[i] = prior_mean_[i] + k.dot(alpha_[i]);
    const VecX w = L_[i].triangularView<Eigen::Lower>().solve(k);
    double var = p.signal_var - w.squaredNorm();
    if (var < -1e-10) {
      throw Error("GPModel::predict: negative posterior variance " +
                  std::to_string(var));
    }
    out.var[i] = std::max(var, 0.0);
  }
  out.jac_f = mean_jacobian(s);
  return out;
}

Mat36 GPModel::mean_jacobian(const BodyState& s) const {
  Mat36 J = Mat36::Zero();
  const int n = size();
  if (n == 0) return J;  // constant prior mean
  const VecX z = fmap_.eval(s);
  // d k(z, x_j)/dz = -k * (z - x_j) / l^2; the feature map is identity on
  // the x = [p; v] block, so chaining keeps the first six components.
  for (int i = 0; i < 3; ++i) {
    const auto& p = params_[i];
    const VecX inv_l2 = p.lengthscales.array().square().inverse();
    VecX grad = VecX::Zero(fmap_.dim());
    for (int j = 0; j < n; ++j) {
      const VecX d = z - X_.col(j);
      const double k =
          p.signal_var * std::exp(-0.5 * d.cwiseProduct(inv_l2).dot(d));
      grad -= alpha_[i][j] * k * d.cwiseProduct(inv_l2);
    }
    J.row(i) = grad.head<6>().transpose();
  }
  return J;
}

Vec3 GPModel::mean_second_term(const BodyState& s, const Vec6& v,
                               const Mat6& Jv) const {
  Vec3 out = Vec3::Zero();
  const int n = size();
  const Mat36 jac = mean_jacobian(s);
  if (n > 0) {
    const VecX z = fmap_.eval(s);
    VecX w = VecX::Zero(fmap_.dim());  // w = (dz/dx) v
    w.head<6>() = v;
    // v' H_i v with H_i = sum_j alpha_ij k_j (r_j r_j' - D), r_j = D (z - x_j)
    for (int i = 0; i < 3; ++i) {
      const auto& p = params_[i];
      const VecX inv_l2 = p.lengthscales.array().square().inverse();
      const double wDw = w.cwiseProduct(inv_l2).dot(w);
      double quad = 0.0;
      for (int j = 0; j < n; ++j) {
        const VecX d = z - X_.col(j);
        const VecX r = d.cwiseProduct(inv_l2);
        const double k = p.signal_var * std::exp(-0.5 * r.dot(d));
        quad += alpha_[i][j] * k * (std::pow(r.dot(w), 2) - wDw);
      }
      out[i] = quad;
    }
  }
  out += jac * Jv * v;
  return out;
}

double GPModel::error_bound(const BodyState& s,
                            const ErrorBoundParams& ebp) const {
  ebp.validate();
  const Prediction pred = predict(s);
  return std::sqrt((ebp.beta.array().square() * pred.var.array()).sum());
}

double neg_log_marginal_likelihood(const MatX& X, const VecX& y_centered,
                                   const KernelParams& params) {
  const int n = static_cast<int>(X.cols());
  if (n == 0) return 0.0;
  const MatX L = chol_with_jitter(gram(X, params));
  const VecX w = L.triangularView<Eigen::Lower>().solve(y_centered);
  double log_det = 0.0;
  for (int i = 0; i < n; ++i) log_det += std::log(L(i, i));
  log_det *= 2.0;
  return 0.5 * w.squaredNorm() + 0.5 * log_det +
         0.5 * n * std::log(2.0 * M_PI);
}

double neg_log_marginal_likelihood(const Dataset& data,
                                   const std::array<KernelParams, 6>& params,
                                   const Vec6& prior_mean,
                                   const FeatureMap& fmap) {
  const int n = static_cast<int>(data.size());
  MatX X(fmap.dim(), n);
  for (int j = 0; j < n; ++j) X.col(j) = fmap.eval(data.points()[j].s);
  double total = 0.0;
  for (int i = 0; i < 6; ++i) {
    VecX y(n);
    for (int j = 0; j < n; ++j) y[j] = data.points()[j].y[i] - prior_mean[i];
    total += neg_log_marginal_likelihood(X, y, params[i]);
  }
  return total;
}

namespace {

// Objective over theta = [log l_1..d, log sv] with precomputed
// per-dimension squared-difference matrices.
class NllObjective {
 public:
  NllObjective(const MatX& X, const VecX& y, double noise_std)
      : y_(y), noise_var_(noise_std * noise_std), n_(X.cols()), d_(X.rows()) {
    dsq_.reserve(d_);
    for (int k = 0; k < d_; ++k) {
      MatX D(n_, n_);
      for (Eigen::Index j = 0; j < n_; ++j) {
        D.col(j) = (X.row(k).transpose().array() - X(k, j)).square();
      }
      dsq_.push_back(std::move(D));
    }
  }

  double operator()(const VecX& theta) const {
    MatX Q = MatX::Zero(n_, n_);
    for (int k = 0; k < d_; ++k) {
      Q += dsq_[k] * std::exp(-2.0 * theta[k]);
    }
    MatX K = std::exp(theta[d_]) * (-0.5 * Q).array().exp();
    K.diagonal().array() += noise_var_;
    const MatX L = chol_with_jitter(K);
    const VecX w = L.triangularView<Eigen::Lower>().solve(y_);
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < n_; ++i) log_det += std::log(L(i, i));
    return 0.5 * w.squaredNorm() + log_det +
           0.5 * n_ * std::log(2.0 * M_PI);
  }

 private:
  VecX y_;
  double noise_var_;
  Eigen::Index n_, d_;
  std::vector<MatX> dsq_;
};

}  // namespace

KernelParams optimize_hyperparameters_single(const MatX& X,
                                             const VecX& y_centered,
                                             const KernelParams& init,
                                             const HyperOptBudget& budget,
                                             std::uint64_t seed) {
  init.validate();
  if (X.cols() < 2 || budget.starts <= 0 || budget.evals_per_start <= 0) {
    return init;
  }
  const int d = static_cast<int>(X.rows());
  const NllObjective nll(X, y_centered, init.noise_std);

  const double lo_l = std::log(budget.lengthscale_min);
  const double hi_l = std::log(budget.lengthscale_max);
  const double lo_sv = std::log(budget.signal_var_min);
  const double hi_sv = std::log(budget.signal_var_max);
  auto clamp = [&](VecX theta) {
    for (int k = 0; k < d; ++k) theta[k] = std::clamp(theta[k], lo_l, hi_l);
    theta[d] = std::clamp(theta[d], lo_sv, hi_sv);
    return theta;
  };

  VecX theta0(d + 1);
  for (int k = 0; k < d; ++k) theta0[k] = std::log(init.lengthscales[k]);
  theta0[d] = std::log(init.signal_var);
  theta0 = clamp(theta0);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> perturb(0.0, 0.7);

  bool any_success = false;
  double best_val = std::numeric_limits<double>::infinity();
  VecX best_theta = theta0;

  for (int start = 0; start < budget.starts; ++start) {
    VecX theta = theta0;
    if (start > 0) {
      for (int k = 0; k <= d; ++k) theta[k] += perturb(rng);
      theta = clamp(theta);
    }
    int evals = 0;
    auto probe = [&](const VecX& th) {
      ++evals;
      try {
        const double v = nll(th);
        any_success = true;
        if (v < best_val) {
          best_val = v;
          best_theta = th;
        }
        return v;
      } catch (const FitError&) {
        return std::numeric_limits<double>::infinity();
      }
    };

    double cur = probe(theta);
    double step = 0.5;
    while (evals < budget.evals_per_start && step > 1e-3) {
      bool improved = false;
      for (int k = 0; k <= d && evals < budget.evals_per_start; ++k) {
        for (double sgn : {+1.0, -1.0}) {
          if (evals >= budget.evals_per_start) break;
          VecX cand = theta;
          cand[k] += sgn * step;
          cand = clamp(cand);
          const double v = probe(cand);
          if (v < cur) {
            cur = v;
            theta = cand;
            improved = true;
            break;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
  }

  if (!any_success) {
    std::cerr << "warning: hyperparameter search failed to factorize any "
                 "probe; keeping initial parameters\n";
    return init;
  }
  KernelParams out = init;
  for (int k = 0; k < d; ++k) out.lengthscales[k] = std::exp(best_theta[k]);
  out.signal_var = std::exp(best_theta[d]);
  return out;
}

std::array<KernelParams, 6> optimize_hyperparameters(
    const Dataset& data, const std::array<KernelParams, 6>& init,
    const Vec6& prior_mean, const FeatureMap& fmap,
    const HyperOptBudget& budget, std::uint64_t seed) {
  const int n = static_cast<int>(data.size());
  if (n < 2) throw Error("optimize_hyperparameters: need at least 2 points");
  MatX X(fmap.dim(), n);
  for (int j = 0; j < n; ++j) X.col(j) = fmap.eval(data.points()[j].s);
  std::array<KernelParams, 6> out = init;
  for (int i = 0; i < 6; ++i) {
    VecX y(n);
    for (int j = 0; j < n; ++j) y[j] = data.points()[j].y[i] - prior_mean[i];
    out[i] = optimize_hyperparameters_single(
        X, y, init[i], budget, seed + 0x9e3779b97f4a7c15ull * (i + 1));
  }
  return out;
}

}  // namespace lbt
