#include "lbt/truth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace lbt {

Vec3 TruthModel::f(const Vec6& x) const {
  const double x1 = x[0];
  const double x2 = x[1];
  return Vec3(0.0, 0.0, 2.0 * std::sin(x1) + std::exp(-5.0 * x2 * x2) - 9.81);
}

Vec3 TruthModel::f_omega(const BodyState& s) const {
  const double x1 = s.p.x();
  const double x2 = s.p.y();
  const double c = std::cos(x2);
  return Vec3(2.0 * std::exp(-x1 * x1 - x2 * x2) + s.omega.x() * c * c, 0.0,
              0.0);
}

Mat36 TruthModel::f_jacobian(const Vec6& x) const {
  Mat36 J = Mat36::Zero();
  const double x1 = x[0];
  const double x2 = x[1];
  J(2, 0) = 2.0 * std::cos(x1);
  J(2, 1) = -10.0 * x2 * std::exp(-5.0 * x2 * x2);
  return J;
}

Vec3 TruthModel::f_second_term(const Vec6& x, const Vec6& v,
                               const Mat6& Jv) const {
  const double x1 = x[0];
  const double x2 = x[1];
  // Hessian of f3: d2/dx1^2 = -2 sin(x1),
  //                d2/dx2^2 = (100 x2^2 - 10) exp(-5 x2^2)
  const double h11 = -2.0 * std::sin(x1);
  const double h22 = (100.0 * x2 * x2 - 10.0) * std::exp(-5.0 * x2 * x2);
  Vec3 out = Vec3::Zero();
  out[2] = h11 * v[0] * v[0] + h22 * v[1] * v[1];
  out += f_jacobian(x) * Jv * v;
  return out;
}

Vec6 calibrate_beta(const GPModel& model, const TruthModel& truth,
                    double delta, int samples, std::uint64_t seed) {
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw Error("calibrate_beta: delta must be in (0, 1]");
  }
  if (samples < 1) throw Error("calibrate_beta: samples must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> upos(-2.0, 2.0);
  std::uniform_real_distribution<double> uvel(-3.0, 3.0);
  std::uniform_real_distribution<double> uomega(-2.0, 2.0);

  std::array<std::vector<double>, 6> ratios;
  for (auto& r : ratios) r.reserve(samples);
  for (int k = 0; k < samples; ++k) {
    BodyState s;
    for (int i = 0; i < 3; ++i) {
      s.p[i] = upos(rng);
      s.v[i] = uvel(rng);
      s.omega[i] = uomega(rng);
    }
    const Prediction pred = model.predict(s);
    Vec6 y_true;
    y_true.head<3>() = truth.f(s.x());
    y_true.tail<3>() = truth.f_omega(s);
    for (int i = 0; i < 6; ++i) {
      const double sd = std::sqrt(std::max(pred.var[i], 1e-300));
      ratios[i].push_back(std::abs(pred.mean[i] - y_true[i]) / sd);
    }
  }
  Vec6 beta;
  for (int i = 0; i < 6; ++i) {
    auto& r = ratios[i];
    const auto idx = static_cast<std::size_t>(
        std::min<double>(delta * r.size(), r.size() - 1.0));
    std::nth_element(r.begin(), r.begin() + idx, r.end());
    beta[i] = r[idx];
  }
  return beta;
}

}  // namespace lbt
