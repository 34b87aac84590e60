#include "lbt/so3.hpp"

#include <cmath>

namespace lbt {

Mat3 hat(const Vec3& w) {
  Mat3 S;
  S << 0, -w.z(), w.y(),
       w.z(), 0, -w.x(),
      -w.y(), w.x(), 0;
  return S;
}

Vec3 vee(const Mat3& S, double tol) {
  const double sym = (S + S.transpose()).norm();
  if (sym > tol) {
    throw Error("vee: matrix is not skew-symmetric (||S + S'|| = " +
                std::to_string(sym) + ")");
  }
  return Vec3(S(2, 1), S(0, 2), S(1, 0));
}

Mat3 project_so3(const Mat3& M) {
  if (M.determinant() <= 0.0) {
    throw Error("project_so3: determinant must be positive");
  }
  Eigen::JacobiSVD<Mat3> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 R = svd.matrixU() * svd.matrixV().transpose();
  // det M > 0 guarantees det(UV') = +1, no sign flip needed
  return R;
}

double so3_drift(const Mat3& R) {
  return (R.transpose() * R - Mat3::Identity()).norm();
}

bool is_rotation(const Mat3& R, double tol) {
  return so3_drift(R) <= tol && std::abs(R.determinant() - 1.0) <= tol;
}

}  // namespace lbt
