#pragma once

#include "lbt/types.hpp"

namespace lbt {

/// Skew-symmetric matrix S with S*v = omega x v.
Mat3 hat(const Vec3& omega);

/// Inverse of hat(). Rejects input whose symmetric part exceeds `tol`.
Vec3 vee(const Mat3& S, double tol = 1e-9);

/// Orthogonal polar factor of M, the nearest rotation in Frobenius norm.
/// Requires det M > 0; idempotent on rotations.
Mat3 project_so3(const Mat3& M);

/// True if R'R = I and det R = 1 within `tol`.
bool is_rotation(const Mat3& R, double tol = 1e-9);

/// Frobenius norm of R'R - I (orthogonality drift).
double so3_drift(const Mat3& R);

}  // namespace lbt
