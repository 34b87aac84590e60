#pragma once

#include "lbt/rigid_body.hpp"
#include "lbt/types.hpp"

namespace lbt {

/// Kernel input built from the body state.
enum class FeatureMapKind {
  kPosVelOmega,     // z = [p; v; omega], d = 9
  kPosVelOmegaRot,  // z = [p; v; omega; vec(R) row-major], d = 18
};

/// Maps BodyState to the kernel input and exposes the Jacobian with
/// respect to the translational state x = [p; v] (linear in x for both
/// built-in maps: rotation and angular-velocity rows do not depend on x).
class FeatureMap {
 public:
  explicit FeatureMap(FeatureMapKind kind = FeatureMapKind::kPosVelOmega)
      : kind_(kind) {}

  int dim() const {
    return kind_ == FeatureMapKind::kPosVelOmega ? 9 : 18;
  }

  VecX eval(const BodyState& s) const {
    VecX z(dim());
    z.head<3>() = s.p;
    z.segment<3>(3) = s.v;
    z.segment<3>(6) = s.omega;
    if (kind_ == FeatureMapKind::kPosVelOmegaRot) {
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) z[9 + 3 * i + j] = s.R(i, j);
    }
    return z;
  }

  /// dz/dx, a dim() x 6 matrix: identity on the [p; v] rows, zero below.
  MatX jacobian_x() const {
    MatX J = MatX::Zero(dim(), 6);
    J.topLeftCorner<6, 6>().setIdentity();
    return J;
  }

  FeatureMapKind kind() const { return kind_; }

 private:
  FeatureMapKind kind_;
};

}  // namespace lbt
