#pragma once

#include <functional>
#include <string>

#include "lbt/types.hpp"

namespace lbt {

/// Desired position and its first four time derivatives.
struct TrajectoryPoint {
  Vec3 p;     // position
  Vec3 v;     // velocity
  Vec3 a;     // acceleration
  Vec3 j;     // jerk
  Vec3 snap;  // 4th derivative
};

/// A C^4 position reference t -> (p_d, ..., p_d^(4)), provided analytically.
class DesiredTrajectory {
 public:
  using Evaluator = std::function<TrajectoryPoint(double)>;

  DesiredTrajectory() = default;
  DesiredTrajectory(std::string name, Evaluator eval)
      : name_(std::move(name)), eval_(std::move(eval)) {}

  TrajectoryPoint operator()(double t) const { return eval_(t); }
  const std::string& name() const { return name_; }

 private:
  std::string name_ = "hover";
  Evaluator eval_ = [](double) {
    return TrajectoryPoint{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(),
                           Vec3::Zero(), Vec3::Zero()};
  };
};

/// p_i(t) = amp_i * sin(freq_i * t + phase_i) + offset_i, per axis.
DesiredTrajectory make_lissajous(const Vec3& amp, const Vec3& freq,
                                 const Vec3& phase, const Vec3& offset);

/// Circle of given radius in the z = height plane, angular rate omega.
DesiredTrajectory make_circle(double radius, double omega, double height);

/// Circle with constant climb rate.
DesiredTrajectory make_helix(double radius, double omega, double climb_rate);

/// Constant hover point.
DesiredTrajectory make_hover(const Vec3& p);

}  // namespace lbt
