#pragma once

#include <cstddef>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include "lbt/rigid_body.hpp"
#include "lbt/types.hpp"

namespace lbt {

/// One training sample: state plus residual output
/// y = [force residual; torque residual].
struct TrainingPoint {
  double t = 0.0;  // collection time [s]
  BodyState s;
  Vec6 y = Vec6::Zero();
};

/// Append-only indexed training set with a hard capacity.
class Dataset {
 public:
  static constexpr std::size_t kDefaultCapacity = 4096;

  explicit Dataset(std::size_t capacity = kDefaultCapacity)
      : capacity_(capacity) {}

  void append(const TrainingPoint& tp);
  void append(std::span<const TrainingPoint> tps);

  const std::vector<TrainingPoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  std::size_t capacity() const { return capacity_; }

  /// CSV with header t,px,...,R11..R33,y1..y6; 17-significant-digit
  /// decimals, bit-exact round trip.
  std::string to_csv() const;
  static Dataset from_csv(const std::string& csv,
                          std::size_t capacity = kDefaultCapacity);
  void save_csv(const std::filesystem::path& path) const;
  static Dataset load_csv(const std::filesystem::path& path);

 private:
  std::vector<TrainingPoint> points_;
  std::size_t capacity_;
};

/// Inverts the dynamics at a sampled state to recover the residuals:
///   y = [m*accel - R e u; J*omega_dot - (J omega) x omega - tau] + eps,
/// eps ~ N(0, noise_std^2 I6) drawn from `rng`.
TrainingPoint build_training_point(double t, const BodyState& s,
                                   const Vec3& accel, const Vec3& omega_dot,
                                   double u, const Vec3& tau,
                                   const VehicleParams& params,
                                   double noise_std, std::mt19937_64& rng);

}  // namespace lbt
