#include "lbt/dataset.hpp"

#include <fstream>
#include <sstream>

#include "lbt/io.hpp"

namespace lbt {

namespace {
const char* kHeader =
    "t,px,py,pz,vx,vy,vz,wx,wy,wz,"
    "R11,R12,R13,R21,R22,R23,R31,R32,R33,"
    "y1,y2,y3,y4,y5,y6";
constexpr int kCols = 25;
}  // namespace

void Dataset::append(const TrainingPoint& tp) {
  if (points_.size() >= capacity_) {
    throw Error("Dataset: capacity " + std::to_string(capacity_) +
                " exceeded");
  }
  if (!tp.y.allFinite()) throw Error("Dataset: non-finite output");
  points_.push_back(tp);
}

void Dataset::append(std::span<const TrainingPoint> tps) {
  for (const auto& tp : tps) append(tp);
}

std::string Dataset::to_csv() const {
  std::string out = kHeader;
  out += '\n';
  for (const auto& tp : points_) {
    double row[kCols];
    int c = 0;
    row[c++] = tp.t;
    for (int i = 0; i < 3; ++i) row[c++] = tp.s.p[i];
    for (int i = 0; i < 3; ++i) row[c++] = tp.s.v[i];
    for (int i = 0; i < 3; ++i) row[c++] = tp.s.omega[i];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) row[c++] = tp.s.R(i, j);  // row-major
    for (int i = 0; i < 6; ++i) row[c++] = tp.y[i];
    for (int i = 0; i < kCols; ++i) {
      out += fmt17(row[i]);
      out += (i + 1 < kCols) ? ',' : '\n';
    }
  }
  return out;
}

Dataset Dataset::from_csv(const std::string& csv, std::size_t capacity) {
  Dataset data(capacity);
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw Error("Dataset CSV: empty input");
  if (line != kHeader) throw Error("Dataset CSV: unexpected header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != kCols) {
      throw Error("Dataset CSV: expected " + std::to_string(kCols) +
                  " columns, got " + std::to_string(cells.size()));
    }
    double row[kCols];
    for (int i = 0; i < kCols; ++i) row[i] = std::stod(cells[i]);
    TrainingPoint tp;
    int c = 0;
    tp.t = row[c++];
    for (int i = 0; i < 3; ++i) tp.s.p[i] = row[c++];
    for (int i = 0; i < 3; ++i) tp.s.v[i] = row[c++];
    for (int i = 0; i < 3; ++i) tp.s.omega[i] = row[c++];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) tp.s.R(i, j) = row[c++];
    for (int i = 0; i < 6; ++i) tp.y[i] = row[c++];
    data.append(tp);
  }
  return data;
}

void Dataset::save_csv(const std::filesystem::path& path) const {
  write_file_atomic(path, to_csv());
}

Dataset Dataset::load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_csv(ss.str());
}

TrainingPoint build_training_point(double t, const BodyState& s,
                                   const Vec3& accel, const Vec3& omega_dot,
                                   double u, const Vec3& tau,
                                   const VehicleParams& params,
                                   double noise_std, std::mt19937_64& rng) {
  TrainingPoint tp;
  tp.t = t;
  tp.s = s;
  tp.y.head<3>() = params.m * accel - s.R * params.e * u;
  tp.y.tail<3>() =
      params.J * omega_dot - (params.J * s.omega).cross(s.omega) - tau;
  if (noise_std > 0.0) {
    std::normal_distribution<double> gauss(0.0, noise_std);
    for (int i = 0; i < 6; ++i) tp.y[i] += gauss(rng);
  }
  return tp;
}

}  // namespace lbt
