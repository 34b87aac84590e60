#include "lbt/trajectory.hpp"

#include <cmath>

namespace lbt {

DesiredTrajectory make_lissajous(const Vec3& amp, const Vec3& freq,
                                 const Vec3& phase, const Vec3& offset) {
  return DesiredTrajectory(
      "lissajous", [=](double t) {
        TrajectoryPoint d;
        for (int i = 0; i < 3; ++i) {
          const double w = freq[i];
          const double s = std::sin(w * t + phase[i]);
          const double c = std::cos(w * t + phase[i]);
          d.p[i] = amp[i] * s + offset[i];
          d.v[i] = amp[i] * w * c;
          d.a[i] = -amp[i] * w * w * s;
          d.j[i] = -amp[i] * w * w * w * c;
          d.snap[i] = amp[i] * w * w * w * w * s;
        }
        return d;
      });
}

DesiredTrajectory make_circle(double radius, double omega, double height) {
  return make_lissajous(Vec3(radius, radius, 0.0),
                        Vec3(omega, omega, 1.0),
                        Vec3(M_PI / 2.0, 0.0, 0.0),
                        Vec3(0.0, 0.0, height));
}

DesiredTrajectory make_helix(double radius, double omega, double climb_rate) {
  auto circle = make_circle(radius, omega, 0.0);
  return DesiredTrajectory("helix", [=](double t) {
    TrajectoryPoint d = circle(t);
    d.p.z() = climb_rate * t;
    d.v.z() = climb_rate;
    d.a.z() = d.j.z() = d.snap.z() = 0.0;
    return d;
  });
}

DesiredTrajectory make_hover(const Vec3& p) {
  return DesiredTrajectory("hover", [=](double) {
    return TrajectoryPoint{p, Vec3::Zero(), Vec3::Zero(), Vec3::Zero(),
                           Vec3::Zero()};
  });
}

}  // namespace lbt
