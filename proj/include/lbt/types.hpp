#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace lbt {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat36 = Eigen::Matrix<double, 3, 6>;
using Mat63 = Eigen::Matrix<double, 6, 3>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// The integrator produced a non-finite state; carries the time stamp.
struct IntegrationError : Error {
  double t;
  explicit IntegrationError(double time)
      : Error("non-finite state at t=" + std::to_string(time)), t(time) {}
};

/// A gain certificate could not be produced (closed loop not Hurwitz,
/// Lyapunov solve failed, ...).
struct CertificateError : Error {
  using Error::Error;
};

/// Gram matrix factorization failed even after jitter escalation.
struct FitError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace lbt
