#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace swimopt {

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;

using Vec3 = Vector3<double>;
using Mat3 = Matrix3<double>;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;

// Error taxonomy. Every failure surfaced by the library derives from Error so
// callers can catch broadly, while the CLI maps the concrete type to an exit code.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParameterError : Error {
  using Error::Error;
};
struct GeometryError : Error {
  using Error::Error;
};
struct SolverError : Error {
  using Error::Error;
};
struct EncodingError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct EvaluationError : Error {
  using Error::Error;
};
struct FitError : Error {
  using Error::Error;
};
struct SamplingError : Error {
  using Error::Error;
};

/// Rotation by `angle` about a unit axis (right-hand rule).
template <typename Scalar>
Matrix3<Scalar> axis_rotation(const Vector3<Scalar>& axis, Scalar angle) {
  return Eigen::AngleAxis<Scalar>(angle, axis.normalized()).toRotationMatrix();
}

/// Skew-symmetric matrix [w]x such that [w]x v = w x v.
template <typename Scalar>
Matrix3<Scalar> cross_matrix(const Vector3<Scalar>& w) {
  Matrix3<Scalar> m;
  m << Scalar(0), -w.z(), w.y(), w.z(), Scalar(0), -w.x(), -w.y(), w.x(), Scalar(0);
  return m;
}

// Rotation about e1 with exact entries when the angle is a multiple of pi/2, so
// that stroke phases related by quarter turns produce bitwise-related meshes.
inline Mat3 rotation_e1(double angle) {
  const double quarter = angle / (kPi / 2);
  const double k = std::round(quarter);
  double c = std::cos(angle), s = std::sin(angle);
  if (std::abs(quarter - k) < 1e-12) {
    const int m = ((static_cast<long long>(k) % 4) + 4) % 4;
    constexpr double cs[4] = {1, 0, -1, 0};
    constexpr double sn[4] = {0, 1, 0, -1};
    c = cs[m];
    s = sn[m];
  }
  Mat3 r;
  r << 1, 0, 0, 0, c, -s, 0, s, c;
  return r;
}

}  // namespace swimopt
