#include "aerovkc/geometry.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <numbers>

namespace aerovkc {

bool RigidTransform::is_valid(double tol) const {
  if (!rotation.allFinite() || !translation.allFinite()) return false;
  const double ortho = (rotation.transpose() * rotation - Matrix3d::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
}

namespace so3 {

Matrix3d skew(const Vector3d& v) {
  Matrix3d m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Vector3d vee(const Matrix3d& m) { return {m(2, 1), m(0, 2), m(1, 0)}; }

Matrix3d exp(const Vector3d& w) {
  const double theta = w.norm();
  const Matrix3d k = skew(w);
  if (theta < 1e-8) return Matrix3d::Identity() + k + 0.5 * k * k;
  const double a = std::sin(theta) / theta;
  const double b = (1.0 - std::cos(theta)) / (theta * theta);
  return Matrix3d::Identity() + a * k + b * k * k;
}

Vector3d log(const Matrix3d& r) {
  Eigen::Quaterniond q(r);
  q.normalize();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const Vector3d v = q.vec();
  const double s = v.norm();
  if (s < 1e-12) return 2.0 * v;
  const double angle = 2.0 * std::atan2(s, q.w());
  return v * (angle / s);
}

Matrix3d right_jacobian_inverse(const Vector3d& phi) {
  const double theta = phi.norm();
  const Matrix3d k = skew(phi);
  if (theta < 1e-6) return Matrix3d::Identity() + 0.5 * k + (1.0 / 12.0) * k * k;
  const double c = 1.0 / (theta * theta) - (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  return Matrix3d::Identity() + 0.5 * k + c * k * k;
}

Matrix3d rot_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Matrix3d m;
  m << 1, 0, 0, 0, c, -s, 0, s, c;
  return m;
}

Matrix3d rot_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Matrix3d m;
  m << c, 0, s, 0, 1, 0, -s, 0, c;
  return m;
}

Matrix3d rot_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Matrix3d m;
  m << c, -s, 0, s, c, 0, 0, 0, 1;
  return m;
}

Matrix3d axis_angle(const Vector3d& axis, double angle) { return exp(axis.normalized() * angle); }

Matrix3d from_rpy(const Vector3d& rpy) { return rot_z(rpy.z()) * rot_y(rpy.y()) * rot_x(rpy.x()); }

Vector3d to_rpy(const Matrix3d& r) {
  const double pitch = std::atan2(-r(2, 0), std::hypot(r(0, 0), r(1, 0)));
  const double roll = std::atan2(r(2, 1), r(2, 2));
  const double yaw = std::atan2(r(1, 0), r(0, 0));
  return {roll, pitch, yaw};
}

namespace {

double nearest_equivalent(double a, double hint) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  return a + two_pi * std::round((hint - a) / two_pi);
}

}  // namespace

Vector3d to_rpy_near(const Matrix3d& r, const Vector3d& hint) {
  const Vector3d a = to_rpy(r);
  const Vector3d b{a.x() + std::numbers::pi, std::numbers::pi - a.y(), a.z() + std::numbers::pi};
  Vector3d best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const Vector3d& cand : {a, b}) {
    Vector3d c;
    for (int i = 0; i < 3; ++i) c[i] = nearest_equivalent(cand[i], hint[i]);
    const double d = (c - hint).squaredNorm();
    if (d < best_dist) {
      best_dist = d;
      best = c;
    }
  }
  return best;
}

Matrix3d euler_rate_to_body(const Vector3d& rpy) {
  const double sr = std::sin(rpy.x()), cr = std::cos(rpy.x());
  const double sp = std::sin(rpy.y()), cp = std::cos(rpy.y());
  Matrix3d e;
  e << 1.0, 0.0, -sp,
       0.0, cr, sr * cp,
       0.0, -sr, cr * cp;
  return e;
}

Matrix3d orthonormalize(const Matrix3d& m) {
  Eigen::JacobiSVD<Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix3d u = svd.matrixU();
  const Matrix3d v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  return u * v.transpose();
}

double wrap_angle(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

}  // namespace so3

Eigen::Matrix<double, 6, 1> pose_error(const RigidTransform& actual, const RigidTransform& target) {
  Eigen::Matrix<double, 6, 1> e;
  e.head<3>() = actual.translation - target.translation;
  e.tail<3>() = so3::log(target.rotation.transpose() * actual.rotation);
  return e;
}

}  // namespace aerovkc
