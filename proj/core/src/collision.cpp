#include "aerovkc/collision.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace aerovkc {

namespace {

using Kind = CollisionPrimitive::Kind;

struct Segment {
  Vector3d a, b;
};

Segment capsule_segment(const CollisionPrimitive& c, const RigidTransform& pose) {
  const Vector3d half = pose.rotation.col(2) * c.dimensions[1];
  return {pose.translation - half, pose.translation + half};
}

double point_segment_distance(const Vector3d& p, const Segment& s) {
  const Vector3d d = s.b - s.a;
  const double len2 = d.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - s.a).dot(d) / len2, 0.0, 1.0) : 0.0;
  return (p - (s.a + t * d)).norm();
}

// Minimum of the box SDF along a segment; the SDF of a convex set is convex,
// so golden-section search on the segment parameter finds it.
double segment_box_min_sdf(const Segment& s, const Vector3d& h) {
  auto f = [&](double t) { return box_sdf(s.a + t * (s.b - s.a), h); };
  constexpr double phi = 0.6180339887498949;
  double lo = 0.0, hi = 1.0;
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 80 && hi - lo > 1e-14; ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = f(x2);
    }
  }
  return std::min({f(0.0), f(1.0), f1, f2, f(0.5 * (lo + hi))});
}

double sphere_sphere(const CollisionPrimitive& a, const RigidTransform& pa, const CollisionPrimitive& b,
                     const RigidTransform& pb) {
  return (pa.translation - pb.translation).norm() - a.dimensions[0] - b.dimensions[0];
}

double sphere_capsule(const CollisionPrimitive& s, const RigidTransform& ps, const CollisionPrimitive& c,
                      const RigidTransform& pc) {
  return point_segment_distance(ps.translation, capsule_segment(c, pc)) - s.dimensions[0] - c.dimensions[0];
}

double capsule_capsule(const CollisionPrimitive& a, const RigidTransform& pa, const CollisionPrimitive& b,
                       const RigidTransform& pb) {
  const Segment sa = capsule_segment(a, pa), sb = capsule_segment(b, pb);
  return std::sqrt(segment_segment_distance_sq(sa.a, sa.b, sb.a, sb.b)) - a.dimensions[0] - b.dimensions[0];
}

double sphere_box(const CollisionPrimitive& s, const RigidTransform& ps, const CollisionPrimitive& box,
                  const RigidTransform& pbox) {
  const Vector3d local = pbox.inverse() * ps.translation;
  return box_sdf(local, box.dimensions) - s.dimensions[0];
}

double capsule_box(const CollisionPrimitive& c, const RigidTransform& pc, const CollisionPrimitive& box,
                   const RigidTransform& pbox) {
  const RigidTransform inv = pbox.inverse();
  const Segment s = capsule_segment(c, pc);
  return segment_box_min_sdf({inv * s.a, inv * s.b}, box.dimensions) - c.dimensions[0];
}

Vector3d project_to_box(const Vector3d& x, const RigidTransform& pose, const Vector3d& h) {
  const Vector3d local = pose.rotation.transpose() * (x - pose.translation);
  return pose.translation + pose.rotation * local.cwiseMax(-h).cwiseMin(h);
}

// Penetration depth is the smallest overlap over the 15 separating-axis
// candidates; separated boxes use alternating projections, which converge to a
// closest pair for convex sets.
double box_box(const CollisionPrimitive& a, const RigidTransform& pa, const CollisionPrimitive& b,
               const RigidTransform& pb) {
  const Vector3d d = pb.translation - pa.translation;
  double min_overlap = std::numeric_limits<double>::infinity();
  auto test = [&](const Vector3d& axis) {
    const double ra = (pa.rotation.transpose() * axis).cwiseAbs().dot(a.dimensions);
    const double rb = (pb.rotation.transpose() * axis).cwiseAbs().dot(b.dimensions);
    min_overlap = std::min(min_overlap, ra + rb - std::abs(d.dot(axis)));
  };
  for (int i = 0; i < 3; ++i) {
    test(pa.rotation.col(i));
    test(pb.rotation.col(i));
    for (int j = 0; j < 3; ++j) {
      const Vector3d c = pa.rotation.col(i).cross(pb.rotation.col(j));
      if (c.norm() > 1e-9) test(c.normalized());
    }
  }
  if (min_overlap >= 0.0) return -min_overlap;

  Vector3d q = pb.translation;
  Vector3d p = project_to_box(q, pa, a.dimensions);
  double dist = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 2000; ++it) {
    q = project_to_box(p, pb, b.dimensions);
    p = project_to_box(q, pa, a.dimensions);
    const double next = (p - q).norm();
    if (dist - next <= 1e-16) return next;
    dist = next;
  }
  return dist;
}

}  // namespace

double box_sdf(const Vector3d& p, const Vector3d& h) {
  const Vector3d q = p.cwiseAbs() - h;
  return q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0);
}

double segment_segment_distance_sq(const Vector3d& p1, const Vector3d& q1, const Vector3d& p2, const Vector3d& q2) {
  const Vector3d d1 = q1 - p1, d2 = q2 - p2, r = p1 - p2;
  const double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
  constexpr double eps = 1e-18;
  double s = 0.0, t = 0.0;
  if (a <= eps && e <= eps) return r.squaredNorm();
  if (a <= eps) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= eps) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > eps ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return ((p1 + d1 * s) - (p2 + d2 * t)).squaredNorm();
}

double signed_distance(const CollisionPrimitive& a, const RigidTransform& pa, const CollisionPrimitive& b,
                       const RigidTransform& pb) {
  switch (a.kind) {
    case Kind::sphere:
      switch (b.kind) {
        case Kind::sphere: return sphere_sphere(a, pa, b, pb);
        case Kind::capsule: return sphere_capsule(a, pa, b, pb);
        case Kind::box: return sphere_box(a, pa, b, pb);
      }
      break;
    case Kind::capsule:
      switch (b.kind) {
        case Kind::sphere: return sphere_capsule(b, pb, a, pa);
        case Kind::capsule: return capsule_capsule(a, pa, b, pb);
        case Kind::box: return capsule_box(a, pa, b, pb);
      }
      break;
    case Kind::box:
      switch (b.kind) {
        case Kind::sphere: return sphere_box(b, pb, a, pa);
        case Kind::capsule: return capsule_box(b, pb, a, pa);
        case Kind::box: return box_box(a, pa, b, pb);
      }
      break;
  }
  throw CollisionError("signed_distance: unsupported primitive pair " + a.name + " / " + b.name);
}

}  // namespace aerovkc
