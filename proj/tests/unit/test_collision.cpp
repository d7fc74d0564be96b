#include "aerovkc/collision.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace aerovkc;
using namespace aerovkc::testing;

namespace {

using P = CollisionPrimitive;

/// Grid of points on the surface of a box with half extents h (box frame).
std::vector<Vector3d> box_surface(const Vector3d& h, int n) {
  std::vector<Vector3d> pts;
  for (int axis = 0; axis < 3; ++axis)
    for (int side = -1; side <= 1; side += 2)
      for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) {
          Vector3d p;
          const int a = (axis + 1) % 3, b = (axis + 2) % 3;
          p[axis] = side * h[axis];
          p[a] = -h[a] + 2 * h[a] * i / n;
          p[b] = -h[b] + 2 * h[b] * j / n;
          pts.push_back(p);
        }
  return pts;
}

bool inside_box(const Vector3d& p, const Vector3d& h) { return (p.cwiseAbs() - h).maxCoeff() < 0.0; }

/// Exterior distance from a point to a box, computed per axis.
double outside_distance(const Vector3d& p, const Vector3d& h) { return (p.cwiseAbs() - h).cwiseMax(0.0).norm(); }

}  // namespace

TEST(SignedDistance, Spheres) {
  const P s = P::sphere("s", 1.0);
  EXPECT_NEAR(signed_distance(s, RigidTransform{}, s, RigidTransform::from_translation(Vector3d(3, 0, 0))), 1.0, 1e-15);
  EXPECT_NEAR(signed_distance(s, RigidTransform{}, s, RigidTransform{}), -2.0, 1e-15);
}

TEST(SignedDistance, SphereBoxMatchesSurfaceSampling) {
  std::mt19937_64 rng(40);
  std::uniform_real_distribution<double> u(0.05, 0.25);
  const int n = 400;
  for (int i = 0; i < 20; ++i) {
    const Vector3d h(u(rng), u(rng), u(rng));
    const RigidTransform box_pose = random_transform(rng);
    const Vector3d c = box_pose * (random_vec3(rng, 0.25));
    const double r = 0.5 * u(rng);
    const Vector3d local = box_pose.inverse() * c;
    double nearest = std::numeric_limits<double>::infinity();
    for (const Vector3d& s : box_surface(h, n)) nearest = std::min(nearest, (s - local).norm());
    const double oracle = (inside_box(local, h) ? -nearest : nearest) - r;
    const double d = signed_distance(P::sphere("s", r), RigidTransform::from_translation(c), P::box("b", h), box_pose);
    EXPECT_NEAR(d, oracle, 1e-3);
    EXPECT_NEAR(signed_distance(P::box("b", h), box_pose, P::sphere("s", r), RigidTransform::from_translation(c)), d, 1e-15);
  }
}

TEST(SignedDistance, BoxSdf) {
  const Vector3d h(0.1, 0.2, 0.3);
  EXPECT_NEAR(box_sdf(Vector3d::Zero(), h), -0.1, 1e-15);
  EXPECT_NEAR(box_sdf(Vector3d(0.4, 0, 0), h), 0.3, 1e-15);
  EXPECT_NEAR(box_sdf(Vector3d(0.4, 0.6, 0), h), std::hypot(0.3, 0.4), 1e-15);
}

TEST(SignedDistance, SegmentsMatchSampling) {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 30; ++i) {
    const Vector3d p1 = random_vec3(rng), q1 = random_vec3(rng), p2 = random_vec3(rng), q2 = random_vec3(rng);
    double best = std::numeric_limits<double>::infinity();
    const int n = 600;
    for (int a = 0; a <= n; ++a) {
      const Vector3d x = p1 + (q1 - p1) * a / n;
      // Exact distance from x to the second segment.
      const Vector3d d = q2 - p2;
      const double t = std::clamp((x - p2).dot(d) / d.squaredNorm(), 0.0, 1.0);
      best = std::min(best, (x - (p2 + t * d)).norm());
    }
    EXPECT_NEAR(std::sqrt(segment_segment_distance_sq(p1, q1, p2, q2)), best, 1e-4);
  }
  EXPECT_NEAR(segment_segment_distance_sq(Vector3d(0, 0, 0), Vector3d(1, 0, 0), Vector3d(0, 1, 0), Vector3d(1, 1, 0)), 1.0, 1e-15);
}

TEST(SignedDistance, Capsules) {
  const P c = P::capsule("c", 0.1, 0.5);
  // Parallel capsules along z, 1 m apart.
  EXPECT_NEAR(signed_distance(c, RigidTransform{}, c, RigidTransform::from_translation(Vector3d(1, 0, 0))), 0.8, 1e-12);
  // End to end along z.
  EXPECT_NEAR(signed_distance(c, RigidTransform{}, c, RigidTransform::from_translation(Vector3d(0, 0, 1.5))), 0.3, 1e-12);
  const P s = P::sphere("s", 0.2);
  EXPECT_NEAR(signed_distance(s, RigidTransform::from_translation(Vector3d(0.5, 0, 0.2)), c, RigidTransform{}), 0.2, 1e-12);
}

TEST(SignedDistance, CapsuleBoxFaceContact) {
  const P c = P::capsule("c", 0.05, 0.2, RigidTransform{});
  const P b = P::box("b", Vector3d(0.5, 0.5, 0.1));
  // Capsule lying flat (along x) 0.3 m above the top face.
  const RigidTransform pose(so3::rot_y(M_PI / 2), Vector3d(0, 0, 0.4));
  EXPECT_NEAR(signed_distance(c, pose, b, RigidTransform{}), 0.25, 1e-9);
}

TEST(SignedDistance, SeparatedBoxesMatchSampling) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.05, 0.2);
  int tested = 0;
  while (tested < 15) {
    const Vector3d ha(u(rng), u(rng), u(rng)), hb(u(rng), u(rng), u(rng));
    const RigidTransform pa = random_transform(rng);
    const RigidTransform pb(random_rotation(rng), pa.translation + random_vec3(rng, 0.4));
    const RigidTransform ab = pb.inverse() * pa;
    // Separation is the smallest distance from A's surface to B (exact per point).
    double best = std::numeric_limits<double>::infinity();
    for (const Vector3d& s : box_surface(ha, 300)) best = std::min(best, outside_distance(ab * s, hb));
    if (best < 0.01) continue;
    ++tested;
    EXPECT_NEAR(signed_distance(P::box("a", ha), pa, P::box("b", hb), pb), best, 1e-3);
  }
}

TEST(SignedDistance, OverlappingBoxesReportPenetrationDepth) {
  const P a = P::box("a", Vector3d(0.5, 0.5, 0.5));
  const P b = P::box("b", Vector3d(0.2, 0.2, 0.2));
  EXPECT_NEAR(signed_distance(a, RigidTransform{}, b, RigidTransform::from_translation(Vector3d(0.6, 0, 0))), -0.1, 1e-12);
  EXPECT_NEAR(signed_distance(a, RigidTransform{}, b, RigidTransform::from_translation(Vector3d(0.8, 0.1, 0))), 0.1, 1e-9);
}
