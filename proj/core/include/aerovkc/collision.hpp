#pragma once

#include "aerovkc/chain.hpp"

#include <vector>

namespace aerovkc {

class CollisionError : public Error {
 public:
  using Error::Error;
};

/// Static obstacles; each primitive's offset is its pose in the world frame.
struct CollisionWorld {
  std::vector<CollisionPrimitive> obstacles;
};

/// Signed distance between two primitives placed at world poses `pose_a` and
/// `pose_b` (the primitive frames, offsets already applied). Positive values
/// are separation, negative values penetration depth.
double signed_distance(const CollisionPrimitive& a, const RigidTransform& pose_a, const CollisionPrimitive& b,
                       const RigidTransform& pose_b);

/// Signed distance from a point to a box with half extents `h` centred at the origin.
double box_sdf(const Vector3d& p, const Vector3d& h);

/// Squared distance between segments [p1, q1] and [p2, q2].
double segment_segment_distance_sq(const Vector3d& p1, const Vector3d& q1, const Vector3d& p2, const Vector3d& q2);

}  // namespace aerovkc
