#pragma once

#include "swimopt/core.hpp"

#include <array>
#include <vector>

namespace swimopt {

/// Convex hull as an intersection of half-spaces n.x <= d (outward unit normals).
struct ConvexHull {
  std::vector<Vec3> normal;
  std::vector<double> offset;
  std::vector<std::array<int, 3>> faces;  // indices into the input points
  Vec3 lo = Vec3::Zero(), hi = Vec3::Zero();

  bool contains(const Vec3& p, double tol = 0) const;
  double volume(const std::vector<Vec3>& points) const;
};

/// Incremental 3D hull. Points within a relative tolerance of the current hull
/// are treated as interior. Throws GeometryError for (near) coplanar input.
ConvexHull convex_hull(const std::vector<Vec3>& points);

}  // namespace swimopt
