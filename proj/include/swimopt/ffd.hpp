#pragma once

#include "swimopt/mesh.hpp"

#include <array>

namespace swimopt {

/// Free-form deformation lattice with 4x4x4 control points over an axis-aligned
/// box. Displacements are stored in unit-cube coordinates, one row per control
/// point, row index i*16 + j*4 + k for lattice position (i, j, k).
struct FFDLattice {
  static constexpr int kPerAxis = 4;
  static constexpr int kPoints = kPerAxis * kPerAxis * kPerAxis;
  static constexpr int kFreePoints = 14;
  static constexpr int kFreeDim = 3 * kFreePoints;

  Vec3 box_min = Vec3::Constant(-1);
  Vec3 box_max = Vec3::Constant(1);
  Eigen::Matrix<double, kPoints, 3> displacement = Eigen::Matrix<double, kPoints, 3>::Zero();

  /// Box around a reference mesh, each side pushed out by `margin` times the extent.
  static FFDLattice around(const SurfaceMesh& reference, double margin = 0.1);

  static constexpr int index(int i, int j, int k) { return i * 16 + j * 4 + k; }
  static constexpr bool interior(int i, int j, int k) {
    return i > 0 && i < 3 && j > 0 && j < 3 && k > 0 && k < 3;
  }
  /// Per-component displacement bound 1/(2(M-1)) - 0.1 for M = 4.
  static constexpr double bound() { return 1.0 / (2.0 * (kPerAxis - 1)) - 0.1; }
  /// Lattice positions of the free points, in the order used by expand_symmetry.
  static const std::array<std::array<int, 3>, kFreePoints>& free_points();

  Vec3 extent() const { return box_max - box_min; }
};

/// Cubic Bernstein basis B_i(t), i = 0..3.
template <typename Scalar>
Eigen::Matrix<Scalar, 4, 1> bernstein3(Scalar t) {
  const Scalar s = Scalar(1) - t;
  return {s * s * s, Scalar(3) * t * s * s, Scalar(3) * t * t * s, t * t * t};
}

/// Displacement of a point expressed in unit-cube coordinates.
template <typename Scalar>
Vector3<Scalar> ffd_displacement(const FFDLattice& lattice, const Vector3<Scalar>& unit) {
  const auto bx = bernstein3(unit.x()), by = bernstein3(unit.y()), bz = bernstein3(unit.z());
  Vector3<Scalar> d = Vector3<Scalar>::Zero();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const Scalar bij = bx(i) * by(j);
      for (int k = 0; k < 4; ++k)
        d += (bij * bz(k)) * lattice.displacement.row(FFDLattice::index(i, j, k)).transpose().template cast<Scalar>();
    }
  return d;
}

/// Deformed copy of `mesh`. A zero displacement field reproduces the input
/// bit-for-bit. Throws GeometryError if a vertex lies outside the box.
SurfaceMesh ffd_deform(const FFDLattice& lattice, const SurfaceMesh& mesh);

/// Map the 42 free values (14 points x 3 components) to all 64 control points
/// using the mirror symmetries about the (e1,e2) and (e1,e3) planes. Interior
/// points stay at zero. Throws ParameterError if a value exceeds the bound.
Eigen::Matrix<double, FFDLattice::kPoints, 3> expand_symmetry(const Eigen::VectorXd& free);

}  // namespace swimopt
