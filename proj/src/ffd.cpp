#include "swimopt/ffd.hpp"

#include <sstream>

namespace swimopt {

FFDLattice FFDLattice::around(const SurfaceMesh& reference, double margin) {
  if (reference.num_vertices() == 0) throw GeometryError("ffd: empty reference mesh");
  if (!(margin > 0)) throw ParameterError("ffd: box margin must be positive");
  FFDLattice lat;
  const Vec3 lo = reference.vertices.colwise().minCoeff().transpose();
  const Vec3 hi = reference.vertices.colwise().maxCoeff().transpose();
  const Vec3 pad = margin * (hi - lo);
  lat.box_min = lo - pad;
  lat.box_max = hi + pad;
  return lat;
}

const std::array<std::array<int, 3>, FFDLattice::kFreePoints>& FFDLattice::free_points() {
  // one representative per mirror orbit: j, k in {0, 1}; the two interior
  // representatives (i in {1,2}, j = k = 1) are fixed and left out
  static const auto points = [] {
    std::array<std::array<int, 3>, kFreePoints> out{};
    int n = 0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          if (!interior(i, j, k)) out[static_cast<std::size_t>(n++)] = {i, j, k};
    return out;
  }();
  return points;
}

SurfaceMesh ffd_deform(const FFDLattice& lattice, const SurfaceMesh& mesh) {
  SurfaceMesh out = mesh;
  const Vec3 ext = lattice.extent();
  for (Eigen::Index v = 0; v < mesh.num_vertices(); ++v) {
    const Vec3 x = mesh.vertex(v);
    const Vec3 unit = (x - lattice.box_min).cwiseQuotient(ext);
    if ((unit.array() < 0).any() || (unit.array() > 1).any()) {
      std::ostringstream msg;
      msg << "ffd_deform: vertex " << v << " at (" << x.x() << ", " << x.y() << ", " << x.z()
          << ") lies outside the deformation box";
      throw GeometryError(msg.str());
    }
    // x + ext * d rather than psi^-1(psi(x) + d): exact identity when d == 0
    out.vertices.row(v) = (x + ext.cwiseProduct(ffd_displacement(lattice, unit))).transpose();
  }
  return out;
}

Eigen::Matrix<double, FFDLattice::kPoints, 3> expand_symmetry(const Eigen::VectorXd& free) {
  if (free.size() != FFDLattice::kFreeDim)
    throw ParameterError("expand_symmetry: expected " + std::to_string(FFDLattice::kFreeDim) + " values, got " +
                         std::to_string(free.size()));
  const double r = FFDLattice::bound();
  for (Eigen::Index n = 0; n < free.size(); ++n)
    if (!std::isfinite(free(n)) || std::abs(free(n)) > r * (1 + 1e-12)) {
      std::ostringstream msg;
      msg << "expand_symmetry: component " << n << " = " << free(n) << " exceeds the bound " << r;
      throw ParameterError(msg.str());
    }
  Eigen::Matrix<double, FFDLattice::kPoints, 3> mu = Eigen::Matrix<double, FFDLattice::kPoints, 3>::Zero();
  const auto& pts = FFDLattice::free_points();
  for (int n = 0; n < FFDLattice::kFreePoints; ++n) {
    const auto [i, j, k] = pts[static_cast<std::size_t>(n)];
    const Eigen::RowVector3d d = free.segment<3>(3 * n).transpose();
    // y -> -y mirrors j -> 3-j, z -> -z mirrors k -> 3-k
    mu.row(FFDLattice::index(i, j, k)) = d;
    mu.row(FFDLattice::index(i, 3 - j, k)) << d(0), -d(1), d(2);
    mu.row(FFDLattice::index(i, j, 3 - k)) << d(0), d(1), -d(2);
    mu.row(FFDLattice::index(i, 3 - j, 3 - k)) << d(0), -d(1), -d(2);
  }
  return mu;
}

}  // namespace swimopt
