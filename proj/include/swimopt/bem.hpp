#pragma once

#include "swimopt/mesh.hpp"

#include <vector>

namespace swimopt {

/// Worker threads for assembly and sampling (no effect without OpenMP); 0 keeps the default.
void set_num_threads(int n);
int num_threads();

/// Free-space Stokeslet G(x, y) = (I/r + d d^T/r^3) / (8 pi mu), d = x - y.
/// Throws SolverError when x == y.
template <typename Scalar>
Matrix3<Scalar> stokeslet(const Vector3<Scalar>& x, const Vector3<Scalar>& y, Scalar mu = Scalar(1)) {
  using std::sqrt;
  const Vector3<Scalar> d = x - y;
  const Scalar r2 = d.squaredNorm();
  if (!(r2 > Scalar(0))) throw SolverError("stokeslet evaluated at coincident points; use singular quadrature");
  const Scalar r = sqrt(r2);
  const Scalar c = Scalar(1) / (Scalar(8 * kPi) * mu * r);
  return c * (Matrix3<Scalar>::Identity() + (d * d.transpose()) / r2);
}

/// Quadrature controls for the Galerkin single-layer operator. Pair classes are
/// decided by centroid distance over the larger triangle diameter.
struct BemQuadrature {
  int coincident_outer_levels = 0;  // subdivision levels of the 7-point outer rule, same triangle
  int touching_outer_levels = 0;    // same, triangles sharing a vertex or an edge
  int duffy_order = 5;              // Gauss points per direction of the Duffy-mapped inner rule
  double grading = 4.0;             // radial panels are refined while wider than grading * height / size
  double near_ratio = 1.5;        // below: Duffy inner rule with the 7-point outer rule
  double medium_ratio = 3.0;      // below: 7 x 7 point product rule
  double mid_ratio = 6.0;         // below: 6 x 6 point product rule; beyond: 3 x 3
};

struct BemOptions {
  double viscosity = 1.0;
  BemQuadrature quadrature;
  bool check_overlap = true;
  double max_condition = 1e14;
};

/// All bodies concatenated into one P1 node numbering (body by body).
struct Discretization {
  std::vector<SurfaceMesh> bodies;
  std::vector<Eigen::Index> node_offset;  // size bodies+1
  Eigen::MatrixX3d nodes;
  Eigen::MatrixX3i triangles;             // global node indices
  std::vector<int> triangle_body;
  Eigen::VectorXd node_mass;              // integral of phi_l, lumped mass

  explicit Discretization(std::vector<SurfaceMesh> meshes);
  Eigen::Index num_nodes() const { return nodes.rows(); }
  Eigen::Index num_triangles() const { return triangles.rows(); }
  /// First moments r_l = integral of phi_l (x - c), one row per node.
  Eigen::MatrixX3d moments(const Vec3& c) const;
  /// Same restricted to one body (other rows zero).
  Eigen::MatrixX3d moments(const Vec3& c, int body) const;
};

/// Throws GeometryError if any vertex of one body lies inside another body.
void check_no_overlap(const std::vector<SurfaceMesh>& bodies);

/// Dense 3N x 3N Galerkin matrix of the single-layer Stokes operator with
/// P1 trial and test functions; exactly symmetric.
Eigen::MatrixXd assemble_single_layer(const Discretization& disc, const BemOptions& opt = {});

/// A flagellum driven at angular velocity omega about `axis` through `origin`.
struct Drive {
  int body = 1;
  Vec3 origin = Vec3::Zero();  // x^F
  Vec3 axis = Vec3::UnitX();   // e1^F
};

/// Block system [[G, J^T, K^T], [J, 0, 0], [K, 0, 0]] [f; U; Omega] = [I; 0; 0].
struct BlockSystem {
  Discretization disc;
  Eigen::MatrixXd matrix;
  Eigen::VectorXd rhs;
  Vec3 center = Vec3::Zero();  // x^H
  std::vector<Drive> drives;
  double omega = 0;
  BemOptions options;

  Eigen::Index num_nodes() const { return disc.num_nodes(); }
  Eigen::Index size() const { return matrix.rows(); }
};

BlockSystem assemble(std::vector<SurfaceMesh> bodies, const Vec3& center, const std::vector<Drive>& drives,
                     double omega, const BemOptions& opt = {});

struct MobilitySolution {
  Eigen::MatrixX3d traction;  // nodal coefficients f^l, one row per node
  Vec3 U = Vec3::Zero();
  Vec3 Omega = Vec3::Zero();
  double power = 0;
  double residual = 0;        // ||A x - b|| / ||b||
  double rcond = 0;           // reciprocal condition estimate of the block matrix
  Vec3 net_force = Vec3::Zero();
  Vec3 net_torque = Vec3::Zero();
  double traction_l1 = 0;     // sum over nodes and components of |integral f phi_l|
};

MobilitySolution solve_mobility(const BlockSystem& sys);

/// P = sum_i -omega e1^Fi . integral over flagellum i of f x (x - x^Fi).
double power_dissipated(const Discretization& disc, const Eigen::MatrixX3d& traction,
                        const std::vector<Drive>& drives, double omega);

struct ResistanceResult {
  Eigen::MatrixX3d traction;
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();  // about `center`
  double rcond = 0;
  double residual = 0;
};

/// Rigid body moving with velocity U + Omega x (x - center); returns the
/// hydrodynamic force and torque exerted by the fluid.
ResistanceResult solve_resistance(const SurfaceMesh& mesh, const Vec3& U, const Vec3& Omega, const Vec3& center,
                                  const BemOptions& opt = {});

/// Columns: (force; torque) for unit translations e1..e3, then unit rotations.
/// One factorization serves all six solves.
struct ResistanceMatrix {
  Eigen::Matrix<double, 6, 6> matrix = Eigen::Matrix<double, 6, 6>::Zero();
  double rcond = 0;
  double max_residual = 0;
};

ResistanceMatrix resistance_matrix(const SurfaceMesh& mesh, const Vec3& center, const BemOptions& opt = {});

struct FieldSample {
  Vec3 velocity = Vec3::Zero();
  bool near_surface = false;  // closer than one mean edge length to a body
};

/// u(y) = -integral G(x, y) f(x) dx over all bodies, by regular quadrature.
std::vector<FieldSample> velocity_field(const Discretization& disc, const Eigen::MatrixX3d& traction,
                                        const std::vector<Vec3>& points, double viscosity = 1.0);

}  // namespace swimopt
