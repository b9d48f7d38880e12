#pragma once

#include "swimopt/mesh.hpp"

#include <cmath>

namespace swimopt {

/// Parametric helical flagellum. Lengths are in head radii, angles in radians.
struct FlagellumParams {
  double wavelength = 1.0;       // lambda
  double amplitude = 0.2;        // R^t, asymptotic helix radius
  double radius = 0.067;         // tube radius r
  double length = 3.0;           // true arc length L of the centerline
  double shrink = 0.333 * 2 * kPi;  // k_E, controls how fast the amplitude grows from the base
  double alpha = 0, beta = 0;    // junction direction: alpha tilts e1 toward e3, beta toward e2
  double gamma = 0, delta = 0;   // axis orientation: rotation about e2, then about e3
  double gap = 0.134;            // distance l from the head surface along its normal
  double phase = 0;              // rotation of the flagellum about its own axis

  /// Throws ParameterError on non-positive lengths or a negative gap.
  void validate() const;
  /// Convention used when the helix shape is varied: k_E = 0.333 * 2 pi / lambda.
  static double shrink_for(double wavelength) { return 0.333 * 2 * kPi / wavelength; }
};

/// Helix centerline in the flagellum frame (axis e1, base at the origin).
template <typename Scalar>
Vector3<Scalar> helix_point(const FlagellumParams& p, Scalar s) {
  using std::cos, std::exp, std::sin;
  const Scalar envelope = Scalar(p.amplitude) * (Scalar(1) - exp(-Scalar(p.shrink * p.shrink) * s * s));
  const Scalar theta = Scalar(2 * kPi / p.wavelength) * s;
  return {s, envelope * cos(theta), envelope * sin(theta)};
}

/// d/ds of helix_point.
template <typename Scalar>
Vector3<Scalar> helix_tangent(const FlagellumParams& p, Scalar s) {
  using std::cos, std::exp, std::sin;
  const Scalar k2 = Scalar(p.shrink * p.shrink);
  const Scalar decay = exp(-k2 * s * s);
  const Scalar env = Scalar(p.amplitude) * (Scalar(1) - decay);
  const Scalar denv = Scalar(2 * p.amplitude) * k2 * s * decay;
  const Scalar w = Scalar(2 * kPi / p.wavelength);
  const Scalar c = cos(w * s), sn = sin(w * s);
  return {Scalar(1), denv * c - env * w * sn, denv * sn + env * w * c};
}

/// Arc length of the centerline over [0, s_end], adaptive Gauss-Legendre to ~1e-13 relative.
double helix_arc_length(const FlagellumParams& p, double s_end);

/// Parameter extent s_max whose arc length equals p.length.
double arc_length_solve(const FlagellumParams& p);

/// n_samples points at uniformly spaced parameters in [0, s_max], one per row.
Eigen::MatrixX3d centerline(const FlagellumParams& p, int n_samples);

/// Closed tube of radius p.radius swept along the centerline with a
/// rotation-minimizing frame, in the flagellum frame; flat fan caps at both ends.
/// Ring vertices sit at ring_radius() so each polygonal cross-section has the
/// area of the circle.
SurfaceMesh tube_mesh(const FlagellumParams& p, int n_axial, int n_circ);
double ring_radius(double radius, int n_circ);

struct HeadShape {
  enum class Kind { Sphere, Ellipsoid };
  Kind kind = Kind::Sphere;
  Vec3 radii = Vec3::Ones();  // semi-axes along e1, e2, e3 (all equal for a sphere)

  static HeadShape sphere(double r) { return {Kind::Sphere, Vec3::Constant(r)}; }
  static HeadShape ellipsoid(double r1, double r2, double r3) { return {Kind::Ellipsoid, Vec3(r1, r2, r3)}; }
  double volume() const { return 4.0 / 3.0 * kPi * radii.prod(); }
};

/// Subdivided icosahedron projected to the sphere and scaled to the ellipsoid.
/// Level n has 20*4^n triangles. The mesh is symmetric under the three
/// coordinate-plane reflections.
SurfaceMesh head_mesh(const HeadShape& shape, int n_refine);

/// Rigid placement of a flagellum: world = translation + rotation * local.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& x) const { return translation + rotation * x; }
  RigidTransform then(const RigidTransform& outer) const {
    return {outer.rotation * rotation, outer.rotation * translation + outer.translation};
  }
};

/// Where a flagellum sits on the head. `axis` is e1 of the flagellum frame in
/// body coordinates and `base` is its base point x^F.
struct FlagellumPlacement {
  RigidTransform transform;  // includes the phase rotation about the flagellum axis
  Vec3 junction = Vec3::Zero();
  Vec3 normal = Vec3::UnitX();
  Vec3 base() const { return transform.translation; }
  Vec3 axis() const { return transform.rotation.col(0); }
};

/// Direction of the junction ray from the head center.
Vec3 junction_direction(double alpha, double beta);
/// Flagellum axis orientation R(e3, delta) * R(e2, gamma).
Mat3 orientation_rotation(double gamma, double delta);

FlagellumPlacement attach_flagellum(const SurfaceMesh& head, const Vec3& head_center, const FlagellumParams& p);

/// The pi-rotation about e1 used to derive the second flagellum of a mirror biflagellate.
RigidTransform mirror_e1();

}  // namespace swimopt
