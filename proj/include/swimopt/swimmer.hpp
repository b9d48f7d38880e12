#pragma once

#include "swimopt/config.hpp"
#include "swimopt/ffd.hpp"
#include "swimopt/geometry.hpp"

#include <iosfwd>
#include <vector>

namespace swimopt {

/// Discretization parameters. `level(n)` gives the built-in ladder; level 3 is
/// the default used for reported values. Head and flagellum refine together
/// from level 1 upward so that S0 averages converge monotonically.
struct MeshResolution {
  int head_refine = 3;
  int n_axial = 120;
  int n_circ = 12;

  static MeshResolution level(int n);
  static constexpr int kDefaultLevel = 3;
  static constexpr int kMaxLevel = 4;
};

/// Full parametric description of a swimmer in the body frame (head centered
/// at the origin, propulsion along e1).
struct SwimmerSpec {
  HeadShape head = HeadShape::sphere(1.0);
  /// 42 free lattice values; empty means an undeformed head.
  Eigen::VectorXd head_free;
  /// One entry per independent flagellum. With `mirror` set there is exactly
  /// one entry and the second flagellum is its pi-rotation about e1.
  std::vector<FlagellumParams> flagella{FlagellumParams{}};
  bool mirror = false;
  double omega = -2 * kPi;  // flagellar angular velocity about e1^F

  int num_flagella() const { return mirror ? 2 : static_cast<int>(flagella.size()); }
  bool deformed() const { return head_free.size() > 0 && head_free.cwiseAbs().maxCoeff() > 0; }
  void validate() const;
};

/// Meshes and frames of one swimmer configuration in the body frame.
struct SwimmerGeometry {
  SurfaceMesh head;
  std::vector<SurfaceMesh> flagella;
  std::vector<FlagellumPlacement> placements;
  Vec3 head_center = Vec3::Zero();  // x^H: volume centroid of the (deformed) head
  double head_volume = 0;
  double reference_head_volume = 0;  // volume of the undeformed head mesh

  std::vector<SurfaceMesh> bodies() const;
};

/// Build the meshes. `stroke_phase` is added to every flagellum's phase; the
/// mirrored flagellum is derived from the first after the phase is applied.
SwimmerGeometry build_swimmer(const SwimmerSpec& spec, const MeshResolution& res, double stroke_phase = 0);

/// Undeformed head mesh of the spec's reference shape and its FFD lattice.
SurfaceMesh reference_head(const SwimmerSpec& spec, const MeshResolution& res);
FFDLattice head_lattice(const SwimmerSpec& spec, const MeshResolution& res);

namespace presets {
/// Reference swimmer S0: unit sphere, one helical flagellum with lambda = 1,
/// R^t = 0.2, r = 0.067, L = 3, l = 2r, k_E = 0.333 * 2 pi.
SwimmerSpec reference();
/// Slender-helix benchmark: unit sphere, r = 0.02, l = 2r, R^t = lambda/2pi,
/// k_E = 2pi/lambda, with lambda chosen so that n_waves wavelengths span the
/// arc length `length`.
SwimmerSpec slender_mono(double length, double n_waves);
/// Ellipsoidal head (0.874, 0.874, 1.311) with S0 flagella; mirror
/// biflagellate with junction angle alpha, or the monoflagellate when
/// `biflagellate` is false.
SwimmerSpec ellipsoid_bi(double alpha, bool biflagellate = true);
/// Ellipsoidal head with semi-axes R1 = 0.21^(-1/3), R2 = 0.3 R1, R3 = 0.7 R1
/// (unit volume-average radius), L = 10, r = 0.05, lambda = 4.7863.
SwimmerSpec ellipsoid_mono();

SwimmerSpec by_name(const std::string& name);
std::vector<std::string> names();
}  // namespace presets

/// Swimmer spec <-> config tree ("head", "flagellum" and "lattice" blocks).
SwimmerSpec spec_from_config(const Config& cfg);
Config spec_to_config(const SwimmerSpec& spec);
void write_spec(std::ostream& os, const SwimmerSpec& spec);

}  // namespace swimopt
