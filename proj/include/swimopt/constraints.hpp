#pragma once

#include "swimopt/hull.hpp"
#include "swimopt/stroke.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace swimopt {

/// Flagellum quantities that can be optimized; k_E follows lambda as 0.333 * 2 pi / lambda.
enum class FlagellumSlot { Wavelength, Amplitude, Alpha, Beta, Gamma, Delta };

const char* slot_name(FlagellumSlot s);

/// Affine map between the unit cube and the physical design box: 42 head
/// lattice values (bounded by the FFD bound), then the selected flagellum slots
/// of the first flagellum in the box [0.3, 4] x [0.1, 1] x [-pi/2, pi/2]^4.
class ParameterEncoding {
 public:
  explicit ParameterEncoding(SwimmerSpec base, std::vector<FlagellumSlot> slots = all_slots(), bool head = true);

  static std::vector<FlagellumSlot> all_slots();

  int dim() const { return static_cast<int>(lower_.size()); }
  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const SwimmerSpec& base() const { return base_; }

  /// Physical values of a unit-cube point, and back.
  Eigen::VectorXd to_physical(const Eigen::VectorXd& x) const;
  Eigen::VectorXd to_unit(const Eigen::VectorXd& v) const;

  /// Throws EncodingError on a wrong length or a point outside [0, 1]^d.
  SwimmerSpec decode(const Eigen::VectorXd& x) const;
  /// Unit-cube coordinates of a spec; throws EncodingError if it lies outside the box.
  Eigen::VectorXd encode(const SwimmerSpec& spec) const;

 private:
  SwimmerSpec base_;
  std::vector<FlagellumSlot> slots_;
  bool head_;
  Eigen::VectorXd lower_, upper_;
  std::vector<std::string> labels_;
};

struct ConstraintOptions {
  double volume_tolerance = 0.01;      // epsilon
  double trajectory_tolerance = 0.001; // epsilon_tol
  long long mc_samples = 1'000'000;
  std::uint64_t seed = 0;
  int sweep_phases = 4;                // flagellum poses whose vertices form its swept hull
};

/// Ordered (volume, |U2| - tol, |U3| - tol, collision); feasible iff all <= 0.
struct ConstraintVector {
  static constexpr int kSize = 4;
  std::array<double, kSize> values{};
  static const std::array<const char*, kSize>& labels();

  bool feasible() const;
  double violation() const;  // sum of positive parts
};

double volume_constraint(double head_volume, double reference_volume, double tolerance = 0.01);
std::array<double, 2> trajectory_constraint(const StrokeAverages& avg, double tolerance = 0.001);

/// Fraction of uniform samples in the bounding box of all hulls that fall in
/// at least two hulls. Deterministic given the seed.
double collision_fraction(const std::vector<ConvexHull>& hulls, long long samples, std::uint64_t seed);

/// Hulls of the head and of every flagellum swept over `sweep_phases` stroke
/// phases, then the Monte-Carlo overlap fraction.
double collision_constraint(const SwimmerSpec& spec, const MeshResolution& res, const ConstraintOptions& opt = {});

/// All four constraints. Geometry errors in the collision check map to 1.0.
ConstraintVector evaluate_all(const SwimmerSpec& spec, const StrokeAverages& avg, const MeshResolution& res,
                              const ConstraintOptions& opt = {});

}  // namespace swimopt
