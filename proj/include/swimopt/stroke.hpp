#pragma once

#include "swimopt/bem.hpp"
#include "swimopt/swimmer.hpp"

#include <array>
#include <iosfwd>
#include <vector>

namespace swimopt {

struct StrokeOptions {
  int n_phases = 4;
  MeshResolution mesh = MeshResolution::level(MeshResolution::kDefaultLevel);
  BemOptions bem;
};

/// Geometry and mobility solution of one flagellar phase.
struct PhaseResult {
  double phase = 0;
  SwimmerGeometry geometry;
  MobilitySolution solution;
};

/// Drives for every flagellum of a built swimmer: origin at the flagellum base,
/// axis e1^F of its placement.
std::vector<Drive> flagellum_drives(const SwimmerGeometry& g);

PhaseResult solve_phase(const SwimmerSpec& spec, double phase, const StrokeOptions& opt = {});

/// Stroke averages in the body frame. Phase t of n is 2 pi t / n.
struct StrokeAverages {
  Vec3 U = Vec3::Zero();
  Vec3 Omega = Vec3::Zero();
  double P = 0;
  double omega = -2 * kPi;
  std::vector<double> phases;
  std::vector<Vec3> phase_U, phase_Omega;
  std::vector<double> phase_P;
  double max_residual = 0;   // worst linear-solve residual over phases
  double max_propulsion = 0; // worst self-propulsion residual relative to the traction l1 norm
  double head_volume = 0;
  double reference_head_volume = 0;

  int n_phases() const { return static_cast<int>(phases.size()); }
  double period() const { return 2 * kPi / std::abs(omega); }
};

StrokeAverages stroke_average(const SwimmerSpec& spec, const StrokeOptions& opt = {});

/// Averages from already computed phase solutions (phases must be equally spaced).
StrokeAverages average_phases(const std::vector<PhaseResult>& phases, double omega);

/// Periodic cubic spline through equally spaced samples on [0, period).
class PeriodicSpline {
 public:
  PeriodicSpline() = default;
  PeriodicSpline(std::vector<double> values, double period);
  double operator()(double t) const;

 private:
  std::vector<double> y_, m_;  // values and second derivatives at the knots
  double period_ = 1, h_ = 1;
};

struct Trajectory {
  std::vector<double> t;
  std::vector<Vec3> x;   // position of x^H in the lab frame
  std::vector<Mat3> R;   // body-to-lab rotation

  void write_csv(std::ostream& os) const;
};

struct TrajectoryOptions {
  int n_periods = 2;
  int steps_per_period = 64;
  double drift_tolerance = 1e-6;
};

/// RK4 integration of dx/dt = R U(t), dR/dt = R [Omega(t)]x with the body-frame
/// velocities interpolated in time from the phase samples. The flagellar phase
/// at time t is omega t. R is re-orthonormalized after every step.
Trajectory integrate_trajectory(const StrokeAverages& avg, const TrajectoryOptions& opt = {});

/// Same with explicit velocity functions of time; used for the constant-velocity checks.
template <typename F>
Trajectory integrate_trajectory(F&& velocities, double period, const TrajectoryOptions& opt);

double cost_J1(const StrokeAverages& avg, const StrokeAverages& reference);
double cost_J2(const StrokeAverages& avg, const StrokeAverages& reference);
/// P / (6 pi mu A U1^2) with A the volume-average radius of the head.
double inverse_efficiency(const StrokeAverages& avg, double mean_radius, double viscosity = 1.0);
double mean_radius(double head_volume);

namespace detail {
void orthonormalize(Mat3& R);
}

template <typename F>
Trajectory integrate_trajectory(F&& velocities, double period, const TrajectoryOptions& opt) {
  if (opt.n_periods < 1) throw ParameterError("trajectory needs at least one period");
  if (opt.steps_per_period < 32) throw ParameterError("trajectory step must be at most period/32");
  const double dt = period / opt.steps_per_period;
  Trajectory tr;
  Vec3 x = Vec3::Zero();
  Mat3 R = Mat3::Identity();
  tr.t.push_back(0);
  tr.x.push_back(x);
  tr.R.push_back(R);
  auto rhs = [&](double t, const Mat3& Rc, Vec3& dx, Mat3& dR) {
    Vec3 U, W;
    velocities(t, U, W);
    dx = Rc * U;
    dR = Rc * cross_matrix(W);
  };
  const int n = opt.n_periods * opt.steps_per_period;
  for (int k = 0; k < n; ++k) {
    const double t = k * dt;
    Vec3 k1x, k2x, k3x, k4x;
    Mat3 k1R, k2R, k3R, k4R;
    rhs(t, R, k1x, k1R);
    rhs(t + dt / 2, R + dt / 2 * k1R, k2x, k2R);
    rhs(t + dt / 2, R + dt / 2 * k2R, k3x, k3R);
    rhs(t + dt, R + dt * k3R, k4x, k4R);
    x += dt / 6 * (k1x + 2 * k2x + 2 * k3x + k4x);
    R += dt / 6 * (k1R + 2 * k2R + 2 * k3R + k4R);
    const double drift = (R.transpose() * R - Mat3::Identity()).norm();
    if (drift > opt.drift_tolerance)
      throw ParameterError("orientation drift " + std::to_string(drift) + " exceeds tolerance; reduce the time step");
    detail::orthonormalize(R);
    tr.t.push_back((k + 1) * dt);
    tr.x.push_back(x);
    tr.R.push_back(R);
  }
  return tr;
}

}  // namespace swimopt
