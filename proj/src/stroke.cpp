#include "swimopt/stroke.hpp"

#include <iomanip>
#include <ostream>

namespace swimopt {

std::vector<Drive> flagellum_drives(const SwimmerGeometry& g) {
  std::vector<Drive> drives;
  for (std::size_t i = 0; i < g.placements.size(); ++i)
    drives.push_back({static_cast<int>(i) + 1, g.placements[i].base(), g.placements[i].axis()});
  return drives;
}

PhaseResult solve_phase(const SwimmerSpec& spec, double phase, const StrokeOptions& opt) {
  PhaseResult r;
  r.phase = phase;
  r.geometry = build_swimmer(spec, opt.mesh, phase);
  const BlockSystem sys =
      assemble(r.geometry.bodies(), r.geometry.head_center, flagellum_drives(r.geometry), spec.omega, opt.bem);
  r.solution = solve_mobility(sys);
  return r;
}

StrokeAverages average_phases(const std::vector<PhaseResult>& phases, double omega) {
  if (phases.size() < 2) throw ParameterError("stroke average needs at least two phases");
  StrokeAverages a;
  a.omega = omega;
  for (const auto& p : phases) {
    const MobilitySolution& s = p.solution;
    a.phases.push_back(p.phase);
    a.phase_U.push_back(s.U);
    a.phase_Omega.push_back(s.Omega);
    a.phase_P.push_back(s.power);
    a.U += s.U;
    a.Omega += s.Omega;
    a.P += s.power;
    a.max_residual = std::max(a.max_residual, s.residual);
    const double scale = s.traction_l1 > 0 ? s.traction_l1 : 1.0;
    a.max_propulsion = std::max({a.max_propulsion, s.net_force.norm() / scale, s.net_torque.norm() / scale});
  }
  const double n = static_cast<double>(phases.size());
  a.U /= n;
  a.Omega /= n;
  a.P /= n;
  a.head_volume = phases.front().geometry.head_volume;
  a.reference_head_volume = phases.front().geometry.reference_head_volume;
  return a;
}

StrokeAverages stroke_average(const SwimmerSpec& spec, const StrokeOptions& opt) {
  if (opt.n_phases < 2) throw ParameterError("stroke average needs at least two phases");
  std::vector<PhaseResult> phases;
  for (int t = 0; t < opt.n_phases; ++t) {
    const double phi = 2 * kPi * t / opt.n_phases;
    try {
      phases.push_back(solve_phase(spec, phi, opt));
    } catch (const SolverError& e) {
      throw SolverError("phase " + std::to_string(t) + ": " + e.what());
    } catch (const GeometryError& e) {
      throw GeometryError("phase " + std::to_string(t) + ": " + e.what());
    }
    // only the averages are kept; drop the meshes of all but the first phase
    if (t > 0) phases.back().geometry = {};
  }
  return average_phases(phases, spec.omega);
}

PeriodicSpline::PeriodicSpline(std::vector<double> values, double period)
    : y_(std::move(values)), period_(period) {
  const auto n = static_cast<Eigen::Index>(y_.size());
  if (n < 2) throw ParameterError("periodic spline needs at least two samples");
  if (!(period > 0)) throw ParameterError("periodic spline needs a positive period");
  h_ = period / static_cast<double>(n);
  // cyclic tridiagonal system h/6 (m_{k-1} + 4 m_k + m_{k+1}) = (y_{k+1} - 2 y_k + y_{k-1}) / h
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index km = (k + n - 1) % n, kp = (k + 1) % n;
    A(k, k) += 4 * h_ / 6;
    A(k, km) += h_ / 6;
    A(k, kp) += h_ / 6;
    b(k) = (y_[static_cast<std::size_t>(kp)] - 2 * y_[static_cast<std::size_t>(k)] + y_[static_cast<std::size_t>(km)]) / h_;
  }
  const Eigen::VectorXd m = A.partialPivLu().solve(b);
  m_.assign(m.data(), m.data() + n);
}

double PeriodicSpline::operator()(double t) const {
  const std::size_t n = y_.size();
  double u = std::fmod(t, period_);
  if (u < 0) u += period_;
  auto k = static_cast<std::size_t>(u / h_);
  if (k >= n) k = n - 1;
  const std::size_t k1 = (k + 1) % n;
  const double a = (static_cast<double>(k + 1) * h_ - u) / h_, b = 1 - a;
  return a * y_[k] + b * y_[k1] + ((a * a * a - a) * m_[k] + (b * b * b - b) * m_[k1]) * h_ * h_ / 6;
}

namespace detail {
void orthonormalize(Mat3& R) {
  Vec3 c0 = R.col(0).normalized();
  Vec3 c1 = (R.col(1) - c0.dot(R.col(1)) * c0).normalized();
  Vec3 c2 = (R.col(2) - c0.dot(R.col(2)) * c0 - c1.dot(R.col(2)) * c1).normalized();
  R.col(0) = c0;
  R.col(1) = c1;
  R.col(2) = c2;
}
}  // namespace detail

Trajectory integrate_trajectory(const StrokeAverages& avg, const TrajectoryOptions& opt) {
  const int n = avg.n_phases();
  if (n < 2) throw ParameterError("trajectory needs phase samples");
  for (int k = 0; k < n; ++k)
    if (std::abs(avg.phases[static_cast<std::size_t>(k)] - 2 * kPi * k / n) > 1e-12)
      throw ParameterError("trajectory needs equally spaced phases starting at 0");
  std::array<PeriodicSpline, 6> sp;
  for (int c = 0; c < 6; ++c) {
    std::vector<double> v;
    for (int k = 0; k < n; ++k) {
      const auto i = static_cast<std::size_t>(k);
      v.push_back(c < 3 ? avg.phase_U[i](c) : avg.phase_Omega[i](c - 3));
    }
    sp[static_cast<std::size_t>(c)] = PeriodicSpline(std::move(v), 2 * kPi);
  }
  const double omega = avg.omega;
  auto vel = [&](double t, Vec3& U, Vec3& W) {
    const double phi = omega * t;
    for (int c = 0; c < 3; ++c) {
      U(c) = sp[static_cast<std::size_t>(c)](phi);
      W(c) = sp[static_cast<std::size_t>(c) + 3](phi);
    }
  };
  return integrate_trajectory(vel, avg.period(), opt);
}

void Trajectory::write_csv(std::ostream& os) const {
  os << "t,x,y,z,r00,r01,r02,r10,r11,r12,r20,r21,r22\n";
  os << std::setprecision(12);
  for (std::size_t k = 0; k < t.size(); ++k) {
    os << t[k] << ',' << x[k](0) << ',' << x[k](1) << ',' << x[k](2);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) os << ',' << R[k](i, j);
    os << '\n';
  }
}

double cost_J1(const StrokeAverages& avg, const StrokeAverages& reference) {
  if (reference.U(0) == 0) throw ConfigError("reference swimmer has zero mean speed");
  return -avg.U(0) / reference.U(0);
}

double cost_J2(const StrokeAverages& avg, const StrokeAverages& reference) {
  if (reference.U(0) == 0) throw ConfigError("reference swimmer has zero mean speed");
  if (avg.P == 0) throw EvaluationError("zero mean power");
  return -(avg.U(0) / reference.U(0)) * (reference.P / avg.P);
}

double mean_radius(double head_volume) { return std::cbrt(3 * head_volume / (4 * kPi)); }

double inverse_efficiency(const StrokeAverages& avg, double radius, double viscosity) {
  if (avg.U(0) == 0) throw EvaluationError("zero mean speed");
  return avg.P / (6 * kPi * viscosity * radius * avg.U(0) * avg.U(0));
}

}  // namespace swimopt
