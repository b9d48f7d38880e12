#include "swimopt/stroke.hpp"

#include <doctest.h>

using namespace swimopt;

namespace {

StrokeAverages averages(double U1, double P) {
  StrokeAverages a;
  a.U = Vec3(U1, 0, 0);
  a.P = P;
  return a;
}

StrokeOptions coarse(int phases = 4) {
  StrokeOptions o;
  o.n_phases = phases;
  o.mesh = MeshResolution::level(0);
  return o;
}

// Phase samples of a made-up periodic stroke.
StrokeAverages synthetic_stroke(int n) {
  StrokeAverages a;
  for (int k = 0; k < n; ++k) {
    const double phi = 2 * kPi * k / n;
    a.phases.push_back(phi);
    a.phase_U.emplace_back(-0.03 + 0.01 * std::cos(phi), 0.02 * std::sin(phi), 0.015 * std::cos(2 * phi));
    a.phase_Omega.emplace_back(0.15 + 0.02 * std::sin(phi), 0.05 * std::cos(phi), -0.04 * std::sin(phi));
    a.phase_P.push_back(-25);
  }
  return a;
}

double orthonormality(const Mat3& R) { return (R.transpose() * R - Mat3::Identity()).norm(); }

}  // namespace

TEST_CASE("speed cost") {
  const StrokeAverages ref = averages(-0.0306, -24.7512);
  CHECK(cost_J1(ref, ref) == -1.0);
  CHECK(cost_J1(averages(3.5980 * -0.0306, -30), ref) == doctest::Approx(-3.5980).epsilon(1e-12));
  CHECK(cost_J1(averages(0, -30), ref) == 0.0);
  CHECK_THROWS_AS(cost_J1(ref, averages(0, -1)), ConfigError);
}

TEST_CASE("efficiency cost") {
  const StrokeAverages ref = averages(-0.0306, -24.7512);
  CHECK(cost_J2(ref, ref) == -1.0);
  const StrokeAverages opt = averages(1.5196 * -0.0306, 0.9785 * -24.7512);
  CHECK(cost_J2(opt, ref) == doctest::Approx(-1.5530).epsilon(1e-4));
  CHECK(cost_J2(opt, ref) == doctest::Approx(-1.5540).epsilon(1e-2));
  CHECK(cost_J2(averages(-0.05, -40), ref) == doctest::Approx(2 * cost_J2(averages(-0.05, -80), ref)));
  CHECK_THROWS_AS(cost_J2(averages(-0.05, 0), ref), EvaluationError);
}

TEST_CASE("inverse efficiency") {
  CHECK(mean_radius(4 * kPi / 3) == doctest::Approx(1.0).epsilon(1e-15));
  const StrokeAverages s0 = averages(-0.0306, -24.7512);
  CHECK(inverse_efficiency(s0, 1.0) == doctest::Approx(-24.7512 / (6 * kPi * 0.0306 * 0.0306)));
  CHECK(inverse_efficiency(averages(-0.0612, -24.7512), 1.0) ==
        doctest::Approx(inverse_efficiency(s0, 1.0) / 4).epsilon(1e-14));
  CHECK_THROWS_AS(inverse_efficiency(averages(0, -1), 1.0), EvaluationError);
}

TEST_CASE("periodic spline") {
  const std::vector<double> v{1.0, 3.0, -2.0, 0.5, 4.0};
  const PeriodicSpline s(v, 2.0);
  for (std::size_t k = 0; k < v.size(); ++k) {
    CHECK(s(0.4 * static_cast<double>(k)) == doctest::Approx(v[k]).epsilon(1e-13));
    CHECK(s(0.4 * static_cast<double>(k) - 2.0) == doctest::Approx(v[k]).epsilon(1e-12));
    CHECK(s(0.4 * static_cast<double>(k) + 4.0) == doctest::Approx(v[k]).epsilon(1e-12));
  }
  const PeriodicSpline c({2.5, 2.5, 2.5, 2.5}, 1.0);
  CHECK(c(0.37) == doctest::Approx(2.5).epsilon(1e-14));
  std::vector<double> sn;
  for (int k = 0; k < 32; ++k) sn.push_back(std::sin(2 * kPi * k / 32));
  const PeriodicSpline ss(sn, 2 * kPi);
  CHECK(ss(1.0) == doctest::Approx(std::sin(1.0)).epsilon(1e-4));
  CHECK_THROWS_AS(PeriodicSpline({1.0}, 1.0), ParameterError);
}

TEST_CASE("trajectory kinematics") {
  TrajectoryOptions opt;
  opt.n_periods = 3;
  opt.steps_per_period = 64;
  SUBCASE("constant speed without rotation is a straight line") {
    const Trajectory tr = integrate_trajectory([](double, Vec3& U, Vec3& W) { U = Vec3(0.5, 0, 0); W.setZero(); }, 1.0, opt);
    CHECK((tr.x.back() - Vec3(1.5, 0, 0)).norm() < 1e-13);
    for (std::size_t k = 1; k < tr.t.size(); ++k) CHECK(tr.t[k] > tr.t[k - 1]);
  }
  SUBCASE("velocity perpendicular to the rotation traces a circle") {
    const double w = 1.3;
    const Trajectory tr = integrate_trajectory(
        [&](double, Vec3& U, Vec3& W) { U = Vec3::UnitX(); W = Vec3(0, 0, w); }, 1.0, opt);
    const Vec3 c(0, 1 / w, 0);
    for (std::size_t k = 0; k < tr.x.size(); k += 64) CHECK((tr.x[k] - c).norm() == doctest::Approx(1 / w).epsilon(1e-6));
  }
  SUBCASE("general constant motion is a circular helix about the rotation axis") {
    const Vec3 U(0.3, 0.2, -0.1), W(0.4, 0.9, 0.5);
    const Trajectory tr = integrate_trajectory([&](double, Vec3& u, Vec3& w) { u = U; w = W; }, 1.0, opt);
    // the helix axis passes through the point where the velocity is along W: c = W x U / |W|^2
    const Vec3 n = W.normalized(), c = W.cross(U) / W.squaredNorm();
    auto radius = [&](const Vec3& x) { const Vec3 d = x - c; return (d - d.dot(n) * n).norm(); };
    // the body starts at the origin, so the helix axis is fixed in the lab frame
    const double r0 = radius(tr.x[0]);
    for (std::size_t k = 0; k < tr.x.size(); k += 64) CHECK(radius(tr.x[k]) == doctest::Approx(r0).epsilon(1e-6));
  }
  SUBCASE("orientation stays orthonormal") {
    const Trajectory tr = integrate_trajectory(synthetic_stroke(8), opt);
    for (const auto& R : tr.R) CHECK(orthonormality(R) <= 1e-9);
  }
  SUBCASE("time step larger than a thirty-second of the period") {
    opt.steps_per_period = 16;
    CHECK_THROWS_AS(integrate_trajectory(synthetic_stroke(4), opt), ParameterError);
  }
}

TEST_CASE("per-period displacement does not depend on the period") {
  TrajectoryOptions opt;
  opt.n_periods = 4;
  const StrokeAverages a = synthetic_stroke(8);
  const Trajectory tr = integrate_trajectory(a, opt);
  const auto n = static_cast<std::size_t>(opt.steps_per_period);
  const Vec3 d0 = tr.R[0].transpose() * (tr.x[n] - tr.x[0]);
  const Mat3 rot0 = tr.R[0].transpose() * tr.R[n];
  for (std::size_t p = 1; p < 4; ++p) {
    const Vec3 d = tr.R[p * n].transpose() * (tr.x[(p + 1) * n] - tr.x[p * n]);
    CHECK((d - d0).norm() <= 1e-10 * d0.norm());
    CHECK((tr.R[p * n].transpose() * tr.R[(p + 1) * n] - rot0).norm() <= 1e-10);
    CHECK((tr.x[(p + 1) * n] - tr.x[p * n]).norm() == doctest::Approx(d0.norm()).epsilon(1e-10));
  }
  // oracle: the same integration with a ten times smaller step
  TrajectoryOptions fine = opt;
  fine.steps_per_period = 640;
  const Trajectory ref = integrate_trajectory(a, fine);
  const Vec3 dref = ref.x[640] - ref.x[0];
  CHECK((tr.x[n] - tr.x[0] - dref).norm() <= 1e-4 * dref.norm());
}

TEST_CASE("stroke averages") {
  SUBCASE("need at least two phases") {
    CHECK_THROWS_AS(stroke_average(presets::reference(), coarse(1)), ParameterError);
  }
  SUBCASE("global phase shift of the flagellum leaves the averages unchanged") {
    const StrokeAverages a = stroke_average(presets::reference(), coarse());
    SwimmerSpec shifted = presets::reference();
    shifted.flagella.front().phase = kPi / 2;
    const StrokeAverages b = stroke_average(shifted, coarse());
    CHECK((a.U - b.U).norm() <= 1e-10 * a.U.norm());
    CHECK((a.Omega - b.Omega).norm() <= 1e-10 * a.Omega.norm());
    CHECK(a.P == doctest::Approx(b.P).epsilon(1e-10));
    CHECK(a.U(0) < 0);
    CHECK(a.P < 0);
    CHECK(a.period() == doctest::Approx(1.0));
  }
  SUBCASE("mirror biflagellate averages have no lateral components") {
    const StrokeAverages a = stroke_average(presets::ellipsoid_bi(0.4 * kPi), coarse());
    for (int c : {1, 2}) {
      CHECK(std::abs(a.U(c)) <= 1e-6);
      CHECK(std::abs(a.Omega(c)) <= 1e-6);
    }
  }
  SUBCASE("a straight flagellum on a sphere does not swim") {
    SwimmerSpec s = presets::reference();
    s.flagella.front().amplitude = 0;
    const StrokeAverages straight = stroke_average(s, coarse());
    const StrokeAverages helix = stroke_average(presets::reference(), coarse());
    CHECK(std::abs(straight.U(0)) <= 1e-3 * std::abs(helix.U(0)));
  }
}
