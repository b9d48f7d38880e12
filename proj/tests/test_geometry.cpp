#include "swimopt/ffd.hpp"
#include "swimopt/geometry.hpp"
#include "swimopt/quadrature.hpp"
#include "swimopt/swimmer.hpp"

#include <doctest.h>

#include <random>

using namespace swimopt;

namespace {

FlagellumParams s0_flagellum() { return FlagellumParams{}; }

FlagellumParams test_helix() {
  FlagellumParams p;
  p.wavelength = 1;
  p.amplitude = 0.2;
  p.shrink = 2.09;
  p.length = 3;
  return p;
}

// Fine trapezoid arc length of the centerline formula, derivative by central differences.
double trapezoid_arc(const FlagellumParams& p, double s_end, int n) {
  auto pos = [&](double s) {
    const double env = p.amplitude * (1 - std::exp(-p.shrink * p.shrink * s * s));
    const double th = 2 * kPi * s / p.wavelength;
    return Vec3(s, env * std::cos(th), env * std::sin(th));
  };
  auto speed = [&](double s) { return ((pos(s + 1e-6) - pos(s - 1e-6)) / 2e-6).norm(); };
  const double h = s_end / n;
  double sum = 0.5 * (speed(0) + speed(s_end));
  for (int i = 1; i < n; ++i) sum += speed(i * h);
  return sum * h;
}

SurfaceMesh unit_cube() {
  SurfaceMesh m;
  m.vertices.resize(8, 3);
  for (int i = 0; i < 8; ++i) m.vertices.row(i) << (i & 1), (i >> 1) & 1, (i >> 2) & 1;
  m.triangles.resize(12, 3);
  m.triangles << 0, 2, 1, 1, 2, 3,   // z = 0
      4, 5, 6, 5, 7, 6,              // z = 1
      0, 1, 4, 1, 5, 4,              // y = 0
      2, 6, 3, 3, 6, 7,              // y = 1
      0, 4, 2, 2, 4, 6,              // x = 0
      1, 3, 5, 3, 7, 5;              // x = 1
  return m;
}

// Independent Bernstein blend with explicit binomials.
Vec3 blend(const FFDLattice& L, const Vec3& u) {
  constexpr double binom[4] = {1, 3, 3, 1};
  auto b = [&](int i, double t) { return binom[i] * std::pow(t, i) * std::pow(1 - t, 3 - i); };
  Vec3 d = Vec3::Zero();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k)
        d += b(i, u(0)) * b(j, u(1)) * b(k, u(2)) * L.displacement.row(FFDLattice::index(i, j, k)).transpose();
  return d;
}

}  // namespace

TEST_CASE("centerline starts on the axis and approaches the asymptotic amplitude") {
  const FlagellumParams p = s0_flagellum();
  CHECK(helix_point(p, 0.0).norm() == 0.0);
  const Vec3 far = helix_point(p, 50.0);
  CHECK(std::hypot(far(1), far(2)) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("centerline matches the closed-form point at s = 0.75") {
  const FlagellumParams p = test_helix();
  const double env = 0.2 * (1 - std::exp(-2.09 * 2.09 * 0.5625));
  const Vec3 x = helix_point(p, 0.75);
  CHECK(x(0) == doctest::Approx(0.75));
  CHECK(x(1) == doctest::Approx(env * std::cos(1.5 * kPi)).epsilon(1e-12).scale(1));
  CHECK(x(2) == doctest::Approx(env * std::sin(1.5 * kPi)).epsilon(1e-12));
}

TEST_CASE("centerline samples are uniform in s up to s_max") {
  const FlagellumParams p = test_helix();
  const Eigen::MatrixX3d c = centerline(p, 11);
  const double smax = arc_length_solve(p);
  REQUIRE(c.rows() == 11);
  for (int k = 0; k < 11; ++k) {
    const Vec3 expect = helix_point(p, smax * k / 10.0);
    CHECK((c.row(k).transpose() - expect).norm() < 1e-14);
  }
  CHECK_THROWS_AS(centerline(p, 1), ParameterError);
}

TEST_CASE("arc length solve") {
  SUBCASE("straight line") {
    FlagellumParams p;
    p.amplitude = 0;
    p.length = 2.5;
    CHECK(arc_length_solve(p) == doctest::Approx(2.5).epsilon(1e-14));
  }
  SUBCASE("reference flagellum is shorter along its axis than its arc length") {
    CHECK(arc_length_solve(s0_flagellum()) < 3.0);
  }
  SUBCASE("agrees with a brute-force trapezoid oracle") {
    const FlagellumParams p = test_helix();
    const double smax = arc_length_solve(p);
    // bisection on the oracle's arc length
    double lo = 0, hi = p.length;
    for (int it = 0; it < 50; ++it) {
      const double mid = (lo + hi) / 2;
      (trapezoid_arc(p, mid, 20000) < p.length ? lo : hi) = mid;
    }
    CHECK(smax == doctest::Approx(lo).epsilon(1e-6));
    CHECK(helix_arc_length(p, smax) == doctest::Approx(p.length).epsilon(1e-8));
  }
  SUBCASE("non-positive length is rejected") {
    FlagellumParams p;
    p.length = 0;
    CHECK_THROWS_AS(arc_length_solve(p), ParameterError);
  }
}

TEST_CASE("tube mesh") {
  SUBCASE("straight tube has the cylinder volume") {
    FlagellumParams p;
    p.amplitude = 0;
    p.radius = 0.1;
    p.length = 1;
    const SurfaceMesh m = tube_mesh(p, 16, 32);
    CHECK(mesh_volume(m) == doctest::Approx(kPi * 0.01).epsilon(0.02));
  }
  SUBCASE("closed genus-0 surface with positive orientation") {
    for (auto p : {s0_flagellum(), test_helix()}) {
      const SurfaceMesh m = tube_mesh(p, 40, 8);
      const MeshStats st = mesh_stats(m);
      CHECK(st.euler_characteristic == 2);
      CHECK(st.closed);
      CHECK(mesh_volume(m) > 0);
      CHECK_NOTHROW(check_mesh(m));
    }
  }
  SUBCASE("volume converges to pi r^2 L") {
    const FlagellumParams p = s0_flagellum();
    const double exact = kPi * p.radius * p.radius * p.length;
    const double coarse = std::abs(mesh_volume(tube_mesh(p, 40, 8)) - exact);
    const double fine = std::abs(mesh_volume(tube_mesh(p, 120, 12)) - exact);
    CHECK(fine < coarse);
    CHECK(fine / exact < 0.01);
  }
  SUBCASE("resolution below the minimum is rejected") {
    CHECK_THROWS_AS(tube_mesh(s0_flagellum(), 4, 8), ParameterError);
    CHECK_THROWS_AS(tube_mesh(s0_flagellum(), 40, 3), ParameterError);
  }
  SUBCASE("tube radius too large for the curvature") {
    FlagellumParams p = test_helix();
    p.radius = 0.6;
    CHECK_THROWS_AS(tube_mesh(p, 40, 8), GeometryError);
  }
}

TEST_CASE("head mesh volumes") {
  CHECK(mesh_volume(head_mesh(HeadShape::sphere(1), 4)) == doctest::Approx(4 * kPi / 3).epsilon(0.005));
  const HeadShape e = HeadShape::ellipsoid(1.245, 0.374, 0.872);
  CHECK(mesh_volume(head_mesh(e, 4)) == doctest::Approx(4.0 / 3.0 * kPi * 1.245 * 0.374 * 0.872).epsilon(0.005));
  const double unit = mesh_volume(head_mesh(HeadShape::sphere(1), 3));
  CHECK(mesh_volume(head_mesh(HeadShape::sphere(2), 3)) == doctest::Approx(8 * unit).epsilon(1e-13));
  CHECK(head_mesh(HeadShape::sphere(1), 3).num_triangles() == 1280);
  CHECK_THROWS_AS(head_mesh(HeadShape::sphere(-1), 2), ParameterError);
}

TEST_CASE("mesh volume of the unit cube and of reversed meshes") {
  const SurfaceMesh cube = unit_cube();
  CHECK_NOTHROW(check_mesh(cube));
  CHECK(mesh_volume(cube) == doctest::Approx(1.0).epsilon(1e-15));
  const SurfaceMesh sphere = head_mesh(HeadShape::sphere(1), 2);
  CHECK(mesh_volume(reversed(sphere)) == -mesh_volume(sphere));
  CHECK_THROWS_AS(check_mesh(reversed(sphere)), GeometryError);
}

TEST_CASE("flagellum attachment") {
  const SurfaceMesh head = head_mesh(HeadShape::sphere(1), 3);
  SUBCASE("default junction sits on e1") {
    FlagellumParams p;
    const FlagellumPlacement f = attach_flagellum(head, Vec3::Zero(), p);
    CHECK((f.base() - Vec3(1.134, 0, 0)).norm() < 1e-12);
    CHECK((f.axis() - Vec3::UnitX()).norm() < 1e-12);
  }
  SUBCASE("alpha = pi/2 moves the junction to the e3 pole") {
    FlagellumParams p;
    p.alpha = kPi / 2;
    const FlagellumPlacement f = attach_flagellum(head, Vec3::Zero(), p);
    CHECK((f.junction - Vec3::UnitZ()).norm() < 1e-12);
    CHECK((f.base() - Vec3(0, 0, 1.134)).norm() < 1e-12);
  }
  SUBCASE("axis rotation order: gamma about e2 first, then delta about e3") {
    const Mat3 R = orientation_rotation(0.3, 0.7);
    const Mat3 expect = axis_rotation<double>(Vec3::UnitZ(), 0.7) * axis_rotation<double>(Vec3::UnitY(), 0.3);
    CHECK((R - expect).norm() < 1e-14);
  }
  SUBCASE("mirror flagellum is the pi rotation of the first") {
    const SwimmerGeometry g = build_swimmer(presets::ellipsoid_bi(0.4 * kPi), MeshResolution::level(1));
    REQUIRE(g.flagella.size() == 2);
    const Mat3 R = rotation_e1(kPi);
    const Eigen::MatrixX3d rotated = g.flagella[0].vertices * R.transpose();
    CHECK((rotated - g.flagella[1].vertices).cwiseAbs().maxCoeff() == 0.0);
    CHECK((R * g.placements[0].base() - g.placements[1].base()).norm() == 0.0);
  }
}

TEST_CASE("free-form deformation") {
  const SurfaceMesh sphere = head_mesh(HeadShape::sphere(1), 3);
  const FFDLattice base = FFDLattice::around(sphere);
  SUBCASE("zero displacement is the exact identity") {
    const SurfaceMesh out = ffd_deform(base, sphere);
    CHECK((out.vertices.array() == sphere.vertices.array()).all());
  }
  SUBCASE("box is the bounding box inflated by 10 percent per side") {
    CHECK((base.box_min - Vec3::Constant(-1.2)).norm() < 1e-12);
    CHECK((base.box_max - Vec3::Constant(1.2)).norm() < 1e-12);
  }
  SUBCASE("constant displacement of every control point is a translation") {
    FFDLattice L = base;
    const Vec3 t(0.03, -0.02, 0.01);
    L.displacement.rowwise() = t.transpose();
    const SurfaceMesh out = ffd_deform(L, sphere);
    const Vec3 shift = t.cwiseProduct(L.extent());
    for (Eigen::Index v = 0; v < sphere.num_vertices(); ++v)
      CHECK((out.vertex(v) - sphere.vertex(v) - shift).norm() < 1e-12);
  }
  SUBCASE("single corner displacement changes the volume as the Jacobian integral predicts") {
    FFDLattice L = base;
    L.displacement.row(FFDLattice::index(0, 0, 0)) << 0.05, 0, 0;
    const SurfaceMesh fine = head_mesh(HeadShape::sphere(1), 4);
    const double dv_mesh = mesh_volume(ffd_deform(L, fine)) - mesh_volume(fine);
    // oracle: integral over the unit ball of det(I + grad d) - 1 with d from the explicit blend,
    // Gauss rule in spherical coordinates (40 x 40 x 64 = 102400 samples)
    const auto gr = quad::gauss_legendre(40), gt = quad::gauss_legendre(40);
    const Vec3 ext = L.extent();
    auto map = [&](const Vec3& x) {
      return Vec3(x + blend(L, (x - L.box_min).cwiseQuotient(ext)).cwiseProduct(ext));
    };
    double dv = 0;
    for (std::size_t a = 0; a < gr.x.size(); ++a)
      for (std::size_t b = 0; b < gt.x.size(); ++b)
        for (int c = 0; c < 64; ++c) {
          const double r = gr.x[a], th = kPi * gt.x[b], ph = 2 * kPi * (c + 0.5) / 64;
          const Vec3 x(r * std::cos(th), r * std::sin(th) * std::cos(ph), r * std::sin(th) * std::sin(ph));
          Mat3 J;
          const double h = 1e-5;
          for (int k = 0; k < 3; ++k) {
            const Vec3 e = h * Vec3::Unit(k);
            J.col(k) = (map(x + e) - map(x - e)) / (2 * h);
          }
          const double w = gr.w[a] * gt.w[b] * kPi * (2 * kPi / 64) * r * r * std::sin(th);
          dv += w * (J.determinant() - 1);
        }
    CHECK(std::abs(dv) > 1e-4);
    CHECK(dv_mesh == doctest::Approx(dv).epsilon(0.02));
  }
  SUBCASE("vertex outside the box") {
    FFDLattice L = base;
    L.box_max = Vec3::Constant(0.5);
    CHECK_THROWS_AS(ffd_deform(L, sphere), GeometryError);
  }
}

TEST_CASE("symmetry expansion of the free lattice values") {
  CHECK(FFDLattice::bound() == doctest::Approx(1.0 / 6.0 - 0.1));
  CHECK(FFDLattice::bound() == doctest::Approx(0.0667).epsilon(1e-3));
  CHECK(expand_symmetry(Eigen::VectorXd::Zero(42)).isZero(0));

  SUBCASE("one free point and its mirror images") {
    Eigen::VectorXd free = Eigen::VectorXd::Zero(42);
    free.head<3>() << 0.01, 0.02, 0.03;
    const auto mu = expand_symmetry(free);
    const auto [i, j, k] = FFDLattice::free_points()[0];
    CHECK(mu.row(FFDLattice::index(i, j, 3 - k)).isApprox(Eigen::RowVector3d(0.01, 0.02, -0.03)));
    CHECK(mu.row(FFDLattice::index(i, 3 - j, k)).isApprox(Eigen::RowVector3d(0.01, -0.02, 0.03)));
    CHECK(mu.row(FFDLattice::index(i, 3 - j, 3 - k)).isApprox(Eigen::RowVector3d(0.01, -0.02, -0.03)));
  }
  SUBCASE("interior points stay fixed and reflections leave the field unchanged") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-FFDLattice::bound(), FFDLattice::bound());
    Eigen::VectorXd free(42);
    for (auto& v : free) v = u(rng);
    const auto mu = expand_symmetry(free);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k) {
          const auto row = mu.row(FFDLattice::index(i, j, k));
          if (FFDLattice::interior(i, j, k)) CHECK(row.isZero(0));
          const auto mz = mu.row(FFDLattice::index(i, j, 3 - k));
          const auto my = mu.row(FFDLattice::index(i, 3 - j, k));
          CHECK(row(0) == mz(0));
          CHECK(row(1) == mz(1));
          CHECK(row(2) == -mz(2));
          CHECK(row(0) == my(0));
          CHECK(row(1) == -my(1));
          CHECK(row(2) == my(2));
        }
  }
  SUBCASE("out of bounds") {
    Eigen::VectorXd free = Eigen::VectorXd::Zero(42);
    free(5) = 0.07;
    CHECK_THROWS_AS(expand_symmetry(free), ParameterError);
    CHECK_THROWS_AS(expand_symmetry(Eigen::VectorXd::Zero(41)), ParameterError);
  }
}

TEST_CASE("every mesh of the ladder is closed, oriented and non-degenerate") {
  for (int level = 0; level <= 2; ++level) {
    const SwimmerGeometry g = build_swimmer(presets::reference(), MeshResolution::level(level));
    CHECK_NOTHROW(check_mesh(g.head));
    for (const auto& f : g.flagella) CHECK_NOTHROW(check_mesh(f));
  }
}
