#include "swimopt/geometry.hpp"

#include "swimopt/quadrature.hpp"

#include <array>
#include <map>
#include <sstream>

namespace swimopt {

void FlagellumParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0) || !std::isfinite(v)) throw ParameterError(std::string("flagellum ") + name + " must be positive");
  };
  positive(wavelength, "wavelength");
  // amplitude 0 is the straight, achiral flagellum
  if (!(amplitude >= 0) || !std::isfinite(amplitude)) throw ParameterError("flagellum amplitude must be non-negative");
  positive(radius, "radius");
  positive(length, "length");
  positive(shrink, "shrink coefficient");
  if (!(gap >= 0)) throw ParameterError("flagellum gap must be non-negative");
  for (double a : {alpha, beta, gamma, delta, phase})
    if (!std::isfinite(a)) throw ParameterError("flagellum angles must be finite");
}

namespace {

void validate_shape(const FlagellumParams& p) { p.validate(); }

}  // namespace

double helix_arc_length(const FlagellumParams& p, double s_end) {
  if (s_end <= 0) return 0;
  if (p.amplitude == 0) return s_end;
  auto speed = [&p](double s) { return helix_tangent(p, s).norm(); };
  // panels no longer than a quarter wavelength keep the integrand smooth per panel
  const int panels = std::max(1, static_cast<int>(std::ceil(s_end / (0.25 * p.wavelength))));
  double total = 0;
  for (int i = 0; i < panels; ++i) {
    const double a = s_end * i / panels, b = s_end * (i + 1) / panels;
    total += quad::integrate_adaptive(speed, a, b, 1e-14);
  }
  return total;
}

double arc_length_solve(const FlagellumParams& p) {
  validate_shape(p);
  const double target = p.length;
  if (p.amplitude == 0) return target;
  // arc(s) >= s so s = L always brackets; the loop only guards pathological input
  double lo = 0, hi = target;
  while (helix_arc_length(p, hi) < target) {
    hi *= 2;
    if (hi > 10 * target) throw GeometryError("arc_length_solve: no bracket with s_max <= 10 L");
  }
  // safeguarded Newton; d(arc)/ds = |c'(s)| >= 1
  double s = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = helix_arc_length(p, s) - target;
    if (f > 0) hi = s; else lo = s;
    double next = s - f / helix_tangent(p, s).norm();
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - s) <= 1e-15 * target) return next;
    s = next;
    if (hi - lo <= 1e-15 * target) break;
  }
  return s;
}

Eigen::MatrixX3d centerline(const FlagellumParams& p, int n_samples) {
  if (n_samples < 2) throw ParameterError("centerline: need at least 2 samples");
  const double s_max = arc_length_solve(p);
  Eigen::MatrixX3d pts(n_samples, 3);
  for (int k = 0; k < n_samples; ++k) {
    const double s = s_max * k / (n_samples - 1);
    pts.row(k) = helix_point(p, s).transpose();
  }
  return pts;
}

namespace {

double curvature(const FlagellumParams& p, double s) {
  // finite-difference second derivative; the tangent is analytic
  const double h = 1e-5 * std::max(1.0, p.wavelength);
  const Vec3 d1 = helix_tangent(p, s);
  const Vec3 d2 = (helix_tangent(p, s + h) - helix_tangent(p, s - h)) / (2 * h);
  return d1.cross(d2).norm() / std::pow(d1.norm(), 3);
}

}  // namespace

double ring_radius(double radius, int n_circ) {
  const double th = 2 * kPi / n_circ;
  return radius * std::sqrt(th / std::sin(th));
}

SurfaceMesh tube_mesh(const FlagellumParams& p, int n_axial, int n_circ) {
  if (n_axial < 8 || n_circ < 6) throw ParameterError("tube_mesh: need n_axial >= 8 and n_circ >= 6");
  validate_shape(p);
  const double s_max = arc_length_solve(p);
  const int rings = n_axial + 1;

  std::vector<Vec3> centers(static_cast<std::size_t>(rings)), tangents(centers.size()), normals(centers.size());
  for (int k = 0; k < rings; ++k) {
    const double s = s_max * k / n_axial;
    if (curvature(p, s) * p.radius >= 1.0) {
      std::ostringstream msg;
      msg << "tube_mesh: sweep self-intersects (curvature radius below tube radius) at s = " << s;
      throw GeometryError(msg.str());
    }
    centers[k] = helix_point(p, s);
    tangents[k] = helix_tangent(p, s).normalized();
  }
  // rotation-minimizing frame by double reflection
  normals[0] = (Vec3::UnitY() - Vec3::UnitY().dot(tangents[0]) * tangents[0]).normalized();
  for (int k = 0; k + 1 < rings; ++k) {
    const Vec3 v1 = centers[k + 1] - centers[k];
    const double c1 = v1.squaredNorm();
    const Vec3 r_l = normals[k] - (2 / c1) * v1.dot(normals[k]) * v1;
    const Vec3 t_l = tangents[k] - (2 / c1) * v1.dot(tangents[k]) * v1;
    const Vec3 v2 = tangents[k + 1] - t_l;
    const double c2 = v2.squaredNorm();
    Vec3 r_next = c2 > 1e-300 ? Vec3(r_l - (2 / c2) * v2.dot(r_l) * v2) : r_l;
    r_next -= r_next.dot(tangents[k + 1]) * tangents[k + 1];
    normals[k + 1] = r_next.normalized();
  }

  SurfaceMesh mesh;
  mesh.tag = {BodyKind::Flagellum, 0};
  mesh.vertices.resize(static_cast<Eigen::Index>(rings) * n_circ + 2, 3);
  const double ring = ring_radius(p.radius, n_circ);
  for (int k = 0; k < rings; ++k) {
    const Vec3 binormal = tangents[k].cross(normals[k]);
    for (int j = 0; j < n_circ; ++j) {
      const double th = 2 * kPi * j / n_circ;
      const Vec3 x = centers[k] + ring * (std::cos(th) * normals[k] + std::sin(th) * binormal);
      mesh.vertices.row(static_cast<Eigen::Index>(k) * n_circ + j) = x.transpose();
    }
  }
  const int base_center = rings * n_circ, tip_center = base_center + 1;
  mesh.vertices.row(base_center) = centers.front().transpose();
  mesh.vertices.row(tip_center) = centers.back().transpose();

  std::vector<Eigen::RowVector3i> tris;
  tris.reserve(static_cast<std::size_t>(2 * n_axial * n_circ + 2 * n_circ));
  auto id = [n_circ](int k, int j) { return k * n_circ + (j % n_circ); };
  for (int k = 0; k < n_axial; ++k)
    for (int j = 0; j < n_circ; ++j) {
      tris.emplace_back(id(k, j), id(k, j + 1), id(k + 1, j));
      tris.emplace_back(id(k, j + 1), id(k + 1, j + 1), id(k + 1, j));
    }
  for (int j = 0; j < n_circ; ++j) {
    tris.emplace_back(base_center, id(0, j + 1), id(0, j));
    tris.emplace_back(tip_center, id(n_axial, j), id(n_axial, j + 1));
  }
  mesh.triangles.resize(static_cast<Eigen::Index>(tris.size()), 3);
  for (std::size_t t = 0; t < tris.size(); ++t) mesh.triangles.row(static_cast<Eigen::Index>(t)) = tris[t];
  return mesh;
}

SurfaceMesh head_mesh(const HeadShape& shape, int n_refine) {
  if (n_refine < 0) throw ParameterError("head_mesh: n_refine must be >= 0");
  if (!(shape.radii.minCoeff() > 0)) throw ParameterError("head_mesh: radii must be positive");
  const double phi = (1 + std::sqrt(5.0)) / 2;
  std::vector<Vec3> v = {{-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0}, {0, -1, phi}, {0, 1, phi},
                         {0, -1, -phi}, {0, 1, -phi}, {phi, 0, -1},  {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& x : v) x.normalize();
  std::vector<std::array<int, 3>> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                       {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                       {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                       {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int level = 0; level < n_refine; ++level) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      if (auto it = midpoint.find(key); it != midpoint.end()) return it->second;
      // symmetric sum so mirrored edges produce mirrored points bit-for-bit
      v.push_back((0.5 * (v[key.first] + v[key.second])).normalized());
      const int id = static_cast<int>(v.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(f.size() * 4);
    for (const auto& t : f) {
      const int ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
      next.push_back({t[0], ab, ca});
      next.push_back({t[1], bc, ab});
      next.push_back({t[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    f = std::move(next);
  }
  SurfaceMesh mesh;
  mesh.tag = {BodyKind::Head, 0};
  mesh.vertices.resize(static_cast<Eigen::Index>(v.size()), 3);
  for (std::size_t i = 0; i < v.size(); ++i)
    mesh.vertices.row(static_cast<Eigen::Index>(i)) = v[i].cwiseProduct(shape.radii).transpose();
  mesh.triangles.resize(static_cast<Eigen::Index>(f.size()), 3);
  for (std::size_t t = 0; t < f.size(); ++t)
    mesh.triangles.row(static_cast<Eigen::Index>(t)) << f[t][0], f[t][1], f[t][2];
  if (mesh_volume(mesh) < 0) mesh = reversed(mesh);
  return mesh;
}

Vec3 junction_direction(double alpha, double beta) {
  return {std::cos(alpha) * std::cos(beta), std::cos(alpha) * std::sin(beta), std::sin(alpha)};
}

Mat3 orientation_rotation(double gamma, double delta) {
  return axis_rotation<double>(Vec3::UnitZ(), delta) * axis_rotation<double>(Vec3::UnitY(), gamma);
}

FlagellumPlacement attach_flagellum(const SurfaceMesh& head, const Vec3& head_center, const FlagellumParams& p) {
  p.validate();
  const Vec3 dir = junction_direction(p.alpha, p.beta);
  const auto hit = ray_cast_farthest(head, head_center, dir);
  if (!hit) throw GeometryError("attach_flagellum: junction ray misses the head surface");
  const Eigen::MatrixX3d vn = vertex_normals(head);
  const auto tri = head.triangles.row(hit->triangle);
  const double w0 = 1 - hit->u - hit->v;
  const Vec3 normal =
      (w0 * vn.row(tri(0)) + hit->u * vn.row(tri(1)) + hit->v * vn.row(tri(2))).transpose().normalized();
  FlagellumPlacement out;
  out.junction = head_center + hit->t * dir;
  out.normal = normal;
  out.transform.rotation = orientation_rotation(p.gamma, p.delta) * rotation_e1(p.phase);
  out.transform.translation = out.junction + p.gap * normal;
  return out;
}

RigidTransform mirror_e1() { return {rotation_e1(kPi), Vec3::Zero()}; }

}  // namespace swimopt
