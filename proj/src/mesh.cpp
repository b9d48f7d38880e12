#include "swimopt/mesh.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <ostream>
#include <unordered_map>

namespace swimopt {

std::string BodyTag::name() const {
  return kind == BodyKind::Head ? std::string("head") : "flagellum" + std::to_string(index + 1);
}

namespace {

std::uint64_t edge_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

Vec3 tri_normal_raw(const SurfaceMesh& m, Eigen::Index t) {
  const Vec3 a = m.vertex(m.triangles(t, 0));
  const Vec3 b = m.vertex(m.triangles(t, 1));
  const Vec3 c = m.vertex(m.triangles(t, 2));
  return (b - a).cross(c - a);
}

}  // namespace

MeshStats mesh_stats(const SurfaceMesh& mesh) {
  MeshStats s;
  s.vertices = mesh.num_vertices();
  s.triangles = mesh.num_triangles();
  // directed half-edge counts; a closed oriented surface has each directed edge
  // exactly once and its reverse exactly once
  std::unordered_map<std::uint64_t, int> directed;
  directed.reserve(static_cast<std::size_t>(3 * s.triangles));
  double area_sum = 0, edge_sum = 0;
  s.min_area = std::numeric_limits<double>::infinity();
  for (Eigen::Index t = 0; t < s.triangles; ++t) {
    const double area = 0.5 * tri_normal_raw(mesh, t).norm();
    area_sum += area;
    s.min_area = std::min(s.min_area, area);
    for (int k = 0; k < 3; ++k) {
      const int a = mesh.triangles(t, k), b = mesh.triangles(t, (k + 1) % 3);
      ++directed[edge_key(a, b)];
      const double len = (mesh.vertex(a) - mesh.vertex(b)).norm();
      edge_sum += len;
      s.max_edge = std::max(s.max_edge, len);
    }
  }
  bool closed = s.triangles > 0;
  Eigen::Index undirected = 0;
  for (const auto& [key, count] : directed) {
    const int a = static_cast<int>(key >> 32), b = static_cast<int>(key & 0xffffffffu);
    const auto rev = directed.find(edge_key(b, a));
    if (count != 1 || rev == directed.end() || rev->second != 1) closed = false;
    if (a < b || rev == directed.end()) ++undirected;
  }
  s.edges = undirected;
  s.closed = closed;
  s.euler_characteristic = static_cast<int>(s.vertices - s.edges + s.triangles);
  s.mean_area = s.triangles > 0 ? area_sum / static_cast<double>(s.triangles) : 0;
  s.mean_edge = s.triangles > 0 ? edge_sum / static_cast<double>(3 * s.triangles) : 0;
  return s;
}

void check_mesh(const SurfaceMesh& mesh) {
  const MeshStats s = mesh_stats(mesh);
  const std::string who = mesh.tag.name();
  if (!s.closed) throw GeometryError(who + ": mesh is not a closed consistently oriented surface");
  if (s.min_area <= 1e-12 * s.mean_area)
    throw GeometryError(who + ": mesh contains a degenerate triangle");
  if (mesh_volume(mesh) <= 0) throw GeometryError(who + ": mesh orientation is inward (signed volume <= 0)");
}

double mesh_volume(const SurfaceMesh& mesh) {
  double v = 0;
  for (Eigen::Index t = 0; t < mesh.num_triangles(); ++t) {
    const Vec3 a = mesh.vertex(mesh.triangles(t, 0));
    const Vec3 b = mesh.vertex(mesh.triangles(t, 1));
    const Vec3 c = mesh.vertex(mesh.triangles(t, 2));
    v += a.dot(b.cross(c));
  }
  return v / 6.0;
}

double mesh_area(const SurfaceMesh& mesh) {
  double a = 0;
  for (Eigen::Index t = 0; t < mesh.num_triangles(); ++t) a += 0.5 * tri_normal_raw(mesh, t).norm();
  return a;
}

Vec3 mesh_centroid(const SurfaceMesh& mesh) {
  // tetrahedra against the origin; centroid of tet (0,a,b,c) is (a+b+c)/4
  double vol = 0;
  Vec3 moment = Vec3::Zero();
  for (Eigen::Index t = 0; t < mesh.num_triangles(); ++t) {
    const Vec3 a = mesh.vertex(mesh.triangles(t, 0));
    const Vec3 b = mesh.vertex(mesh.triangles(t, 1));
    const Vec3 c = mesh.vertex(mesh.triangles(t, 2));
    const double v = a.dot(b.cross(c)) / 6.0;
    vol += v;
    moment += v * (a + b + c) / 4.0;
  }
  if (std::abs(vol) < std::numeric_limits<double>::min()) throw GeometryError("centroid of a zero-volume mesh");
  return moment / vol;
}

Eigen::MatrixX3d vertex_normals(const SurfaceMesh& mesh) {
  Eigen::MatrixX3d n = Eigen::MatrixX3d::Zero(mesh.num_vertices(), 3);
  for (Eigen::Index t = 0; t < mesh.num_triangles(); ++t) {
    const Vec3 w = tri_normal_raw(mesh, t);  // |w| = 2*area
    for (int k = 0; k < 3; ++k) n.row(mesh.triangles(t, k)) += w.transpose();
  }
  n.rowwise().normalize();
  return n;
}

SurfaceMesh transformed(const SurfaceMesh& mesh, const Mat3& rotation, const Vec3& translation) {
  SurfaceMesh out = mesh;
  out.vertices = (mesh.vertices * rotation.transpose()).rowwise() + translation.transpose();
  return out;
}

SurfaceMesh reversed(const SurfaceMesh& mesh) {
  SurfaceMesh out = mesh;
  out.triangles.col(1).swap(out.triangles.col(2));
  return out;
}

SurfaceMesh merged(const SurfaceMesh& a, const SurfaceMesh& b) {
  SurfaceMesh out;
  out.tag = a.tag;
  out.vertices.resize(a.num_vertices() + b.num_vertices(), 3);
  out.vertices << a.vertices, b.vertices;
  out.triangles.resize(a.num_triangles() + b.num_triangles(), 3);
  out.triangles << a.triangles, (b.triangles.array() + static_cast<int>(a.num_vertices())).matrix();
  return out;
}

std::optional<RayHit> ray_cast_farthest(const SurfaceMesh& mesh, const Vec3& origin, const Vec3& dir) {
  std::optional<RayHit> best;
  for (Eigen::Index t = 0; t < mesh.num_triangles(); ++t) {
    const Vec3 v0 = mesh.vertex(mesh.triangles(t, 0));
    const Vec3 e1 = mesh.vertex(mesh.triangles(t, 1)) - v0;
    const Vec3 e2 = mesh.vertex(mesh.triangles(t, 2)) - v0;
    // Moller-Trumbore
    const Vec3 p = dir.cross(e2);
    const double det = e1.dot(p);
    if (std::abs(det) < 1e-300) continue;
    const double inv = 1.0 / det;
    const Vec3 s = origin - v0;
    const double u = s.dot(p) * inv;
    constexpr double tol = 1e-12;
    if (u < -tol || u > 1 + tol) continue;
    const Vec3 q = s.cross(e1);
    const double v = dir.dot(q) * inv;
    if (v < -tol || u + v > 1 + tol) continue;
    const double tt = e2.dot(q) * inv;
    if (tt <= 0) continue;
    if (!best || tt > best->t) best = RayHit{tt, t, u, v};
  }
  return best;
}

double winding_number(const SurfaceMesh& mesh, const Vec3& p) {
  // Van Oosterom-Strackee solid angle per triangle
  double total = 0;
  for (Eigen::Index t = 0; t < mesh.num_triangles(); ++t) {
    const Vec3 a = mesh.vertex(mesh.triangles(t, 0)) - p;
    const Vec3 b = mesh.vertex(mesh.triangles(t, 1)) - p;
    const Vec3 c = mesh.vertex(mesh.triangles(t, 2)) - p;
    const double la = a.norm(), lb = b.norm(), lc = c.norm();
    const double num = a.dot(b.cross(c));
    const double den = la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
    total += 2.0 * std::atan2(num, den);
  }
  return total / (4.0 * kPi);
}

void write_obj(std::ostream& os, const SurfaceMesh& mesh) {
  os << "# " << mesh.tag.name() << '\n';
  os.precision(12);
  for (Eigen::Index i = 0; i < mesh.num_vertices(); ++i)
    os << "v " << mesh.vertices(i, 0) << ' ' << mesh.vertices(i, 1) << ' ' << mesh.vertices(i, 2) << '\n';
  for (Eigen::Index t = 0; t < mesh.num_triangles(); ++t)
    os << "f " << mesh.triangles(t, 0) + 1 << ' ' << mesh.triangles(t, 1) + 1 << ' ' << mesh.triangles(t, 2) + 1
       << '\n';
}

void write_vtk(std::ostream& os, const SurfaceMesh& mesh, const std::string& title) {
  os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET POLYDATA\n";
  os << "POINTS " << mesh.num_vertices() << " double\n";
  os.precision(12);
  for (Eigen::Index i = 0; i < mesh.num_vertices(); ++i)
    os << mesh.vertices(i, 0) << ' ' << mesh.vertices(i, 1) << ' ' << mesh.vertices(i, 2) << '\n';
  os << "POLYGONS " << mesh.num_triangles() << ' ' << 4 * mesh.num_triangles() << '\n';
  for (Eigen::Index t = 0; t < mesh.num_triangles(); ++t)
    os << "3 " << mesh.triangles(t, 0) << ' ' << mesh.triangles(t, 1) << ' ' << mesh.triangles(t, 2) << '\n';
}

}  // namespace swimopt
