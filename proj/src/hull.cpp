#include "swimopt/hull.hpp"

#include <array>
#include <unordered_map>

namespace swimopt {

bool ConvexHull::contains(const Vec3& p, double tol) const {
  if ((p.array() < lo.array() - tol).any() || (p.array() > hi.array() + tol).any()) return false;
  for (std::size_t f = 0; f < normal.size(); ++f)
    if (normal[f].dot(p) > offset[f] + tol) return false;
  return true;
}

double ConvexHull::volume(const std::vector<Vec3>& points) const {
  double v = 0;
  for (const auto& f : faces)
    v += points[static_cast<std::size_t>(f[0])].dot(
        points[static_cast<std::size_t>(f[1])].cross(points[static_cast<std::size_t>(f[2])]));
  return v / 6;
}

namespace {

struct Face {
  std::array<int, 3> v;
  Vec3 n;
  double d = 0;
  bool alive = true;
};

std::uint64_t edge_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

}  // namespace

ConvexHull convex_hull(const std::vector<Vec3>& pts) {
  const int n = static_cast<int>(pts.size());
  if (n < 4) throw GeometryError("convex hull needs at least 4 points");
  Vec3 lo = pts[0], hi = pts[0];
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double scale = (hi - lo).norm();
  if (!(scale > 0)) throw GeometryError("convex hull of coincident points");
  const double eps = 1e-10 * scale;
  auto P = [&](int i) -> const Vec3& { return pts[static_cast<std::size_t>(i)]; };

  // initial tetrahedron from extreme points
  int i0 = 0, i1 = 0;
  for (int i = 1; i < n; ++i) {
    if (P(i).x() < P(i0).x()) i0 = i;
    if (P(i).x() > P(i1).x()) i1 = i;
  }
  if ((P(i1) - P(i0)).norm() <= eps)
    for (int i = 0; i < n; ++i)
      if ((P(i) - P(i0)).norm() > (P(i1) - P(i0)).norm()) i1 = i;
  const Vec3 axis = (P(i1) - P(i0)).normalized();
  int i2 = -1;
  double best = eps;
  for (int i = 0; i < n; ++i) {
    const Vec3 r = P(i) - P(i0);
    const double dist = (r - r.dot(axis) * axis).norm();
    if (dist > best) best = dist, i2 = i;
  }
  if (i2 < 0) throw GeometryError("convex hull of collinear points");
  const Vec3 pn = (P(i1) - P(i0)).cross(P(i2) - P(i0)).normalized();
  int i3 = -1;
  best = eps;
  for (int i = 0; i < n; ++i) {
    const double dist = std::abs(pn.dot(P(i) - P(i0)));
    if (dist > best) best = dist, i3 = i;
  }
  if (i3 < 0) throw GeometryError("convex hull of coplanar points");

  std::vector<Face> faces;
  std::unordered_map<std::uint64_t, int> edge_face;
  auto add_face = [&](int a, int b, int c) {
    Face f;
    f.v = {a, b, c};
    f.n = (P(b) - P(a)).cross(P(c) - P(a)).normalized();
    f.d = f.n.dot(P(a));
    const int id = static_cast<int>(faces.size());
    faces.push_back(f);
    edge_face[edge_key(a, b)] = id;
    edge_face[edge_key(b, c)] = id;
    edge_face[edge_key(c, a)] = id;
  };
  const Vec3 inner = (P(i0) + P(i1) + P(i2) + P(i3)) / 4;
  const std::array<std::array<int, 3>, 4> tet{{{i0, i1, i2}, {i0, i3, i1}, {i1, i3, i2}, {i2, i3, i0}}};
  const bool flip = pn.dot(P(i3) - P(i0)) > 0;
  for (auto t : tet) {
    if (flip) std::swap(t[1], t[2]);
    add_face(t[0], t[1], t[2]);
  }
  for (const auto& f : faces)
    if (f.n.dot(inner) > f.d) throw GeometryError("convex hull: inconsistent initial orientation");

  std::vector<int> visible;
  std::vector<std::pair<int, int>> horizon;
  for (int i = 0; i < n; ++i) {
    if (i == i0 || i == i1 || i == i2 || i == i3) continue;
    visible.clear();
    for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
      const Face& F = faces[static_cast<std::size_t>(f)];
      if (F.alive && F.n.dot(P(i)) - F.d > eps) visible.push_back(f);
    }
    if (visible.empty()) continue;
    for (int f : visible) faces[static_cast<std::size_t>(f)].alive = false;
    horizon.clear();
    for (int f : visible) {
      const auto& v = faces[static_cast<std::size_t>(f)].v;
      for (int k = 0; k < 3; ++k) {
        const int a = v[static_cast<std::size_t>(k)], b = v[static_cast<std::size_t>((k + 1) % 3)];
        const auto it = edge_face.find(edge_key(b, a));
        if (it == edge_face.end()) throw GeometryError("convex hull: open edge");
        if (faces[static_cast<std::size_t>(it->second)].alive) horizon.emplace_back(a, b);
      }
    }
    for (int f : visible) {
      const auto& v = faces[static_cast<std::size_t>(f)].v;
      for (int k = 0; k < 3; ++k) {
        const auto key = edge_key(v[static_cast<std::size_t>(k)], v[static_cast<std::size_t>((k + 1) % 3)]);
        const auto it = edge_face.find(key);
        if (it != edge_face.end() && it->second == f) edge_face.erase(it);
      }
    }
    for (const auto& [a, b] : horizon) add_face(a, b, i);
  }

  ConvexHull h;
  h.lo = lo;
  h.hi = hi;
  for (const auto& f : faces) {
    if (!f.alive) continue;
    h.normal.push_back(f.n);
    h.offset.push_back(f.d);
    h.faces.push_back(f.v);
  }
  return h;
}

}  // namespace swimopt
