#pragma once

#include "swimopt/core.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace swimopt {

enum class BodyKind { Head, Flagellum };

struct BodyTag {
  BodyKind kind = BodyKind::Head;
  int index = 0;  // flagellum number, 0 for the head

  bool operator==(const BodyTag&) const = default;
  std::string name() const;
};

/// Closed triangulated surface. Vertices are rows of `vertices`, triangles are
/// rows of vertex indices ordered counter-clockwise seen from outside.
struct SurfaceMesh {
  Eigen::MatrixX3d vertices;
  Eigen::MatrixX3i triangles;
  BodyTag tag;

  Eigen::Index num_vertices() const { return vertices.rows(); }
  Eigen::Index num_triangles() const { return triangles.rows(); }
  Vec3 vertex(Eigen::Index i) const { return vertices.row(i).transpose(); }
};

struct MeshStats {
  Eigen::Index vertices = 0, edges = 0, triangles = 0;
  int euler_characteristic = 0;
  bool closed = false;  // every edge shared by exactly two triangles, consistently oriented
  double min_area = 0, mean_area = 0, max_edge = 0, mean_edge = 0;
};

MeshStats mesh_stats(const SurfaceMesh& mesh);

/// Throws GeometryError unless the mesh is closed, consistently oriented with
/// positive signed volume, and free of degenerate triangles.
void check_mesh(const SurfaceMesh& mesh);

/// Signed volume by the divergence theorem; positive for outward orientation.
double mesh_volume(const SurfaceMesh& mesh);
double mesh_area(const SurfaceMesh& mesh);
/// Centroid of the enclosed solid.
Vec3 mesh_centroid(const SurfaceMesh& mesh);

/// Area-weighted vertex normals (unit length).
Eigen::MatrixX3d vertex_normals(const SurfaceMesh& mesh);

SurfaceMesh transformed(const SurfaceMesh& mesh, const Mat3& rotation, const Vec3& translation);
SurfaceMesh reversed(const SurfaceMesh& mesh);
SurfaceMesh merged(const SurfaceMesh& a, const SurfaceMesh& b);

struct RayHit {
  double t = 0;
  Eigen::Index triangle = -1;
  double u = 0, v = 0;  // barycentric weights of vertices 1 and 2
};

/// Farthest intersection of the ray origin + t*dir (t > 0) with the mesh.
std::optional<RayHit> ray_cast_farthest(const SurfaceMesh& mesh, const Vec3& origin, const Vec3& dir);

/// Generalized winding number; ~1 inside a closed outward mesh, ~0 outside.
double winding_number(const SurfaceMesh& mesh, const Vec3& p);

void write_obj(std::ostream& os, const SurfaceMesh& mesh);
void write_vtk(std::ostream& os, const SurfaceMesh& mesh, const std::string& title = "swimopt mesh");

}  // namespace swimopt
