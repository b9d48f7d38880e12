#include "swimopt/bem.hpp"

#include "swimopt/quadrature.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <array>
#include <limits>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace swimopt {

void set_num_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

int num_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}


Discretization::Discretization(std::vector<SurfaceMesh> meshes) : bodies(std::move(meshes)) {
  if (bodies.empty()) throw GeometryError("discretization needs at least one body");
  node_offset.push_back(0);
  Eigen::Index nt = 0;
  for (const auto& b : bodies) {
    node_offset.push_back(node_offset.back() + b.num_vertices());
    nt += b.num_triangles();
  }
  nodes.resize(node_offset.back(), 3);
  triangles.resize(nt, 3);
  triangle_body.reserve(static_cast<std::size_t>(nt));
  Eigen::Index t0 = 0;
  for (std::size_t k = 0; k < bodies.size(); ++k) {
    const auto& b = bodies[k];
    nodes.middleRows(node_offset[k], b.num_vertices()) = b.vertices;
    triangles.middleRows(t0, b.num_triangles()) = (b.triangles.array() + static_cast<int>(node_offset[k])).matrix();
    t0 += b.num_triangles();
    triangle_body.insert(triangle_body.end(), static_cast<std::size_t>(b.num_triangles()), static_cast<int>(k));
  }
  node_mass = Eigen::VectorXd::Zero(nodes.rows());
  for (Eigen::Index t = 0; t < triangles.rows(); ++t) {
    const Vec3 a = nodes.row(triangles(t, 0)), b = nodes.row(triangles(t, 1)), c = nodes.row(triangles(t, 2));
    const double area = 0.5 * (b - a).cross(c - a).norm();
    for (int k = 0; k < 3; ++k) node_mass(triangles(t, k)) += area / 3;
  }
}

Eigen::MatrixX3d Discretization::moments(const Vec3& c) const { return moments(c, -1); }

Eigen::MatrixX3d Discretization::moments(const Vec3& c, int body) const {
  // exact for P1: integral phi_a (x - c) = A/12 (2 (x_a - c) + (x_b - c) + (x_d - c))
  Eigen::MatrixX3d r = Eigen::MatrixX3d::Zero(nodes.rows(), 3);
  for (Eigen::Index t = 0; t < triangles.rows(); ++t) {
    if (body >= 0 && triangle_body[static_cast<std::size_t>(t)] != body) continue;
    std::array<Vec3, 3> x;
    for (int k = 0; k < 3; ++k) x[k] = nodes.row(triangles(t, k)).transpose() - c;
    const double area = 0.5 * (x[1] - x[0]).cross(x[2] - x[0]).norm();
    const Vec3 sum = x[0] + x[1] + x[2];
    for (int k = 0; k < 3; ++k) r.row(triangles(t, k)) += (area / 12 * (sum + x[k])).transpose();
  }
  return r;
}

void check_no_overlap(const std::vector<SurfaceMesh>& bodies) {
  for (std::size_t a = 0; a < bodies.size(); ++a)
    for (std::size_t b = 0; b < bodies.size(); ++b) {
      if (a == b) continue;
      const Vec3 lo = bodies[b].vertices.colwise().minCoeff().transpose();
      const Vec3 hi = bodies[b].vertices.colwise().maxCoeff().transpose();
      for (Eigen::Index v = 0; v < bodies[a].num_vertices(); ++v) {
        const Vec3 x = bodies[a].vertex(v);
        if ((x.array() < lo.array()).any() || (x.array() > hi.array()).any()) continue;
        if (winding_number(bodies[b], x) > 0.5) {
          std::ostringstream msg;
          msg << "overlapping bodies: vertex " << v << " of " << bodies[a].tag.name() << " lies inside "
              << bodies[b].tag.name();
          throw GeometryError(msg.str());
        }
      }
    }
}

namespace {

using Block = Eigen::Matrix<double, 9, 9>;

struct Panel {
  std::array<Vec3, 3> v;
  std::array<Eigen::Index, 3> node;
  Vec3 normal;    // unit
  Vec3 centroid;
  double area = 0;
  double diameter = 0;
};

struct PointSet {
  std::vector<Vec3> x;
  std::vector<double> w;  // includes the area
  std::vector<Vec3> phi;  // P1 basis values = barycentric coordinates
};

PointSet points_on(const Panel& p, const quad::TriangleRule& rule) {
  PointSet s;
  for (std::size_t q = 0; q < rule.w.size(); ++q) {
    const Vec3& b = rule.bary[q];
    s.x.push_back(b(0) * p.v[0] + b(1) * p.v[1] + b(2) * p.v[2]);
    s.w.push_back(rule.w[q] * p.area);
    s.phi.push_back(b);
  }
  return s;
}

// Inner integrals H_b = integral K(x, y) phi_b(y) dy for b = 0..2, each a
// symmetric 3x3 stored as (xx, xy, xz, yy, yz, zz). K = I/r + d d^T/r^3; the
// 1/(8 pi mu) factor is applied once to the assembled matrix.
using Inner = std::array<std::array<double, 6>, 3>;

inline void add_kernel(Inner& h, const Vec3& x, const Vec3& y, double w, const Vec3& phi) {
  const double dx = x(0) - y(0), dy = x(1) - y(1), dz = x(2) - y(2);
  const double r2 = dx * dx + dy * dy + dz * dz;
  const double wr = w / std::sqrt(r2);
  const double wr3 = wr / r2;
  const double k[6] = {wr + wr3 * dx * dx, wr3 * dx * dy, wr3 * dx * dz,
                       wr + wr3 * dy * dy, wr3 * dy * dz, wr + wr3 * dz * dz};
  for (int b = 0; b < 3; ++b)
    for (int c = 0; c < 6; ++c) h[b][c] += phi(b) * k[c];
}

void inner_regular(const PointSet& t, const Vec3& x, Inner& h) {
  h = {};
  for (std::size_t q = 0; q < t.x.size(); ++q) add_kernel(h, x, t.x[q], t.w[q], t.phi[q]);
}

// Same integral by projecting x onto the plane of t and splitting t into three
// signed triangles with apex at the projection, each integrated with a Duffy
// map whose Jacobian cancels the 1/r singularity. Geometric panels in the
// radial variable resolve the near-singular layer when x is off the plane.
void inner_duffy(const Panel& t, const Vec3& x, const quad::Rule1D& g, double grading, Inner& h) {
  h = {};
  const Vec3& n = t.normal;
  const double height = (x - t.v[0]).dot(n);
  const Vec3 p = x - height * n;
  const double two_area = 2 * t.area;
  Vec3 lp;
  lp(0) = (t.v[1] - p).cross(t.v[2] - p).dot(n) / two_area;
  lp(1) = (t.v[2] - p).cross(t.v[0] - p).dot(n) / two_area;
  lp(2) = 1 - lp(0) - lp(1);
  const double ah = std::abs(height);
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3;
    const Vec3 a = t.v[i] - p;
    const Vec3 ab = t.v[j] - t.v[i];
    const double jac = a.cross(ab).dot(n);  // signed, twice the subtriangle area
    if (std::abs(jac) <= 1e-14 * two_area) continue;
    Vec3 la = -lp;
    la(i) += 1;
    Vec3 lab = Vec3::Zero();
    lab(j) += 1;
    lab(i) -= 1;
    const double dmax = std::max(a.norm(), (t.v[j] - p).norm());
    // radial panels [u/4, u] down to the height scale
    std::array<double, 10> edges{};
    int ne = 0;
    edges[ne++] = 1;
    if (ah > 0) {
      const double ustar = ah / dmax;
      while (ne < 8 && edges[ne - 1] > grading * ustar) {
        edges[ne] = edges[ne - 1] / 4;
        ++ne;
      }
    }
    edges[ne++] = 0;
    for (int e = 0; e + 1 < ne; ++e) {
      const double u0 = edges[e + 1], u1 = edges[e];
      for (std::size_t iu = 0; iu < g.x.size(); ++iu) {
        const double u = u0 + (u1 - u0) * g.x[iu];
        const double wu = g.w[iu] * (u1 - u0) * u * jac;
        for (std::size_t iv = 0; iv < g.x.size(); ++iv) {
          const double v = g.x[iv];
          add_kernel(h, x, p + u * (a + v * ab), wu * g.w[iv], lp + u * (la + v * lab));
        }
      }
    }
  }
}

struct Assembler {
  const Discretization& disc;
  BemQuadrature opt;
  std::vector<Panel> panels;
  std::vector<PointSet> p3, p6, p7, p_touch, p_self;
  quad::Rule1D gauss;

  Assembler(const Discretization& d, const BemQuadrature& o) : disc(d), opt(o) {
    const auto nt = static_cast<std::size_t>(d.num_triangles());
    panels.resize(nt);
    const auto& r3 = quad::triangle_rule(3);
    const auto& r6 = quad::triangle_rule(6);
    const auto& r7 = quad::triangle_rule(7);
    const quad::TriangleRule r_touch = quad::subdivided_rule(opt.touching_outer_levels);
    const quad::TriangleRule r_self = quad::subdivided_rule(opt.coincident_outer_levels);
    gauss = quad::gauss_legendre(opt.duffy_order);
    for (std::size_t t = 0; t < nt; ++t) {
      Panel& p = panels[t];
      for (int k = 0; k < 3; ++k) {
        p.node[k] = d.triangles(static_cast<Eigen::Index>(t), k);
        p.v[k] = d.nodes.row(p.node[k]).transpose();
      }
      const Vec3 c = (p.v[1] - p.v[0]).cross(p.v[2] - p.v[0]);
      p.area = 0.5 * c.norm();
      if (!(p.area > 0)) throw GeometryError("degenerate triangle " + std::to_string(t) + " in BEM assembly");
      p.normal = c / c.norm();
      p.centroid = (p.v[0] + p.v[1] + p.v[2]) / 3;
      p.diameter = std::max({(p.v[1] - p.v[0]).norm(), (p.v[2] - p.v[1]).norm(), (p.v[0] - p.v[2]).norm()});
      p3.push_back(points_on(p, r3));
      p6.push_back(points_on(p, r6));
      p7.push_back(points_on(p, r7));
      p_touch.push_back(points_on(p, r_touch));
      p_self.push_back(points_on(p, r_self));
    }
  }

  bool touching(const Panel& s, const Panel& t) const {
    for (auto a : s.node)
      for (auto b : t.node)
        if (a == b) return true;
    return false;
  }

  static void accumulate(Block& blk, const PointSet& outer, std::size_t q, const Inner& h) {
    for (int a = 0; a < 3; ++a) {
      const double wa = outer.w[q] * outer.phi[q](a);
      for (int b = 0; b < 3; ++b) {
        const auto& m = h[b];
        auto B = blk.block<3, 3>(3 * a, 3 * b);
        B(0, 0) += wa * m[0];
        B(0, 1) += wa * m[1];
        B(0, 2) += wa * m[2];
        B(1, 1) += wa * m[3];
        B(1, 2) += wa * m[4];
        B(2, 2) += wa * m[5];
      }
    }
  }

  static void symmetrize_subblocks(Block& blk) {
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        auto B = blk.block<3, 3>(3 * a, 3 * b);
        B(1, 0) = B(0, 1);
        B(2, 0) = B(0, 2);
        B(2, 1) = B(1, 2);
      }
  }

  Block pair_block(std::size_t s, std::size_t t) const {
    // only the upper triangle of each 3x3 sub-block is accumulated
    Block blk = Block::Zero();
    const Panel& ps = panels[s];
    const Panel& pt = panels[t];
    Inner h;
    const bool self = s == t;
    const bool touch = !self && touching(ps, pt);
    const double ratio = (ps.centroid - pt.centroid).norm() / std::max(ps.diameter, pt.diameter);
    if (self || touch || ratio < opt.near_ratio) {
      const std::vector<PointSet>& rule = self ? p_self : touch ? p_touch : p7;
      for (std::size_t q = 0; q < rule[s].x.size(); ++q) {
        inner_duffy(pt, rule[s].x[q], gauss, opt.grading, h);
        accumulate(blk, rule[s], q, h);
      }
      if (!self) {
        // The outer/inner roles are not symmetric under the quadrature, so both
        // orders are averaged; mirror-symmetric geometries then give
        // mirror-symmetric matrices regardless of triangle numbering.
        Block rev = Block::Zero();
        for (std::size_t q = 0; q < rule[t].x.size(); ++q) {
          inner_duffy(ps, rule[t].x[q], gauss, opt.grading, h);
          accumulate(rev, rule[t], q, h);
        }
        symmetrize_subblocks(rev);
        symmetrize_subblocks(blk);
        return 0.5 * (blk + rev.transpose());
      }
    } else {
      const std::vector<PointSet>& rule = ratio < opt.medium_ratio ? p7 : ratio < opt.mid_ratio ? p6 : p3;
      for (std::size_t q = 0; q < rule[s].x.size(); ++q) {
        inner_regular(rule[t], rule[s].x[q], h);
        accumulate(blk, rule[s], q, h);
      }
    }
    symmetrize_subblocks(blk);
    if (self) blk = (0.5 * (blk + blk.transpose())).eval();
    return blk;
  }
};

}  // namespace

Eigen::MatrixXd assemble_single_layer(const Discretization& disc, const BemOptions& opt) {
  if (!(opt.viscosity > 0)) throw ParameterError("viscosity must be positive");
  const Assembler as(disc, opt.quadrature);
  const auto nt = static_cast<std::size_t>(disc.num_triangles());
  const Eigen::Index n3 = 3 * disc.num_nodes();
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n3, n3);

  // Rows of the upper triangle of the pair table are computed in parallel into
  // per-row buffers, then scattered in a fixed order so the result does not
  // depend on the thread count.
  const std::size_t chunk = std::max<std::size_t>(1, 150000 / std::max<std::size_t>(nt, 1));
  std::vector<std::vector<Block, Eigen::aligned_allocator<Block>>> rows(chunk);
  for (std::size_t s0 = 0; s0 < nt; s0 += chunk) {
    const std::size_t s1 = std::min(nt, s0 + chunk);
#pragma omp parallel for schedule(dynamic, 1)
    for (long long si = static_cast<long long>(s0); si < static_cast<long long>(s1); ++si) {
      const auto s = static_cast<std::size_t>(si);
      auto& buf = rows[s - s0];
      buf.resize(nt - s);
      for (std::size_t t = s; t < nt; ++t) buf[t - s] = as.pair_block(s, t);
    }
    for (std::size_t s = s0; s < s1; ++s) {
      const auto& buf = rows[s - s0];
      const Panel& ps = as.panels[s];
      for (std::size_t t = s; t < nt; ++t) {
        const Block& blk = buf[t - s];
        const Panel& pt = as.panels[t];
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) {
            const Eigen::Index ra = 3 * ps.node[a], cb = 3 * pt.node[b];
            G.block<3, 3>(ra, cb) += blk.block<3, 3>(3 * a, 3 * b);
            if (t != s) G.block<3, 3>(cb, ra) += blk.block<3, 3>(3 * a, 3 * b).transpose();
          }
      }
    }
  }
  G *= 1.0 / (8 * kPi * opt.viscosity);
  return G;
}

BlockSystem assemble(std::vector<SurfaceMesh> bodies, const Vec3& center, const std::vector<Drive>& drives,
                     double omega, const BemOptions& opt) {
  for (const auto& b : bodies) check_mesh(b);
  if (opt.check_overlap) check_no_overlap(bodies);
  BlockSystem sys{Discretization(std::move(bodies)), {}, {}, center, drives, omega, opt};
  const Discretization& d = sys.disc;
  for (const auto& dr : drives)
    if (dr.body < 0 || dr.body >= static_cast<int>(d.bodies.size()))
      throw ParameterError("drive refers to a missing body");
  const Eigen::Index N = d.num_nodes(), n3 = 3 * N;
  sys.matrix = Eigen::MatrixXd::Zero(n3 + 6, n3 + 6);
  sys.matrix.topLeftCorner(n3, n3) = assemble_single_layer(d, opt);
  const Eigen::MatrixX3d r = d.moments(center);
  for (Eigen::Index l = 0; l < N; ++l) {
    const Vec3 rl = r.row(l).transpose();
    for (int i = 0; i < 3; ++i) {
      sys.matrix(n3 + i, 3 * l + i) = d.node_mass(l);
      sys.matrix(3 * l + i, n3 + i) = d.node_mass(l);
      const Vec3 k = Vec3::Unit(i).cross(rl);
      for (int j = 0; j < 3; ++j) {
        sys.matrix(n3 + 3 + i, 3 * l + j) = k(j);
        sys.matrix(3 * l + j, n3 + 3 + i) = k(j);
      }
    }
  }
  sys.rhs = Eigen::VectorXd::Zero(n3 + 6);
  for (const auto& dr : drives) {
    const Eigen::MatrixX3d rf = d.moments(dr.origin, dr.body);
    const Vec3 w = omega * dr.axis.normalized();
    for (Eigen::Index l = d.node_offset[static_cast<std::size_t>(dr.body)];
         l < d.node_offset[static_cast<std::size_t>(dr.body) + 1]; ++l)
      sys.rhs.segment<3>(3 * l) += rf.row(l).transpose().cross(w);
  }
  return sys;
}

namespace {

std::string mesh_summary(const Discretization& d) {
  std::ostringstream os;
  os << d.num_nodes() << " nodes, " << d.num_triangles() << " triangles in " << d.bodies.size() << " bodies";
  for (const auto& b : d.bodies) {
    const MeshStats s = mesh_stats(b);
    os << "; " << b.tag.name() << ": min area " << s.min_area << ", max edge " << s.max_edge;
  }
  return os.str();
}

void totals(const Discretization& d, const Eigen::MatrixX3d& f, const Vec3& center, Vec3& force, Vec3& torque,
            double& l1) {
  const Eigen::MatrixX3d r = d.moments(center);
  force.setZero();
  torque.setZero();
  l1 = 0;
  for (Eigen::Index l = 0; l < d.num_nodes(); ++l) {
    const Vec3 fl = f.row(l).transpose();
    force += d.node_mass(l) * fl;
    torque += r.row(l).transpose().cross(fl);
    l1 += d.node_mass(l) * fl.cwiseAbs().sum();
  }
}

}  // namespace

MobilitySolution solve_mobility(const BlockSystem& sys) {
  const Eigen::Index n = sys.size(), N = sys.num_nodes();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys.matrix);
  MobilitySolution sol;
  sol.rcond = lu.rcond();
  if (!(sol.rcond * sys.options.max_condition >= 1))
    throw SolverError("mobility system is singular or ill-conditioned (rcond " + std::to_string(sol.rcond) +
                      "); " + mesh_summary(sys.disc));
  Eigen::VectorXd x = lu.solve(sys.rhs);
  const double bnorm = sys.rhs.norm();
  if (bnorm > 0) {
    Eigen::VectorXd res = sys.rhs - sys.matrix * x;
    x += lu.solve(res);  // one step of iterative refinement
    res = sys.rhs - sys.matrix * x;
    sol.residual = res.norm() / bnorm;
  }
  sol.traction = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>>(x.data(), N, 3);
  sol.U = x.segment<3>(3 * N);
  sol.Omega = x.segment<3>(3 * N + 3);
  totals(sys.disc, sol.traction, sys.center, sol.net_force, sol.net_torque, sol.traction_l1);
  sol.power = power_dissipated(sys.disc, sol.traction, sys.drives, sys.omega);
  if (!x.allFinite()) throw SolverError("mobility solve produced non-finite values; " + mesh_summary(sys.disc));
  (void)n;
  return sol;
}

double power_dissipated(const Discretization& disc, const Eigen::MatrixX3d& traction, const std::vector<Drive>& drives,
                        double omega) {
  double p = 0;
  for (const auto& dr : drives) {
    const Eigen::MatrixX3d rf = disc.moments(dr.origin, dr.body);
    Vec3 m = Vec3::Zero();
    for (Eigen::Index l = disc.node_offset[static_cast<std::size_t>(dr.body)];
         l < disc.node_offset[static_cast<std::size_t>(dr.body) + 1]; ++l)
      m += traction.row(l).transpose().cross(rf.row(l).transpose());
    p += -omega * dr.axis.normalized().dot(m);
  }
  return p;
}

namespace {

// One factorization of the single-layer matrix for any number of rigid motions.
struct RigidSolver {
  Discretization d;
  Eigen::MatrixXd G;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  Eigen::MatrixX3d r;
  double rcond = 0;

  RigidSolver(const SurfaceMesh& mesh, const Vec3& center, const BemOptions& opt) : d({mesh}) {
    check_mesh(mesh);
    G = assemble_single_layer(d, opt);
    lu.compute(G);
    rcond = lu.rcond();
    if (!(rcond * opt.max_condition >= 1))
      throw SolverError("resistance system is ill-conditioned (rcond " + std::to_string(rcond) + "); " +
                        mesh_summary(d));
    r = d.moments(center);
  }

  ResistanceResult solve(const Vec3& U, const Vec3& Omega, const Vec3& center) const {
    const Eigen::Index N = d.num_nodes();
    Eigen::VectorXd g(3 * N);
    for (Eigen::Index l = 0; l < N; ++l)
      g.segment<3>(3 * l) = d.node_mass(l) * U + Omega.cross(r.row(l).transpose());
    // the body velocity equals -integral G f, hence G f = -g
    Eigen::VectorXd f = lu.solve(-g);
    f += lu.solve(-g - G * f);
    ResistanceResult out;
    out.rcond = rcond;
    out.residual = (G * f + g).norm() / std::max(g.norm(), 1e-300);
    out.traction = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>>(f.data(), N, 3);
    double l1 = 0;
    totals(d, out.traction, center, out.force, out.torque, l1);
    return out;
  }
};

}  // namespace

ResistanceResult solve_resistance(const SurfaceMesh& mesh, const Vec3& U, const Vec3& Omega, const Vec3& center,
                                  const BemOptions& opt) {
  return RigidSolver(mesh, center, opt).solve(U, Omega, center);
}

ResistanceMatrix resistance_matrix(const SurfaceMesh& mesh, const Vec3& center, const BemOptions& opt) {
  const RigidSolver solver(mesh, center, opt);
  ResistanceMatrix out;
  out.rcond = solver.rcond;
  for (int k = 0; k < 6; ++k) {
    Vec3 U = Vec3::Zero(), W = Vec3::Zero();
    (k < 3 ? U : W)(k % 3) = 1;
    const ResistanceResult r = solver.solve(U, W, center);
    out.matrix.col(k) << r.force, r.torque;
    out.max_residual = std::max(out.max_residual, r.residual);
  }
  return out;
}

std::vector<FieldSample> velocity_field(const Discretization& disc, const Eigen::MatrixX3d& traction,
                                        const std::vector<Vec3>& points, double viscosity) {
  const auto& far = quad::triangle_rule(7);
  const quad::TriangleRule near = quad::subdivided_rule(2);
  double mean_edge = 0;
  for (const auto& b : disc.bodies) mean_edge += mesh_stats(b).mean_edge;
  mean_edge /= static_cast<double>(disc.bodies.size());
  std::vector<FieldSample> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec3& y = points[i];
    Vec3 u = Vec3::Zero();
    double dmin = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < disc.num_triangles(); ++t) {
      std::array<Vec3, 3> v;
      std::array<Vec3, 3> f;
      for (int k = 0; k < 3; ++k) {
        v[k] = disc.nodes.row(disc.triangles(t, k)).transpose();
        f[k] = traction.row(disc.triangles(t, k)).transpose();
      }
      const double area = 0.5 * (v[1] - v[0]).cross(v[2] - v[0]).norm();
      const Vec3 c = (v[0] + v[1] + v[2]) / 3;
      const double diam = std::max({(v[1] - v[0]).norm(), (v[2] - v[1]).norm(), (v[0] - v[2]).norm()});
      const double dist = (y - c).norm();
      dmin = std::min({dmin, (y - v[0]).norm(), (y - v[1]).norm(), (y - v[2]).norm(), dist});
      const quad::TriangleRule& rule = dist < 3 * diam ? near : far;
      for (std::size_t q = 0; q < rule.w.size(); ++q) {
        const Vec3& b = rule.bary[q];
        const Vec3 x = b(0) * v[0] + b(1) * v[1] + b(2) * v[2];
        const Vec3 fx = b(0) * f[0] + b(1) * f[1] + b(2) * f[2];
        const Vec3 d = x - y;
        const double r2 = d.squaredNorm();
        if (!(r2 > 0)) continue;
        const double r = std::sqrt(r2);
        u += rule.w[q] * area * (fx / r + d * (d.dot(fx)) / (r2 * r));
      }
    }
    out[i].velocity = -u / (8 * kPi * viscosity);
    out[i].near_surface = dmin < mean_edge;
  }
  return out;
}

}  // namespace swimopt
