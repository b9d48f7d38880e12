#include "swimopt/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace swimopt::quad {

Rule1D gauss_legendre(int n) {
  if (n < 1) throw ParameterError("gauss_legendre: n must be >= 1");
  Rule1D r;
  r.x.resize(static_cast<std::size_t>(n));
  r.w.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double p0 = 1, p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (z * p1 - p0) / (z * z - 1);
    // map [-1,1] -> [0,1], ascending
    const auto idx = static_cast<std::size_t>(n - 1 - i);
    r.x[idx] = 0.5 * (1 + z);
    r.w[idx] = 1.0 / ((1 - z * z) * dp * dp);  // = 0.5 * 2/((1-z^2) P'^2)
  }
  return r;
}

namespace {

void add_orbit3(TriangleRule& r, double a, double w) {
  const double b = 1 - 2 * a;
  r.bary.emplace_back(a, a, b);
  r.bary.emplace_back(a, b, a);
  r.bary.emplace_back(b, a, a);
  r.w.insert(r.w.end(), 3, w);
}

void add_orbit6(TriangleRule& r, double a, double b, double w) {
  const double c = 1 - a - b;
  r.bary.emplace_back(a, b, c);
  r.bary.emplace_back(a, c, b);
  r.bary.emplace_back(b, a, c);
  r.bary.emplace_back(b, c, a);
  r.bary.emplace_back(c, a, b);
  r.bary.emplace_back(c, b, a);
  r.w.insert(r.w.end(), 6, w);
}

TriangleRule make_rule(int points) {
  TriangleRule r;
  switch (points) {
    case 1:
      r.degree = 1;
      r.bary.emplace_back(1.0 / 3, 1.0 / 3, 1.0 / 3);
      r.w.push_back(1.0);
      break;
    case 3:
      r.degree = 2;
      add_orbit3(r, 1.0 / 6, 1.0 / 3);
      break;
    case 6:
      r.degree = 4;
      add_orbit3(r, 0.445948490915965, 0.223381589678011);
      add_orbit3(r, 0.091576213509771, 0.109951743655322);
      break;
    case 7:
      r.degree = 5;
      r.bary.emplace_back(1.0 / 3, 1.0 / 3, 1.0 / 3);
      r.w.push_back(0.225);
      add_orbit3(r, 0.470142064105115, 0.132394152788506);
      add_orbit3(r, 0.101286507323456, 0.125939180544827);
      break;
    case 12:
      r.degree = 6;
      add_orbit3(r, 0.249286745170910, 0.116786275726379);
      add_orbit3(r, 0.063089014491502, 0.050844906370207);
      add_orbit6(r, 0.310352451033785, 0.053145049844816, 0.082851075618374);
      break;
    default:
      throw ParameterError("triangle_rule: unsupported point count " + std::to_string(points));
  }
  return r;
}

}  // namespace

const TriangleRule& triangle_rule(int points) {
  static const TriangleRule r1 = make_rule(1), r3 = make_rule(3), r6 = make_rule(6), r7 = make_rule(7),
                            r12 = make_rule(12);
  switch (points) {
    case 1: return r1;
    case 3: return r3;
    case 6: return r6;
    case 7: return r7;
    case 12: return r12;
    default: throw ParameterError("triangle_rule: unsupported point count " + std::to_string(points));
  }
}

TriangleRule subdivided_rule(int levels) {
  // subtriangles in barycentric coordinates of the parent
  std::vector<Eigen::Matrix3d> tris{Eigen::Matrix3d::Identity()};  // columns = corners
  for (int l = 0; l < levels; ++l) {
    std::vector<Eigen::Matrix3d> next;
    next.reserve(tris.size() * 4);
    for (const auto& t : tris) {
      const Eigen::Vector3d a = t.col(0), b = t.col(1), c = t.col(2);
      const Eigen::Vector3d ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
      Eigen::Matrix3d m;
      m << a, ab, ca;
      next.push_back(m);
      m << ab, b, bc;
      next.push_back(m);
      m << ca, bc, c;
      next.push_back(m);
      m << bc, ca, ab;
      next.push_back(m);
    }
    tris = std::move(next);
  }
  const TriangleRule& base = triangle_rule(7);
  TriangleRule r;
  r.degree = base.degree;
  const double scale = 1.0 / static_cast<double>(tris.size());
  for (const auto& t : tris)
    for (std::size_t q = 0; q < base.w.size(); ++q) {
      r.bary.push_back(t * base.bary[q]);
      r.w.push_back(base.w[q] * scale);
    }
  return r;
}

namespace {

double gl_panel(const std::function<double(double)>& f, double a, double b, const Rule1D& rule) {
  double s = 0;
  for (std::size_t i = 0; i < rule.x.size(); ++i) s += rule.w[i] * f(a + (b - a) * rule.x[i]);
  return s * (b - a);
}

double adapt(const std::function<double(double)>& f, double a, double b, double whole, double tol, int depth,
             const Rule1D& rule) {
  const double m = 0.5 * (a + b);
  const double left = gl_panel(f, a, m, rule), right = gl_panel(f, m, b, rule);
  const double both = left + right;
  if (depth <= 0 || std::abs(both - whole) <= tol) return both;
  return adapt(f, a, m, left, 0.5 * tol, depth - 1, rule) + adapt(f, m, b, right, 0.5 * tol, depth - 1, rule);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double rel_tol, int max_depth) {
  static const Rule1D rule = gauss_legendre(10);
  if (a == b) return 0;
  const double whole = gl_panel(f, a, b, rule);
  const double tol = rel_tol * std::max(std::abs(whole), 1e-300);
  return adapt(f, a, b, whole, tol, max_depth, rule);
}

}  // namespace swimopt::quad
