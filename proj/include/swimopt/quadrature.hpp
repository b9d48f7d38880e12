#pragma once

#include "swimopt/core.hpp"

#include <functional>
#include <vector>

namespace swimopt::quad {

struct Rule1D {
  std::vector<double> x, w;  // nodes and weights on [0, 1]
};

/// n-point Gauss-Legendre rule on [0, 1] (Newton iteration on P_n).
Rule1D gauss_legendre(int n);

/// Symmetric triangle rule in barycentric coordinates. Weights sum to 1, so
/// an integral is area * sum(w * f).
struct TriangleRule {
  std::vector<Eigen::Vector3d> bary;
  std::vector<double> w;
  int degree = 0;
};

/// Dunavant rules of 1, 3, 6, 7 or 12 points (degree 1, 2, 4, 5, 6).
const TriangleRule& triangle_rule(int points);

/// The 7-point rule applied on each of the 4^levels congruent subtriangles.
TriangleRule subdivided_rule(int levels);

/// Adaptive Gauss-Legendre integration of a smooth scalar function on [a, b].
double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-13,
                          int max_depth = 40);

}  // namespace swimopt::quad
