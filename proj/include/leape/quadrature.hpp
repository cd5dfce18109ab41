#pragma once

#include <vector>

namespace leape {

// One-dimensional quadrature rule: sum_i weights[i] * f(nodes[i]).
struct Quadrature1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule with n nodes on [-1, 1] (exact for polynomials of
// degree <= 2n-1).  Nodes found by Newton iteration on P_n; deterministic.
Quadrature1D gauss_legendre(int n);

// The same rule mapped to [a, b].
Quadrature1D gauss_legendre(int n, double a, double b);

}  // namespace leape
