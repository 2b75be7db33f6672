#pragma once

#include <string>

#include "proxsgd/oracles.hpp"
#include "proxsgd/regularizers.hpp"

namespace proxsgd {

/// min_x h(x) = f(x) + g(x) with f a finite-sum oracle and g = sum_j g_j.
/// A single-component regularizer doubles as the monolithic prox of g.
struct ProblemInstance {
  SmoothOracle oracle;
  DecomposableRegularizer regularizer;
  Vector x0;
  std::string name;

  ProblemInstance(SmoothOracle f, DecomposableRegularizer g, Vector start, std::string label = {});

  std::size_t dim() const { return oracle.dim(); }
  double objective(const Vector& x) const;
  bool has_monolithic_prox() const { return regularizer.size() == 1; }

  /// Throws std::logic_error when g has more than one component.
  const ProxOperator& monolithic_prox() const;
};

/// Reference solution data used by the bounds and gap computations.
struct SolutionCertificate {
  Vector x_star;
  double h_star = 0.0;
  double sigma_star_sq = 0.0;  // (1/N) sum_i ||grad f_i(x_star)||^2
  double d_star_sq = 0.0;      // ||x_star - x0||^2
  double solver_tolerance = 0.0;
  std::size_t solver_iterations = 0;
  std::string solver;  // "fista" or "admm"
};

}  // namespace proxsgd
