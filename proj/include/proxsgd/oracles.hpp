#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "proxsgd/prox.hpp"

namespace proxsgd {

/// f_i(x) = 1/2 (<a_i, x> - b_i)^2.
struct LeastSquaresData {
  Matrix A;  // N x n, row i is a_i
  Vector b;
};

/// f_i(x) = scale * log(1 + exp(-y_i <a_i, x>)), y_i in {-1, +1}.
struct LogisticData {
  Matrix A;
  Vector y;
  double scale;
};

/// f(x) = sum_k q_k(x_k) with q_k(u) = 1/(2 N_k) ||A_k u - b_k||^2 on the
/// k-th block of size block_dim. Component k of the finite sum is N q_k so
/// the uniform mean over components recovers f.
struct SeparableData {
  std::size_t block_dim;
  std::vector<Matrix> A;
  std::vector<Vector> b;
};

/// A finite-sum smooth term f = (1/N) sum_i f_i with per-component gradients.
/// Immutable after construction.
class SmoothOracle {
 public:
  using Kind = std::variant<LeastSquaresData, LogisticData, SeparableData>;

  static SmoothOracle least_squares(Matrix A, Vector b);
  static SmoothOracle logistic(Matrix A, Vector y, double scale = 1.0);
  static SmoothOracle separable(std::size_t block_dim, std::vector<Matrix> A,
                                std::vector<Vector> b);

  const Kind& kind() const { return kind_; }
  std::size_t num_components() const { return num_components_; }
  std::size_t dim() const { return dim_; }
  bool is_separable() const { return std::holds_alternative<SeparableData>(kind_); }

  double value_component(std::size_t i, const Vector& x) const;
  double value(const Vector& x) const;
  Vector grad_component(std::size_t i, const Vector& x) const;
  Vector full_grad(const Vector& x) const;

  /// out += alpha * grad f_i(x), without allocating for the dense kinds.
  void add_grad_component(std::size_t i, const Vector& x, double alpha, Vector& out) const;

 private:
  SmoothOracle(Kind kind, std::size_t n_components, std::size_t dim);
  void check_index(std::size_t i) const;
  void check_dim(const Vector& x) const;

  Kind kind_;
  Matrix rows_t_;  // n x N copy of A^T for contiguous row access
  std::size_t num_components_;
  std::size_t dim_;
};

/// Componentwise constant: every f_i is L-smooth.
double smoothness_constant(const SmoothOracle& oracle);

/// Smoothness constant of the averaged f (largest Hessian eigenvalue bound).
double full_smoothness_constant(const SmoothOracle& oracle);

/// (1/N) sum_i ||grad f_i(x)||^2.
double second_moment(const SmoothOracle& oracle, const Vector& x);

/// Loads a dense CSV (no header, comma separated); rows are samples and the
/// last column is the target b (least squares) or label y (logistic).
Matrix load_csv_matrix(const std::string& path);
SmoothOracle least_squares_from_csv(const std::string& path);
SmoothOracle logistic_from_csv(const std::string& path, double scale = 1.0);

}  // namespace proxsgd
