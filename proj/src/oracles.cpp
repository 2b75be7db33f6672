#include "proxsgd/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace proxsgd {

namespace {

// log(1 + exp(z)) without overflow.
double log1p_exp(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

// 1 / (1 + exp(-z))
double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double max_eigenvalue(const Matrix& sym) {
  if (sym.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return std::max(0.0, es.eigenvalues().maxCoeff());
}

}  // namespace

SmoothOracle::SmoothOracle(Kind kind, std::size_t n_components, std::size_t dim)
    : kind_(std::move(kind)), num_components_(n_components), dim_(dim) {
  if (num_components_ == 0) throw std::invalid_argument("oracle: no components");
  if (dim_ == 0) throw std::invalid_argument("oracle: zero dimension");
}

SmoothOracle SmoothOracle::least_squares(Matrix A, Vector b) {
  if (A.rows() != b.size()) throw std::invalid_argument("least_squares: A and b disagree in rows");
  if (!A.allFinite() || !b.allFinite()) throw std::invalid_argument("least_squares: non-finite data");
  const auto N = static_cast<std::size_t>(A.rows());
  const auto n = static_cast<std::size_t>(A.cols());
  SmoothOracle o(LeastSquaresData{std::move(A), std::move(b)}, N, n);
  o.rows_t_ = std::get<LeastSquaresData>(o.kind_).A.transpose();
  return o;
}

SmoothOracle SmoothOracle::logistic(Matrix A, Vector y, double scale) {
  if (A.rows() != y.size()) throw std::invalid_argument("logistic: A and y disagree in rows");
  if (!(scale > 0.0)) throw std::invalid_argument("logistic: scale must be positive");
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] != 1.0 && y[i] != -1.0) throw std::invalid_argument("logistic: labels must be +1 or -1");
  }
  const auto N = static_cast<std::size_t>(A.rows());
  const auto n = static_cast<std::size_t>(A.cols());
  SmoothOracle o(LogisticData{std::move(A), std::move(y), scale}, N, n);
  o.rows_t_ = std::get<LogisticData>(o.kind_).A.transpose();
  return o;
}

SmoothOracle SmoothOracle::separable(std::size_t block_dim, std::vector<Matrix> A,
                                     std::vector<Vector> b) {
  if (block_dim == 0) throw std::invalid_argument("separable: block_dim must be positive");
  if (A.size() != b.size()) throw std::invalid_argument("separable: block count mismatch");
  for (std::size_t k = 0; k < A.size(); ++k) {
    if (A[k].cols() != static_cast<Eigen::Index>(block_dim) || A[k].rows() != b[k].size() ||
        A[k].rows() == 0) {
      throw std::invalid_argument("separable: malformed block " + std::to_string(k));
    }
  }
  const std::size_t nodes = A.size();
  return SmoothOracle(SeparableData{block_dim, std::move(A), std::move(b)}, nodes,
                      nodes * block_dim);
}

void SmoothOracle::check_index(std::size_t i) const {
  if (i >= num_components_) {
    throw std::out_of_range("oracle: component index " + std::to_string(i) + " out of range");
  }
}

void SmoothOracle::check_dim(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != dim_) {
    throw std::invalid_argument("oracle: point has wrong dimension");
  }
}

double SmoothOracle::value_component(std::size_t i, const Vector& x) const {
  check_index(i);
  check_dim(x);
  const auto col = static_cast<Eigen::Index>(i);
  if (const auto* ls = std::get_if<LeastSquaresData>(&kind_)) {
    const double r = rows_t_.col(col).dot(x) - ls->b[col];
    return 0.5 * r * r;
  }
  if (const auto* lg = std::get_if<LogisticData>(&kind_)) {
    return lg->scale * log1p_exp(-lg->y[col] * rows_t_.col(col).dot(x));
  }
  const auto& sep = std::get<SeparableData>(kind_);
  const auto d = static_cast<Eigen::Index>(sep.block_dim);
  const Vector r = sep.A[i] * x.segment(col * d, d) - sep.b[i];
  return double(num_components_) * r.squaredNorm() / (2.0 * double(sep.A[i].rows()));
}

double SmoothOracle::value(const Vector& x) const {
  check_dim(x);
  if (const auto* ls = std::get_if<LeastSquaresData>(&kind_)) {
    return 0.5 * (ls->A * x - ls->b).squaredNorm() / double(num_components_);
  }
  if (const auto* lg = std::get_if<LogisticData>(&kind_)) {
    const Vector margins = lg->A * x;
    double total = 0.0;
    for (Eigen::Index i = 0; i < margins.size(); ++i) total += log1p_exp(-lg->y[i] * margins[i]);
    return lg->scale * total / double(num_components_);
  }
  const auto& sep = std::get<SeparableData>(kind_);
  const auto d = static_cast<Eigen::Index>(sep.block_dim);
  double total = 0.0;
  for (std::size_t k = 0; k < sep.A.size(); ++k) {
    const Vector r = sep.A[k] * x.segment(static_cast<Eigen::Index>(k) * d, d) - sep.b[k];
    total += r.squaredNorm() / (2.0 * double(sep.A[k].rows()));
  }
  return total;
}

void SmoothOracle::add_grad_component(std::size_t i, const Vector& x, double alpha,
                                      Vector& out) const {
  const auto col = static_cast<Eigen::Index>(i);
  if (const auto* ls = std::get_if<LeastSquaresData>(&kind_)) {
    const double r = rows_t_.col(col).dot(x) - ls->b[col];
    out.noalias() += (alpha * r) * rows_t_.col(col);
    return;
  }
  if (const auto* lg = std::get_if<LogisticData>(&kind_)) {
    const double yi = lg->y[col];
    const double coef = -lg->scale * yi * sigmoid(-yi * rows_t_.col(col).dot(x));
    out.noalias() += (alpha * coef) * rows_t_.col(col);
    return;
  }
  const auto& sep = std::get<SeparableData>(kind_);
  const auto d = static_cast<Eigen::Index>(sep.block_dim);
  const Vector r = sep.A[i] * x.segment(col * d, d) - sep.b[i];
  const double w = alpha * double(num_components_) / double(sep.A[i].rows());
  out.segment(col * d, d).noalias() += w * (sep.A[i].transpose() * r);
}

Vector SmoothOracle::grad_component(std::size_t i, const Vector& x) const {
  check_index(i);
  check_dim(x);
  Vector g = Vector::Zero(x.size());
  add_grad_component(i, x, 1.0, g);
  return g;
}

Vector SmoothOracle::full_grad(const Vector& x) const {
  check_dim(x);
  if (const auto* ls = std::get_if<LeastSquaresData>(&kind_)) {
    return ls->A.transpose() * (ls->A * x - ls->b) / double(num_components_);
  }
  if (std::holds_alternative<LogisticData>(kind_)) {
    Vector g = Vector::Zero(x.size());
    for (std::size_t i = 0; i < num_components_; ++i) add_grad_component(i, x, 1.0, g);
    return g / double(num_components_);
  }
  const auto& sep = std::get<SeparableData>(kind_);
  const auto d = static_cast<Eigen::Index>(sep.block_dim);
  Vector g(x.size());
  for (std::size_t k = 0; k < sep.A.size(); ++k) {
    const auto off = static_cast<Eigen::Index>(k) * d;
    g.segment(off, d) =
        sep.A[k].transpose() * (sep.A[k] * x.segment(off, d) - sep.b[k]) / double(sep.A[k].rows());
  }
  return g;
}

double smoothness_constant(const SmoothOracle& oracle) {
  if (const auto* ls = std::get_if<LeastSquaresData>(&oracle.kind())) {
    return ls->A.rowwise().squaredNorm().maxCoeff();
  }
  if (const auto* lg = std::get_if<LogisticData>(&oracle.kind())) {
    return lg->scale * lg->A.rowwise().squaredNorm().maxCoeff() / 4.0;
  }
  const auto& sep = std::get<SeparableData>(oracle.kind());
  double best = 0.0;
  for (const Matrix& Ak : sep.A) {
    best = std::max(best, max_eigenvalue(Ak.transpose() * Ak) / double(Ak.rows()));
  }
  return double(oracle.num_components()) * best;
}

double full_smoothness_constant(const SmoothOracle& oracle) {
  const double N = double(oracle.num_components());
  if (const auto* ls = std::get_if<LeastSquaresData>(&oracle.kind())) {
    return max_eigenvalue(ls->A.transpose() * ls->A) / N;
  }
  if (const auto* lg = std::get_if<LogisticData>(&oracle.kind())) {
    return lg->scale * max_eigenvalue(lg->A.transpose() * lg->A) / (4.0 * N);
  }
  return smoothness_constant(oracle) / N;
}

double second_moment(const SmoothOracle& oracle, const Vector& x) {
  double total = 0.0;
  for (std::size_t i = 0; i < oracle.num_components(); ++i) {
    total += oracle.grad_component(i, x).squaredNorm();
  }
  return total / double(oracle.num_components());
}

Matrix load_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": ragged row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().size() < 2) {
    throw std::runtime_error(path + ": need at least one row with two columns");
  }
  Matrix M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return M;
}

SmoothOracle least_squares_from_csv(const std::string& path) {
  const Matrix M = load_csv_matrix(path);
  const auto n = M.cols() - 1;
  return SmoothOracle::least_squares(M.leftCols(n), M.col(n));
}

SmoothOracle logistic_from_csv(const std::string& path, double scale) {
  const Matrix M = load_csv_matrix(path);
  const auto n = M.cols() - 1;
  return SmoothOracle::logistic(M.leftCols(n), M.col(n), scale);
}

}  // namespace proxsgd
