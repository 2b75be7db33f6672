#pragma once

#include <cstddef>
#include <span>
#include <variant>

#include <Eigen/Dense>

namespace proxsgd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Norm used on the node difference of an edge term.
enum class EdgeNorm { L2, L1 };

struct ZeroFunction {};

/// lambda * ||x - center||_1; an empty center means the origin.
struct L1Norm {
  double lambda;
  Vector center;
};

/// Indicator of {x : lo <= x <= hi}. Infinite bounds are allowed.
struct BoxProjection {
  Vector lo;
  Vector hi;
};

/// Indicator of the closed Euclidean ball.
struct BallProjection {
  Vector center;
  double radius;
};

/// weight * ||x_i - x_j||_p where x_i is the i-th block of size block_dim.
struct EdgeDiff {
  std::size_t i;
  std::size_t j;
  double weight;
  std::size_t block_dim;
  EdgeNorm norm = EdgeNorm::L2;
};

/// A closed convex function g with a closed-form proximal map.
///
/// Construct through the named factories; they validate the parameters
/// and throw std::invalid_argument on violation.
class ProxOperator {
 public:
  using Kind =
      std::variant<ZeroFunction, L1Norm, BoxProjection, BallProjection, EdgeDiff>;

  static ProxOperator zero();
  static ProxOperator l1(double lambda, Vector center = {});
  static ProxOperator box(Vector lo, Vector hi);
  static ProxOperator ball(Vector center, double radius);
  static ProxOperator edge_diff(std::size_t i, std::size_t j, double weight,
                                std::size_t block_dim,
                                EdgeNorm norm = EdgeNorm::L2);

  const Kind& kind() const { return kind_; }
  bool is_indicator() const;
  const char* name() const;

  /// Lipschitz constant of g on R^dim; +inf for indicators.
  double lipschitz(std::size_t dim) const;

 private:
  explicit ProxOperator(Kind kind) : kind_(std::move(kind)) {}
  Kind kind_;
};

/// Returns argmin_z g(z) + 1/(2 step) ||v - z||^2.
Vector prox(const ProxOperator& op, const Vector& v, double step);

/// In-place variant used by the iterative solvers. Skips the finiteness scan.
void prox_inplace(const ProxOperator& op, Vector& v, double step);

/// g(x); +inf for indicator kinds outside their set. Ball membership allows a
/// 1e-12 relative slack so projected points count as inside.
double eval_g(const ProxOperator& op, const Vector& x);

/// Checks <x - p, v - p> <= step (g(x) - g(p)) for every probe x, where p is
/// prox(op, v, step). Probes with g(x) = +inf pass vacuously.
bool check_prox_optimality(const ProxOperator& op, const Vector& v, double step,
                           std::span<const Vector> probes);

/// Same inequality against an arbitrary candidate point instead of the
/// computed prox. Lets tests confirm the check rejects wrong outputs.
bool check_prox_optimality_at(const ProxOperator& op, const Vector& v,
                              double step, const Vector& candidate,
                              std::span<const Vector> probes);

inline constexpr double kProxOptimalityTolerance = 1e-9;

}  // namespace proxsgd
