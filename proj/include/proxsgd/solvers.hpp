#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "proxsgd/problem.hpp"

namespace proxsgd {

/// tau = 1 / (C L T^beta), C > 2. Gives tau L < 1/2.
struct HorizonSpgdStep {
  double C = 3.0;
  double beta = 0.5;
};

/// tau = 1 / (C L T^beta), C > 4. Gives tau L < 1/4.
struct HorizonRipmStep {
  double C = 5.0;
  double beta = 0.5;
};

struct FixedStep {
  double tau = 0.0;
};

using StepRule = std::variant<HorizonSpgdStep, HorizonRipmStep, FixedStep>;

struct SolverConfig {
  std::size_t horizon = 1;
  StepRule step_rule = HorizonSpgdStep{};
  std::uint64_t seed = 0;
  /// Gap evaluation every `checkpoint_stride` steps; 0 means final step only.
  std::size_t checkpoint_stride = 0;
  bool record_average = true;
  /// Store the iterate at every checkpoint.
  bool keep_snapshots = false;

  /// Throws std::invalid_argument on a malformed horizon or step rule.
  void validate() const;
};

/// Step size for a smoothness constant L under the configured rule.
double resolve_step(const SolverConfig& config, double L);

std::string describe(const StepRule& rule);

struct TracePoint {
  std::size_t t;
  double gap_last;
  double gap_avg;  // NaN when averages are not recorded
};

struct IterateTrace {
  std::vector<TracePoint> checkpoints;
  std::vector<Vector> snapshots;  // aligned with checkpoints when requested
  Vector last_iterate;
  Vector average_iterate;  // (1/T) sum_{t=1}^T x_t
  double step_size_used = 0.0;
  std::chrono::duration<double> wall_time{};

  double final_gap_last() const { return checkpoints.back().gap_last; }
  double final_gap_avg() const { return checkpoints.back().gap_avg; }
};

/// Raised when an iterate is non-finite or exceeds 1e6 (1 + ||x0||).
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t iteration, double norm);
  std::size_t iteration() const { return iteration_; }
  double norm() const { return norm_; }

 private:
  std::size_t iteration_;
  double norm_;
};

/// Raised by the reference solvers when the iteration cap is hit; carries the
/// best point found.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, Vector best_x, double best_value, double best_residual,
                   std::size_t iterations);
  const Vector& best_x() const { return best_x_; }
  double best_value() const { return best_value_; }
  double best_residual() const { return best_residual_; }
  std::size_t iterations() const { return iterations_; }

 private:
  Vector best_x_;
  double best_value_;
  double best_residual_;
  std::size_t iterations_;
};

/// x_{t+1} = prox_{tau g}(x_t - tau grad f_{i_t}(x_t)) with i_t uniform.
IterateTrace run_spgd(const ProblemInstance& problem, const SolutionCertificate& cert,
                      const SolverConfig& config);

/// SPGD restricted to g being a single indicator (box or ball).
IterateTrace run_proj_sgd(const ProblemInstance& problem, const SolutionCertificate& cert,
                          const SolverConfig& config);

/// x_{t+1} = prox_{tau m g_{j_t}}(x_t - tau grad f_{i_t}(x_t)) with i_t, j_t
/// independent and uniform.
IterateTrace run_ripm(const ProblemInstance& problem, const SolutionCertificate& cert,
                      const SolverConfig& config);

/// Stochastic proximal point on g = sum_j g_j (f = 0):
/// x_{t+1} = prox_{tau m g_{j_t}}(x_t). Gaps are g(x_t) - g_star. Horizon step
/// rules use L = 1 since f carries no curvature scale.
IterateTrace run_spp(const DecomposableRegularizer& reg, const Vector& x0, double g_star,
                     const SolverConfig& config);

/// Full gradient step on a separable f, then every node k samples a component
/// j_k and keeps block k of prox_{m tau g_{j_k}}(y) when it belongs to the
/// component's support, block k of y otherwise. The smoothness constant is
/// that of f itself.
IterateTrace run_blockprox(const ProblemInstance& problem, const SolutionCertificate& cert,
                           const SolverConfig& config);

/// tau = 1/(3L), the horizon-free BlockProx step.
inline FixedStep blockprox_constant_step(double L) { return FixedStep{1.0 / (3.0 * L)}; }

struct ReferenceSolution {
  Vector x;
  double value = 0.0;
  double residual = 0.0;
  std::size_t iterations = 0;
};

/// Accelerated proximal gradient with function-value restart on a monolithic
/// g. Stops when the gradient mapping norm L ||y - prox(y - grad f(y)/L)||
/// falls to tol.
ReferenceSolution run_fista(const ProblemInstance& problem, const Vector& x0, double tol,
                            std::size_t max_iter = 1'000'000);

/// ADMM splitting over the components of g for quadratic f (least squares or
/// separable). Each g_j is written as phi_j(D_j x); stops when the primal and
/// dual residuals, each relative to max(1, its natural scale), are <= tol.
/// Indicator components are rejected.
ReferenceSolution run_admm(const ProblemInstance& problem, const Vector& x0, double tol,
                           std::size_t max_iter = 2'000'000);

/// Runs the matching reference solver and packages h*, sigma*^2, D*^2.
SolutionCertificate certify_solution(const ProblemInstance& problem, const Vector& x0, double tol,
                                     std::size_t max_iter = 2'000'000);

}  // namespace proxsgd
