#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "proxsgd/problem.hpp"

namespace proxsgd {

/// eps' = (1 - 2 tau L) / (1 + 2 tau L), the choice that makes a = 4 tau L / (1 + 2 tau L).
double default_eps_prime(double tau, double L);

/// a = 2 tau L (1 + eps'). Throws std::invalid_argument unless 0 < a < 1.
double compute_a(double tau, double L, double eps_prime);

/// alpha_{-1} = alpha_0 = 1, alpha_t = (T - t + 2) / (a + T - t + 1) alpha_{t-1};
/// p_0 = 1, p_t = (a + T - t + 1) / (T - t + 2). Stored as log alpha so that
/// long horizons stay finite.
class AlphaSchedule {
 public:
  AlphaSchedule(std::size_t T, double a);

  std::size_t horizon() const { return T_; }
  double a() const { return a_; }

  /// t in [-1, T].
  double log_alpha(std::ptrdiff_t t) const;
  double alpha(std::ptrdiff_t t) const;
  /// t in [0, T].
  double p(std::size_t t) const;

  /// sum_{t=1}^T alpha_t / alpha_T, accumulated from log ratios.
  double tail_sum_ratio() const;

 private:
  std::size_t T_;
  double a_;
  std::vector<double> log_alpha_;  // index t + 1
  std::vector<double> p_;
};

AlphaSchedule build_alpha_schedule(std::size_t T, double a);

struct ZWeights {
  double x_star;
  std::vector<double> iterates;  // weight on x_0 .. x_t
};

/// Convex weights of z_t = sum_s (alpha_s - alpha_{s-1}) / alpha_t x_s + x* / alpha_t.
ZWeights z_weights(const AlphaSchedule& schedule, std::size_t t);

struct BoundInputs {
  std::size_t T = 1;
  double C = 3.0;
  double beta = 0.5;
  double L = 1.0;
  double d_star_sq = 0.0;
  double sigma_star_sq = 0.0;
  double initial_gap = 0.0;
  double m = 0.0;    // number of regularizer components (RIPM only)
  double L_g = 0.0;  // per-component Lipschitz constant (RIPM only)
};

struct TheoryTerms {
  double distance = 0.0;
  double initial_gap = 0.0;
  double variance = 0.0;
  double variance_log = 0.0;
  double prox_noise = 0.0;
  double prox_noise_log = 0.0;
};

/// Each term already includes the factor A.
struct TheoryBound {
  double total = 0.0;
  TheoryTerms terms;
  double A_const = 0.0;
  double v = 0.0;  // (1 + 1/eps') sigma*^2 tau at tau = 1/(C L T^beta)
};

/// A = exp(4 / (e beta C)), the uniform cap on T^a for tau = 1/(C L T^beta).
double horizon_constant(double C, double beta);

/// A [C L D^2 / T^{1-beta} + 2 gap0 / T + 4 s^2 / ((C-2) L T^{1+beta})
///    + 16 s^2 ln(T+1) / ((C-2) L T^beta)]. Requires C > 2, beta > 0.
TheoryBound bound_spgd(const BoundInputs& in);

/// bound_spgd terms plus A [16 m^2 Lg^2 / (C L T^{1+beta})
///    + 64 m^2 Lg^2 ln(T+1) / (C L T^beta)]. Requires C > 4.
TheoryBound bound_ripm(const BoundInputs& in);

/// 9/sqrt(T) [L D^2 + gap0/sqrt(T) + s^2/L (1/T + 4 ln(T+1))].
TheoryBound bound_spgd_simplified(const BoundInputs& in);

/// 10/sqrt(T) [L D^2 + gap0/sqrt(T) + (s^2 + 4 m^2 Lg^2)/L (1/T + 4 ln(T+1))].
TheoryBound bound_ripm_simplified(const BoundInputs& in);

struct InequalityReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // rhs - lhs
  bool pass = false;
};

/// E_i ||grad f_i(x)||^2 <= 2 L (1 + eps) (h(x) - h*) + (1 + 1/eps) sigma*^2,
/// with the expectation computed exactly. Passes within 1e-8 (1 + |rhs|).
InequalityReport check_variance_transfer(const ProblemInstance& problem,
                                         const SolutionCertificate& cert, const Vector& x,
                                         double eps);

inline constexpr double kVarianceTransferTolerance = 1e-8;

/// Largest N m for which the descent expectation is enumerated exactly.
inline constexpr std::size_t kExactEnumerationLimit = 10'000;

struct DescentOptions {
  double tau = 0.0;
  double eps_prime = 0.0;  // 0 selects default_eps_prime
  /// Incremental prox variant: x+ = prox_{tau m g_j}(x - tau grad f_i(x)) with
  /// the extra 8 tau m^2 L_g^2 on the right.
  bool incremental = false;
  std::size_t resamples = 10'000;  // Monte Carlo draws when enumeration is too large
  std::uint64_t seed = 0;
};

struct DescentReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  double standard_error = 0.0;  // 0 in exact mode
  bool exact = true;
  bool pass = false;
};

/// E_t[h(x+) - h(z) - a h(x) + a h*] <= (1/(2 tau)) E_t[||x - z||^2 - ||x+ - z||^2] + v
/// (+ 8 tau m^2 L_g^2 in the incremental variant). L is the componentwise
/// smoothness constant. Exact mode passes when lhs <= rhs + 1e-9 (1 + |rhs|);
/// Monte Carlo mode when the mean difference is within 3 standard errors.
DescentReport check_descent(const ProblemInstance& problem, const SolutionCertificate& cert,
                            const Vector& x, const Vector& z, const DescentOptions& options);

inline constexpr double kDescentTolerance = 1e-9;

}  // namespace proxsgd
