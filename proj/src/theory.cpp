#include "proxsgd/theory.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "proxsgd/rng.hpp"

namespace proxsgd {

double default_eps_prime(double tau, double L) {
  if (!(tau > 0.0) || !(L > 0.0)) throw std::invalid_argument("eps': tau and L must be positive");
  const double tl = tau * L;
  if (!(tl < 0.5)) throw std::invalid_argument("eps': default choice needs tau L < 1/2");
  return (1.0 - 2.0 * tl) / (1.0 + 2.0 * tl);
}

double compute_a(double tau, double L, double eps_prime) {
  if (!(tau > 0.0) || !(L > 0.0) || !(eps_prime > 0.0)) {
    throw std::invalid_argument("compute_a: tau, L and eps' must be positive");
  }
  const double a = 2.0 * tau * L * (1.0 + eps_prime);
  if (!(a < 1.0)) throw std::invalid_argument("compute_a: a = " + std::to_string(a) + " is not below 1");
  return a;
}

AlphaSchedule::AlphaSchedule(std::size_t T, double a) : T_(T), a_(a) {
  if (T == 0) throw std::invalid_argument("alpha schedule: T must be positive");
  if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("alpha schedule: a must lie in (0, 1)");
  log_alpha_.assign(T + 2, 0.0);
  p_.assign(T + 1, 1.0);
  const double Td = double(T);
  for (std::size_t t = 1; t <= T; ++t) {
    const double num = Td - double(t) + 2.0;
    const double den = a + Td - double(t) + 1.0;
    p_[t] = den / num;
    log_alpha_[t + 1] = log_alpha_[t] + std::log(num) - std::log(den);
  }
}

double AlphaSchedule::log_alpha(std::ptrdiff_t t) const {
  if (t < -1 || t > static_cast<std::ptrdiff_t>(T_)) throw std::out_of_range("alpha: index out of range");
  return log_alpha_[static_cast<std::size_t>(t + 1)];
}

double AlphaSchedule::alpha(std::ptrdiff_t t) const { return std::exp(log_alpha(t)); }

double AlphaSchedule::p(std::size_t t) const {
  if (t > T_) throw std::out_of_range("p: index out of range");
  return p_[t];
}

double AlphaSchedule::tail_sum_ratio() const {
  const double last = log_alpha_.back();
  double sum = 0.0;
  for (std::size_t t = 1; t <= T_; ++t) sum += std::exp(log_alpha_[t + 1] - last);
  return sum;
}

AlphaSchedule build_alpha_schedule(std::size_t T, double a) { return AlphaSchedule(T, a); }

ZWeights z_weights(const AlphaSchedule& schedule, std::size_t t) {
  if (t > schedule.horizon()) throw std::out_of_range("z_weights: t exceeds the horizon");
  const auto tt = static_cast<std::ptrdiff_t>(t);
  const double la_t = schedule.log_alpha(tt);
  ZWeights w;
  w.x_star = std::exp(-la_t);
  w.iterates.resize(t + 1);
  for (std::ptrdiff_t s = 0; s <= tt; ++s) {
    // (alpha_s - alpha_{s-1}) / alpha_t = exp(la_s - la_t) (1 - p_s)
    w.iterates[static_cast<std::size_t>(s)] =
        std::exp(schedule.log_alpha(s) - la_t) * (1.0 - schedule.p(static_cast<std::size_t>(s)));
  }
  return w;
}

double horizon_constant(double C, double beta) {
  if (!(C > 0.0) || !(beta > 0.0)) throw std::invalid_argument("horizon constant: C and beta must be positive");
  return std::exp(4.0 / (std::numbers::e * beta * C));
}

namespace {

void check_inputs(const BoundInputs& in) {
  if (in.T == 0) throw std::invalid_argument("bound: T must be positive");
  if (!(in.beta > 0.0)) throw std::invalid_argument("bound: beta must be positive");
  if (!(in.L > 0.0)) throw std::invalid_argument("bound: L must be positive");
  if (in.d_star_sq < 0.0 || in.sigma_star_sq < 0.0 || in.initial_gap < 0.0 || in.m < 0.0 ||
      in.L_g < 0.0) {
    throw std::invalid_argument("bound: distances, variances and gaps must be nonnegative");
  }
}

double sum_terms(const TheoryTerms& t) {
  return t.distance + t.initial_gap + t.variance + t.variance_log + t.prox_noise + t.prox_noise_log;
}

}  // namespace

TheoryBound bound_spgd(const BoundInputs& in) {
  check_inputs(in);
  if (!(in.C > 2.0)) throw std::invalid_argument("bound_spgd: C must exceed 2");
  const double T = double(in.T);
  const double A = horizon_constant(in.C, in.beta);
  const double Tb = std::pow(T, in.beta);
  const double logT = std::log(T + 1.0);

  TheoryBound b;
  b.A_const = A;
  b.terms.distance = A * in.C * in.L * in.d_star_sq / std::pow(T, 1.0 - in.beta);
  b.terms.initial_gap = A * 2.0 * in.initial_gap / T;
  b.terms.variance = A * 4.0 * in.sigma_star_sq / ((in.C - 2.0) * in.L * T * Tb);
  b.terms.variance_log = A * 16.0 * in.sigma_star_sq * logT / ((in.C - 2.0) * in.L * Tb);
  b.total = sum_terms(b.terms);

  const double tau = 1.0 / (in.C * in.L * Tb);
  b.v = (1.0 + 1.0 / default_eps_prime(tau, in.L)) * in.sigma_star_sq * tau;
  return b;
}

TheoryBound bound_ripm(const BoundInputs& in) {
  check_inputs(in);
  if (!(in.C > 4.0)) throw std::invalid_argument("bound_ripm: C must exceed 4");
  TheoryBound b = bound_spgd(in);
  const double T = double(in.T);
  const double Tb = std::pow(T, in.beta);
  const double noise = in.m * in.m * in.L_g * in.L_g;
  b.terms.prox_noise = b.A_const * 16.0 * noise / (in.C * in.L * T * Tb);
  b.terms.prox_noise_log = b.A_const * 64.0 * noise * std::log(T + 1.0) / (in.C * in.L * Tb);
  b.total = sum_terms(b.terms);
  return b;
}

namespace {

TheoryBound simplified(const BoundInputs& in, double constant, double noise) {
  check_inputs(in);
  const double T = double(in.T);
  const double c = constant / std::sqrt(T);
  TheoryBound b;
  b.terms.distance = c * in.L * in.d_star_sq;
  b.terms.initial_gap = c * in.initial_gap / std::sqrt(T);
  b.terms.variance = c * in.sigma_star_sq / (in.L * T);
  b.terms.variance_log = c * in.sigma_star_sq * 4.0 * std::log(T + 1.0) / in.L;
  b.terms.prox_noise = c * noise / (in.L * T);
  b.terms.prox_noise_log = c * noise * 4.0 * std::log(T + 1.0) / in.L;
  b.total = sum_terms(b.terms);
  b.A_const = 1.0;
  return b;
}

}  // namespace

TheoryBound bound_spgd_simplified(const BoundInputs& in) { return simplified(in, 9.0, 0.0); }

TheoryBound bound_ripm_simplified(const BoundInputs& in) {
  return simplified(in, 10.0, 4.0 * in.m * in.m * in.L_g * in.L_g);
}

InequalityReport check_variance_transfer(const ProblemInstance& problem,
                                         const SolutionCertificate& cert, const Vector& x,
                                         double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("variance transfer: eps must be positive");
  const double L = smoothness_constant(problem.oracle);
  InequalityReport r;
  r.lhs = second_moment(problem.oracle, x);
  r.rhs = 2.0 * L * (1.0 + eps) * (problem.objective(x) - cert.h_star) +
          (1.0 + 1.0 / eps) * cert.sigma_star_sq;
  r.slack = r.rhs - r.lhs;
  r.pass = r.lhs <= r.rhs + kVarianceTransferTolerance * (1.0 + std::abs(r.rhs));
  return r;
}

DescentReport check_descent(const ProblemInstance& problem, const SolutionCertificate& cert,
                            const Vector& x, const Vector& z, const DescentOptions& options) {
  const double L = smoothness_constant(problem.oracle);
  const double tau = options.tau;
  if (!(tau > 0.0)) throw std::invalid_argument("descent: tau must be positive");
  const double limit = options.incremental ? 0.25 : 0.5;
  if (!(tau * L < limit)) {
    throw std::invalid_argument(options.incremental ? "descent: needs tau L < 1/4"
                                                    : "descent: needs tau L < 1/2");
  }
  const double eps_prime =
      options.eps_prime > 0.0 ? options.eps_prime : default_eps_prime(tau, L);
  const double a = compute_a(tau, L, eps_prime);
  const double v = (1.0 + 1.0 / eps_prime) * cert.sigma_star_sq * tau;

  const std::size_t N = problem.oracle.num_components();
  const std::size_t m = options.incremental ? problem.regularizer.size() : 1;
  double extra = 0.0;
  if (options.incremental) {
    problem.regularizer.require_lipschitz();
    const double Lg = problem.regularizer.lipschitz_g();
    extra = 8.0 * tau * double(m * m) * Lg * Lg;
  } else {
    (void)problem.monolithic_prox();
  }
  const double prox_step = double(m) * tau;

  const double h_x = problem.objective(x);
  const double h_z = problem.objective(z);
  const double dist_xz = (x - z).squaredNorm();
  const double fixed_lhs = -h_z - a * h_x + a * cert.h_star;
  const double fixed_rhs = dist_xz / (2.0 * tau) + v + extra;

  // Sample-wise contribution: lhs_sample - rhs_sample without the constants.
  Vector y(x.size());
  auto sample = [&](std::size_t i, std::size_t j) {
    y = x;
    problem.oracle.add_grad_component(i, x, -tau, y);
    prox_inplace(problem.regularizer.component(j), y, prox_step);
    return std::pair{problem.objective(y), (y - z).squaredNorm() / (2.0 * tau)};
  };

  DescentReport r;
  if (N * m <= kExactEnumerationLimit) {
    double h_next = 0.0;
    double dist_next = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        const auto [h, d] = sample(i, j);
        h_next += h;
        dist_next += d;
      }
    }
    const double count = double(N * m);
    r.exact = true;
    r.lhs = h_next / count + fixed_lhs;
    r.rhs = fixed_rhs - dist_next / count;
    r.slack = r.rhs - r.lhs;
    r.pass = r.lhs <= r.rhs + kDescentTolerance * (1.0 + std::abs(r.rhs));
    return r;
  }

  if (options.resamples < 2) throw std::invalid_argument("descent: need at least two resamples");
  Rng i_rng(derive_seed(options.seed, 0));
  Rng j_rng(derive_seed(options.seed, 1));
  double mean_h = 0.0, mean_d = 0.0, mean_diff = 0.0, m2 = 0.0;
  for (std::size_t k = 1; k <= options.resamples; ++k) {
    const std::size_t i = uniform_index(i_rng, N);
    const std::size_t j = m > 1 ? uniform_index(j_rng, m) : 0;
    const auto [h, d] = sample(i, j);
    const double diff = h + d;
    const double delta = diff - mean_diff;
    mean_diff += delta / double(k);
    m2 += delta * (diff - mean_diff);
    mean_h += (h - mean_h) / double(k);
    mean_d += (d - mean_d) / double(k);
  }
  const double n = double(options.resamples);
  r.exact = false;
  r.standard_error = std::sqrt(m2 / (n - 1.0) / n);
  r.lhs = mean_h + fixed_lhs;
  r.rhs = fixed_rhs - mean_d;
  r.slack = r.rhs - r.lhs;
  r.pass = r.lhs <= r.rhs + 3.0 * r.standard_error;
  return r;
}

}  // namespace proxsgd
