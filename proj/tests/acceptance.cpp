// Acceptance run: one PASS/FAIL line per criterion with diagnostics indented
// below it. Exits 1 when any criterion fails.
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "proxsgd/bench.hpp"
#include "proxsgd/theory.hpp"
#include "support.hpp"

using namespace proxsgd;

namespace {

// Pinned tolerances and thresholds.
constexpr double kSlopeLow = -0.65;
constexpr double kSlopeHigh = -0.35;
constexpr double kBoundSlackSe = 3.0;
constexpr double kRecursionRelTol = 1e-12;
constexpr double kVarianceRelTol = 1e-8;
constexpr double kDescentRelTol = 1e-9;
constexpr double kBruteForceTol = 1e-4;
constexpr std::size_t kLastWinsNeeded = 8;
constexpr double kSppLogFactor = 10.0;

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  __attribute__((format(printf, 2, 3))) void note(const char* fmt, ...) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, args);
    va_end(args);
    notes.emplace_back(buf);
  }
  __attribute__((format(printf, 3, 4))) void require(bool ok, const char* fmt, ...) {
    if (ok) return;
    pass = false;
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, args);
    va_end(args);
    notes.emplace_back(buf);
  }
};

int failures = 0;

void report(int id, const char* title, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out.pass = false;
    out.note("exception: %s", e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!out.pass) ++failures;
  std::printf("%s [%d] %s (%.1fs)\n", out.pass ? "PASS" : "FAIL", id, title, secs);
  for (const auto& n : out.notes) std::printf("       %s\n", n.c_str());
  std::fflush(stdout);
}

ExperimentSpec lasso_rate_spec() {
  ExperimentSpec spec;
  spec.problem = ProblemKind::Lasso;
  spec.lasso = LassoParams{50, 200, 5, 0.1, 0.1, LassoPenalty::L1};
  spec.algorithm = Algorithm::Spgd;
  spec.step = StepSpec{StepSpec::Kind::Horizon, 3.0, 0.5, 0.0, 1.0};
  spec.T_grid = {100, 1000, 10000};
  spec.trials = 20;
  spec.master_seed = 1;
  return spec;
}

ExperimentSpec network_rate_spec() {
  ExperimentSpec spec;
  spec.problem = ProblemKind::NetworkLasso;
  spec.network.nodes = 10;
  spec.network.block_dim = 2;
  spec.algorithm = Algorithm::Ripm;
  spec.step = StepSpec{StepSpec::Kind::Horizon, 5.0, 0.5, 0.0, 1.0};
  spec.T_grid = {100, 1000, 10000};
  spec.trials = 20;
  spec.master_seed = 1;
  return spec;
}

void describe_rows(Outcome& out, const RateReport& r) {
  out.note("h*=%.6g L=%.4g sigma*^2=%.4g D*^2=%.4g gap0=%.4g", r.h_star, r.L, r.sigma_star_sq, r.d_star_sq,
           r.initial_gap);
  for (const auto& row : r.rows) {
    out.note("T=%-6zu mean gap %.4e (se %.2e)  bound %.4e", row.T, row.mean_last, row.se_last,
             row.bound ? row.bound->total : std::nan(""));
  }
  out.note("slope %.4f, 95%% CI [%.4f, %.4f]", r.slope_last.slope, r.slope_last.ci_low, r.slope_last.ci_high);
}

void check_slope(Outcome& out, const RateReport& r) {
  out.require(r.slope_last.valid, "slope fit invalid");
  out.require(r.slope_last.slope >= kSlopeLow && r.slope_last.slope <= kSlopeHigh,
              "slope %.4f outside [%.2f, %.2f]", r.slope_last.slope, kSlopeLow, kSlopeHigh);
}

void check_bound(Outcome& out, const RateReport& r) {
  for (const auto& row : r.rows) {
    out.require(row.bound.has_value(), "T=%zu: no bound", row.T);
    if (!row.bound) continue;
    out.require(row.diverged == 0, "T=%zu: %zu diverged trials", row.T, row.diverged);
    out.require(row.mean_last <= row.bound->total + kBoundSlackSe * row.se_last,
                "T=%zu: mean %.4e above bound %.4e + 3 se", row.T, row.mean_last, row.bound->total);
  }
}

// log alpha_t by direct recursion in long double, independent of AlphaSchedule.
std::vector<long double> direct_log_alpha(std::size_t T, long double a) {
  std::vector<long double> la(T + 1, 0.0L);
  for (std::size_t t = 1; t <= T; ++t) {
    la[t] = la[t - 1] + std::log((long double)(T - t + 2)) - std::log(a + (long double)(T - t + 1));
  }
  return la;
}

GeneratedProblem small_lasso() {
  LassoParams p;
  p.n = 10;
  p.N = 20;
  p.sparsity = 3;
  return gen_lasso(p, derive_seed(2024, 1));
}

}  // namespace

int main() {
  std::printf("acceptance: pinned seeds; slope window [%.2f, %.2f]\n", kSlopeLow, kSlopeHigh);

  const auto lasso_spec = lasso_rate_spec();
  const auto lasso_start = std::chrono::steady_clock::now();
  const RateReport lasso = run_experiment(lasso_spec);
  const double lasso_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - lasso_start).count();

  report(1, "SPGD rate slope on the synthetic Lasso", [&] {
    Outcome out;
    describe_rows(out, lasso);
    out.note("experiment wall time %.2fs (shared with criterion 2)", lasso_secs);
    check_slope(out, lasso);
    return out;
  });

  report(2, "SPGD mean gap below bound_spgd at every T", [&] {
    Outcome out;
    check_bound(out, lasso);
    for (const auto& row : lasso.rows) {
      if (row.bound) out.note("T=%-6zu gap/bound = %.3e", row.T, row.mean_last / row.bound->total);
    }
    return out;
  });

  report(3, "RIPM rate slope and bound_ripm on a 10-node network Lasso", [&] {
    Outcome out;
    const RateReport r = run_experiment(network_rate_spec());
    describe_rows(out, r);
    check_slope(out, r);
    check_bound(out, r);
    return out;
  });

  report(4, "alpha sequence lower bound, tail sum and recursion", [&] {
    Outcome out;
    std::size_t cells = 0;
    for (std::size_t T : {10u, 100u, 1000u, 10000u}) {
      for (int k = 1; k <= 19; k += 2) {
        const double a = 0.05 * k;
        const auto la = direct_log_alpha(T, a);
        const auto s = build_alpha_schedule(T, a);
        const long double Td = T;
        const long double alphaT = std::exp(la[T]);
        out.require(alphaT >= std::pow(Td + 1, 1 - a) / std::pow(2.0L, 1 - a), "T=%zu a=%.2f: alpha_T too small", T, a);
        long double ratio = 0.0L;
        for (std::size_t t = 1; t <= T; ++t) ratio += std::exp(la[t] - la[T]);
        const long double mid = 4.0L * (1.0L + (std::pow(Td, a) - 1.0L) / a);
        out.require(ratio <= mid, "T=%zu a=%.2f: tail sum %.6Lg > %.6Lg", T, a, ratio, mid);
        out.require(mid <= 8.0L * std::pow(Td, a) * std::log(Td + 1), "T=%zu a=%.2f: middle bound above log form", T, a);
        for (std::size_t t = 1; t <= T; ++t) {
          const double lhs = s.alpha(std::ptrdiff_t(t)) * s.p(t);
          const double rhs = s.alpha(std::ptrdiff_t(t) - 1);
          if (std::abs(lhs - rhs) > kRecursionRelTol * std::abs(rhs)) {
            out.require(false, "T=%zu a=%.2f t=%zu: alpha_t p_t != alpha_{t-1}", T, a, t);
            break;
          }
          if (std::abs(s.log_alpha(std::ptrdiff_t(t)) - double(la[t])) > 1e-10 * (1 + std::abs(double(la[t])))) {
            out.require(false, "T=%zu a=%.2f t=%zu: schedule differs from direct recursion", T, a, t);
            break;
          }
        }
        ++cells;
      }
    }
    out.note("%zu (T, a) cells", cells);
    return out;
  });

  report(5, "T^a below exp(4/(e beta C))", [&] {
    Outcome out;
    double worst = 0.0;
    for (double beta : {0.25, 0.5, 1.0}) {
      for (double C : {3.0, 5.0, 10.0}) {
        const double A = std::exp(4.0 / (std::exp(1.0) * beta * C));
        for (double T : {10.0, 100.0, 1000.0, 1e4, 1e5}) {
          const double tauL = 1.0 / (C * std::pow(T, beta));
          const double a = 4.0 * tauL / (1.0 + 2.0 * tauL);
          const double lib = compute_a(tauL, 1.0, default_eps_prime(tauL, 1.0));
          out.require(std::abs(lib - a) <= 1e-14, "a mismatch at T=%g", T);
          out.require(std::pow(T, a) <= A, "T=%g beta=%g C=%g: T^a=%.6g > %.6g", T, beta, C, std::pow(T, a), A);
          out.require(std::abs(horizon_constant(C, beta) - A) <= 1e-14 * A, "A mismatch");
          worst = std::max(worst, std::pow(T, a) / A);
        }
      }
    }
    out.note("max T^a / A = %.4f", worst);
    return out;
  });

  report(6, "variance transfer at 100 random points", [&] {
    Outcome out;
    const auto gen = small_lasso();
    const auto& p = gen.problem;
    const auto cert = certify_solution(p, p.x0, 1e-12);
    const double L = smoothness_constant(p.oracle);
    Rng rng(derive_seed(2024, 6));
    double min_slack = INFINITY;
    for (int k = 0; k < 100; ++k) {
      const Vector x = cert.x_star + testing::random_vector(10, rng, 2.0);
      const double eps = 0.1 + 2.0 * uniform_unit(rng);
      double lhs = 0.0;
      for (std::size_t i = 0; i < 20; ++i) lhs += p.oracle.grad_component(i, x).squaredNorm();
      lhs /= 20.0;
      const double rhs = 2 * L * (1 + eps) * (p.objective(x) - cert.h_star) + (1 + 1 / eps) * cert.sigma_star_sq;
      const auto r = check_variance_transfer(p, cert, x, eps);
      out.require(lhs <= rhs + kVarianceRelTol * (1 + std::abs(rhs)), "point %d: %.6g > %.6g", k, lhs, rhs);
      out.require(r.pass, "point %d: library check failed", k);
      min_slack = std::min(min_slack, (rhs - lhs) / (1 + std::abs(rhs)));
    }
    out.note("smallest relative slack %.3e", min_slack);
    return out;
  });

  report(7, "per-iteration descent, SPGD and incremental variants", [&] {
    Outcome out;
    const auto gen = small_lasso();
    const auto& p = gen.problem;
    const auto cert = certify_solution(p, p.x0, 1e-12);
    const double L = smoothness_constant(p.oracle);
    Rng rng(derive_seed(2024, 7));
    for (int k = 0; k < 50; ++k) {
      const Vector x = cert.x_star + testing::random_vector(10, rng);
      const Vector z = cert.x_star + testing::random_vector(10, rng, 0.5);
      const double tau = (0.02 + 0.45 * uniform_unit(rng)) / L;
      const double eps = (1 - 2 * tau * L) / (1 + 2 * tau * L);
      const double a = 2 * tau * L * (1 + eps);
      double e_h = 0.0, e_d = 0.0;
      for (std::size_t i = 0; i < 20; ++i) {
        const Vector next = prox(p.monolithic_prox(), x - tau * p.oracle.grad_component(i, x), tau);
        e_h += p.objective(next) / 20.0;
        e_d += (next - z).squaredNorm() / 20.0;
      }
      const double lhs = e_h - p.objective(z) - a * p.objective(x) + a * cert.h_star;
      const double rhs = ((x - z).squaredNorm() - e_d) / (2 * tau) + (1 + 1 / eps) * cert.sigma_star_sq * tau;
      out.require(lhs <= rhs + kDescentRelTol * (1 + std::abs(rhs)), "spgd pair %d: %.6g > %.6g", k, lhs, rhs);
      DescentOptions opt;
      opt.tau = tau;
      const auto r = check_descent(p, cert, x, z, opt);
      out.require(r.exact && r.pass, "spgd pair %d: library check failed", k);
    }

    NetworkParams np;
    np.nodes = 4;
    np.samples_per_node = 5;
    const auto net = gen_network_lasso(np, NetworkLayout::Embedded, derive_seed(2024, 17));
    const auto& q = net.problem;
    const auto ncert = certify_solution(q, q.x0, 1e-10);
    const double Lq = smoothness_constant(q.oracle);
    const std::size_t N = q.oracle.num_components(), m = q.regularizer.size();
    const double Lg = q.regularizer.lipschitz_g();
    for (int k = 0; k < 50; ++k) {
      const Vector x = ncert.x_star + testing::random_vector(q.dim(), rng);
      const Vector z = ncert.x_star + testing::random_vector(q.dim(), rng, 0.5);
      const double tau = (0.02 + 0.2 * uniform_unit(rng)) / Lq;
      const double eps = (1 - 2 * tau * Lq) / (1 + 2 * tau * Lq);
      const double a = 2 * tau * Lq * (1 + eps);
      double e_h = 0.0, e_d = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
          const Vector next = prox(q.regularizer.component(j), x - tau * q.oracle.grad_component(i, x), double(m) * tau);
          e_h += q.objective(next) / double(N * m);
          e_d += (next - z).squaredNorm() / double(N * m);
        }
      }
      const double lhs = e_h - q.objective(z) - a * q.objective(x) + a * ncert.h_star;
      const double rhs = ((x - z).squaredNorm() - e_d) / (2 * tau) + (1 + 1 / eps) * ncert.sigma_star_sq * tau +
                         8 * tau * double(m * m) * Lg * Lg;
      out.require(lhs <= rhs + kDescentRelTol * (1 + std::abs(rhs)), "incremental pair %d: %.6g > %.6g", k, lhs, rhs);
      DescentOptions opt;
      opt.tau = tau;
      opt.incremental = true;
      const auto r = check_descent(q, ncert, x, z, opt);
      out.require(r.exact && r.pass, "incremental pair %d: library check failed", k);
    }
    out.note("100 pairs enumerated exactly (N m = %zu for the network)", N * m);
    return out;
  });

  report(8, "prox optimality for every kind and brute-force edge prox", [&] {
    Outcome out;
    const double inf = INFINITY;
    const std::vector<ProxOperator> kinds{
        ProxOperator::zero(),
        ProxOperator::l1(0.4),
        ProxOperator::l1(0.5, testing::vec({1, -1, 0, 2})),
        ProxOperator::box(testing::vec({-1, -inf, 0, -0.5}), testing::vec({1, 0.2, inf, 0.5})),
        ProxOperator::ball(testing::vec({0.3, -0.2, 0, 1}), 0.8),
        ProxOperator::edge_diff(0, 1, 0.6, 2, EdgeNorm::L2),
        ProxOperator::edge_diff(1, 0, 0.6, 2, EdgeNorm::L1)};
    Rng rng(derive_seed(2024, 8));
    for (const auto& op : kinds) {
      std::vector<Vector> probes;
      for (int k = 0; k < 100; ++k) {
        Vector x = testing::random_vector(4, rng, 2.0);
        if (op.is_indicator()) x = prox(op, x, 1.0);
        probes.push_back(x);
      }
      for (int trial = 0; trial < 20; ++trial) {
        const Vector v = testing::random_vector(4, rng, 3.0);
        const double step = 0.05 + 2.0 * uniform_unit(rng);
        out.require(check_prox_optimality(op, v, step, probes), "%s: optimality violated", op.name());
      }
    }
    double worst = 0.0;
    for (std::size_t d : {1u, 2u}) {
      for (EdgeNorm norm : {EdgeNorm::L2, EdgeNorm::L1}) {
        for (int k = 0; k < 5; ++k) {
          const Vector v = testing::random_vector(3 * d, rng, 1.5);
          const double w = 0.2 + uniform_unit(rng);
          const double step = 0.2 + 1.5 * uniform_unit(rng);
          const auto op = ProxOperator::edge_diff(0, 2, w, d, norm);
          const double err =
              (prox(op, v, step) - testing::brute_force_edge_prox(v, 0, 2, w, d, norm, step)).lpNorm<Eigen::Infinity>();
          worst = std::max(worst, err);
          out.require(err <= kBruteForceTol, "edge d=%zu: brute-force gap %.3e", d, err);
        }
      }
    }
    out.note("%zu kinds x 100 probes; worst brute-force gap %.2e", kinds.size(), worst);
    return out;
  });

  report(9, "last iterate beats the average in at least 8 of 10 trials", [&] {
    Outcome out;
    auto spec = lasso_rate_spec();
    spec.step.C = 4.0;
    spec.T_grid = {10000};
    spec.trials = 10;
    const auto table = compare_last_vs_avg(spec);
    for (const auto& r : table.rows) out.note("trial %zu: last %.4e  avg %.4e", r.trial, r.gap_last, r.gap_avg);
    out.note("last wins %zu of %zu", table.last_wins, table.rows.size());
    out.require(table.last_wins >= kLastWinsNeeded, "last wins only %zu", table.last_wins);
    return out;
  });

  report(10, "reductions: RIPM m=1, projSGD over R^n, SPP on |x-1|+|x+1|", [&] {
    Outcome out;
    const auto gen = small_lasso();
    const auto& p = gen.problem;
    const auto cert = certify_solution(p, p.x0, 1e-10);
    SolverConfig cfg;
    cfg.horizon = 2000;
    cfg.step_rule = FixedStep{0.2 / smoothness_constant(p.oracle)};
    cfg.checkpoint_stride = 1;
    cfg.keep_snapshots = true;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      cfg.seed = seed;
      const auto a = run_spgd(p, cert, cfg);
      const auto b = run_ripm(p, cert, cfg);
      out.require(a.snapshots == b.snapshots, "seed %llu: RIPM and SPGD iterates differ", (unsigned long long)seed);
    }

    const Vector lo = Vector::Constant(10, -INFINITY), hi = Vector::Constant(10, INFINITY);
    const ProblemInstance open(p.oracle, DecomposableRegularizer({ProxOperator::box(lo, hi)}, 10), p.x0);
    const ProblemInstance plain(p.oracle, DecomposableRegularizer({ProxOperator::zero()}, 10), p.x0);
    const SolutionCertificate none;
    cfg.seed = 4;
    out.require(run_proj_sgd(open, none, cfg).snapshots == run_spgd(plain, none, cfg).snapshots,
                "projSGD over R^n differs from SGD");

    const DecomposableRegularizer g({ProxOperator::l1(1.0, testing::vec({1.0})), ProxOperator::l1(1.0, testing::vec({-1.0}))}, 1);
    SolverConfig spp;
    spp.horizon = 10000;
    spp.step_rule = HorizonRipmStep{5.0, 0.5};
    spp.seed = 1;
    const auto trace = run_spp(g, testing::vec({5.0}), 2.0, spp);
    const double limit = kSppLogFactor * trace.step_size_used * std::log(10000.0);
    out.note("SPP final g-gap %.3e, limit %.3e (tau %.3e)", trace.final_gap_last(), limit, trace.step_size_used);
    out.require(trace.final_gap_last() < limit, "SPP gap above 10 tau ln T");
    return out;
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
