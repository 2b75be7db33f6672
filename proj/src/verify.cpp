#include "proxsgd/verify.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "parallel.hpp"
#include "proxsgd/bench.hpp"
#include "proxsgd/theory.hpp"

namespace proxsgd {

std::optional<VerifyScope> parse_verify_scope(const std::string& s) {
  for (auto v : {VerifyScope::Alpha, VerifyScope::Prox, VerifyScope::Variance, VerifyScope::Descent,
                 VerifyScope::Bounds, VerifyScope::All}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

std::string to_string(VerifyScope scope) {
  switch (scope) {
    case VerifyScope::Alpha: return "alpha";
    case VerifyScope::Prox: return "prox";
    case VerifyScope::Variance: return "variance";
    case VerifyScope::Descent: return "descent";
    case VerifyScope::Bounds: return "bounds";
    case VerifyScope::All: return "all";
  }
  return "?";
}

std::size_t VerifyReport::failures() const {
  std::size_t n = 0;
  for (const auto& c : checks) n += c.pass ? 0 : 1;
  return n;
}

namespace {

using Cell = std::function<std::vector<VerifyCheck>()>;

std::string cell_name(std::initializer_list<std::pair<const char*, double>> parts) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [k, v] : parts) {
    os << (first ? "" : ",") << k << '=' << v;
    first = false;
  }
  return os.str();
}

Vector random_vector(std::size_t n, Rng& rng, NormalSampler& normal, double scale) {
  Vector v(n);
  for (auto& x : v) x = scale * normal(rng);
  return v;
}

void alpha_cells(std::vector<Cell>& cells) {
  for (std::size_t T : {10u, 100u, 1000u, 10000u}) {
    for (int k = 1; k <= 19; ++k) {
      const double a = 0.05 * k;
      cells.push_back([T, a] {
        const std::string cell = cell_name({{"T", double(T)}, {"a", a}});
        const AlphaSchedule s = build_alpha_schedule(T, a);
        const double Td = double(T);
        std::vector<VerifyCheck> out;

        const double lower = std::pow(Td + 1.0, 1.0 - a) / std::pow(2.0, 1.0 - a);
        out.push_back({"alpha", "alpha_T_lower_bound", cell, s.alpha(std::ptrdiff_t(T)) >= lower,
                       s.alpha(std::ptrdiff_t(T)), lower});

        const double ratio = s.tail_sum_ratio();
        const double mid = 4.0 * (1.0 + (std::pow(Td, a) - 1.0) / a);
        const double top = 8.0 * std::pow(Td, a) * std::log(Td + 1.0);
        out.push_back({"alpha", "sum_ratio_bound", cell, ratio <= mid, ratio, mid});
        out.push_back({"alpha", "sum_ratio_log_bound", cell, mid <= top, mid, top});

        double worst = 0.0;
        bool shape = true;
        for (std::size_t t = 1; t <= T; ++t) {
          const auto tt = std::ptrdiff_t(t);
          const double prev = s.alpha(tt - 1);
          worst = std::max(worst, std::abs(s.alpha(tt) * s.p(t) - prev) / prev);
          shape = shape && s.alpha(tt) >= prev && s.p(t) >= 0.0 && s.p(t) <= 1.0;
        }
        out.push_back({"alpha", "recursion_identity", cell, worst <= 1e-12, worst, 1e-12});
        out.push_back({"alpha", "monotone_and_p_in_unit_interval", cell, shape, 0.0, 0.0});
        return out;
      });
    }
  }
  for (std::size_t T : {10u, 100u, 1000u, 10000u, 100000u}) {
    for (double beta : {0.25, 0.5, 1.0}) {
      for (double C : {3.0, 5.0, 10.0}) {
        cells.push_back([T, beta, C] {
          const double tau = 1.0 / (C * std::pow(double(T), beta));  // L = 1
          const double a = compute_a(tau, 1.0, default_eps_prime(tau, 1.0));
          const double lhs = std::pow(double(T), a);
          const double rhs = horizon_constant(C, beta);
          return std::vector<VerifyCheck>{{"alpha", "T_pow_a_cap",
                                           cell_name({{"T", double(T)}, {"beta", beta}, {"C", C}}),
                                           lhs <= rhs, lhs, rhs}};
        });
      }
    }
  }
}

std::vector<std::pair<std::string, ProxOperator>> prox_kinds() {
  Vector lo(6), hi(6);
  lo << -1.0, -0.5, -std::numeric_limits<double>::infinity(), 0.0, -2.0, -0.1;
  hi << 1.0, 0.5, 0.3, std::numeric_limits<double>::infinity(), 2.0, 0.1;
  Vector center(6);
  center << 0.5, -0.5, 0.0, 1.0, 0.0, 0.2;
  return {{"zero", ProxOperator::zero()},
          {"l1", ProxOperator::l1(0.7)},
          {"box", ProxOperator::box(lo, hi)},
          {"ball", ProxOperator::ball(center, 1.3)},
          {"edge_l2", ProxOperator::edge_diff(0, 2, 0.8, 2, EdgeNorm::L2)},
          {"edge_l1", ProxOperator::edge_diff(1, 2, 0.8, 2, EdgeNorm::L1)}};
}

void prox_cells(std::vector<Cell>& cells, std::uint64_t seed) {
  const auto kinds = prox_kinds();
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    cells.push_back([kinds, k, seed] {
      const auto& [name, op] = kinds[k];
      Rng rng(derive_seed(seed, 100 + k));
      NormalSampler normal;
      std::vector<Vector> probes;
      for (int i = 0; i < 100; ++i) {
        Vector x = random_vector(6, rng, normal, 2.0);
        // Indicator probes are projected so they are not vacuous.
        if (op.is_indicator()) x = prox(op, x, 1.0);
        probes.push_back(std::move(x));
      }
      bool optimal = true;
      double worst_ratio = 0.0;
      for (int trial = 0; trial < 10; ++trial) {
        const Vector v = random_vector(6, rng, normal, 2.0);
        const double step = 0.1 + 1.9 * uniform_unit(rng);
        optimal = optimal && check_prox_optimality(op, v, step, probes);
        const Vector u = random_vector(6, rng, normal, 2.0);
        const double num = (prox(op, u, step) - prox(op, v, step)).norm();
        worst_ratio = std::max(worst_ratio, num / (u - v).norm());
      }
      return std::vector<VerifyCheck>{
          {"prox", "optimality_100_probes", name, optimal, 0.0, 0.0},
          {"prox", "nonexpansive", name, worst_ratio <= 1.0 + 1e-12, worst_ratio, 1.0}};
    });
  }
}

GeneratedProblem small_lasso(std::uint64_t seed) {
  LassoParams p;
  p.n = 10;
  p.N = 20;
  p.sparsity = 3;
  return gen_lasso(p, derive_seed(seed, 1));
}

GeneratedProblem small_network(std::uint64_t seed) {
  NetworkParams p;
  p.nodes = 4;
  p.block_dim = 2;
  p.samples_per_node = 5;
  p.edge_prob = 0.5;
  return gen_network_lasso(p, NetworkLayout::Embedded, derive_seed(seed, 2));
}

void variance_cells(std::vector<Cell>& cells, std::uint64_t seed) {
  cells.push_back([seed] {
    const GeneratedProblem g = small_lasso(seed);
    const SolutionCertificate cert = certify_solution(g.problem, g.problem.x0, 1e-12);
    Rng rng(derive_seed(seed, 3));
    NormalSampler normal;
    std::vector<VerifyCheck> out;
    const double eps_values[] = {0.5, 1.0, 2.0};
    for (int k = 0; k < 101; ++k) {
      const double scale = k == 100 ? 1e3 : std::pow(10.0, -2.0 + 4.0 * uniform_unit(rng));
      Vector dir = random_vector(g.problem.dim(), rng, normal, 1.0);
      if (k == 100) dir.normalize();
      const Vector x = cert.x_star + scale * dir;
      const double eps = eps_values[k % 3];
      const InequalityReport r = check_variance_transfer(g.problem, cert, x, eps);
      out.push_back({"variance", k == 100 ? "far_point" : "random_point",
                     cell_name({{"point", double(k)}, {"eps", eps}}), r.pass, r.lhs, r.rhs});
    }
    return out;
  });
}

void descent_cells(std::vector<Cell>& cells, std::uint64_t seed) {
  for (bool incremental : {false, true}) {
    cells.push_back([seed, incremental] {
      const GeneratedProblem g = incremental ? small_network(seed) : small_lasso(seed);
      const SolutionCertificate cert = certify_solution(g.problem, g.problem.x0, 1e-12);
      const double L = smoothness_constant(g.problem.oracle);
      const double C = incremental ? 5.0 : 3.0;
      Rng rng(derive_seed(seed, incremental ? 5 : 4));
      NormalSampler normal;
      std::vector<VerifyCheck> out;
      for (int k = 0; k < 50; ++k) {
        const double tau = 1.0 / (C * L * std::sqrt(std::pow(10.0, k % 4)));
        const double scale = std::pow(10.0, -1.0 + 2.0 * uniform_unit(rng));
        const Vector x = cert.x_star + random_vector(g.problem.dim(), rng, normal, scale);
        const Vector z = cert.x_star + random_vector(g.problem.dim(), rng, normal, scale);
        DescentOptions opt;
        opt.tau = tau;
        opt.incremental = incremental;
        const DescentReport r = check_descent(g.problem, cert, x, z, opt);
        out.push_back({"descent", incremental ? "incremental_prox" : "prox_sgd",
                       cell_name({{"pair", double(k)}, {"tauL", tau * L}}), r.pass && r.exact, r.lhs,
                       r.rhs});
      }
      return out;
    });
  }
}

void bound_cells(std::vector<Cell>& cells) {
  struct Inputs {
    const char* name;
    double L, d, s, gap, m, Lg;
  };
  const Inputs sets[] = {{"noiseless", 2.0, 1.0, 0.0, 1.0, 5.0, 0.5},
                         {"noisy", 80.0, 4.0, 3.0, 2.0, 20.0, 0.14},
                         {"prox_heavy", 10.0, 0.5, 0.5, 0.1, 30.0, 2.0}};
  for (const auto& in : sets) {
    for (std::size_t T : {10u, 100u, 1000u, 10000u}) {
      cells.push_back([in, T] {
        const std::string cell = std::string(in.name) + ",T=" + std::to_string(T);
        BoundInputs b{T, 3.0, 0.5, in.L, in.d, in.s, in.gap, in.m, in.Lg};
        std::vector<VerifyCheck> out;
        const TheoryBound spgd = bound_spgd(b);
        const TheoryBound spgd9 = bound_spgd_simplified(b);
        const auto& t = spgd.terms;
        const double sum = t.distance + t.initial_gap + t.variance + t.variance_log;
        const bool nonneg = t.distance >= 0 && t.initial_gap >= 0 && t.variance >= 0 && t.variance_log >= 0;
        out.push_back({"bounds", "spgd_total_is_sum", cell, nonneg && sum == spgd.total, sum, spgd.total});
        // Only the distance and initial-gap terms sit under the 9/sqrt(T) form;
        // the variance terms carry 4A and 16A against 9 and 36.
        out.push_back({"bounds", "spgd_distance_under_simplified", cell,
                       t.distance <= spgd9.terms.distance, t.distance, spgd9.terms.distance});
        out.push_back({"bounds", "spgd_initial_gap_under_simplified", cell,
                       t.initial_gap <= spgd9.terms.initial_gap, t.initial_gap, spgd9.terms.initial_gap});

        b.C = 5.0;
        const TheoryBound ripm = bound_ripm(b);
        const TheoryBound ripm10 = bound_ripm_simplified(b);
        out.push_back({"bounds", "ripm_under_simplified", cell, ripm.total <= ripm10.total, ripm.total,
                       ripm10.total});
        b.m = 0.0;
        const TheoryBound reduced = bound_ripm(b);
        const TheoryBound plain = bound_spgd(b);
        out.push_back({"bounds", "ripm_without_prox_noise_is_spgd", cell,
                       std::abs(reduced.total - plain.total) <= 1e-12 * plain.total, reduced.total,
                       plain.total});
        return out;
      });
    }
  }
}

}  // namespace

VerifyReport run_verify(VerifyScope scope, std::uint64_t seed, std::size_t jobs) {
  std::vector<Cell> cells;
  const bool all = scope == VerifyScope::All;
  if (all || scope == VerifyScope::Alpha) alpha_cells(cells);
  if (all || scope == VerifyScope::Prox) prox_cells(cells, seed);
  if (all || scope == VerifyScope::Variance) variance_cells(cells, seed);
  if (all || scope == VerifyScope::Descent) descent_cells(cells, seed);
  if (all || scope == VerifyScope::Bounds) bound_cells(cells);

  std::vector<std::vector<VerifyCheck>> results(cells.size());
  detail::parallel_for(cells.size(), resolve_jobs(jobs), [&](std::size_t k) { results[k] = cells[k](); });
  VerifyReport report;
  for (auto& r : results) {
    for (auto& c : r) report.checks.push_back(std::move(c));
  }
  return report;
}

nlohmann::json to_json(const VerifyReport& report) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"scope", c.scope},
                      {"name", c.name},
                      {"cell", c.cell},
                      {"pass", c.pass},
                      {"lhs", std::isfinite(c.lhs) ? nlohmann::json(c.lhs) : nlohmann::json(nullptr)},
                      {"rhs", std::isfinite(c.rhs) ? nlohmann::json(c.rhs) : nlohmann::json(nullptr)}});
  }
  return {{"total", report.checks.size()}, {"failures", report.failures()}, {"checks", checks}};
}

}  // namespace proxsgd
