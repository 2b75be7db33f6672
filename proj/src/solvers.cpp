#include "proxsgd/solvers.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "proxsgd/rng.hpp"

namespace proxsgd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kDivergenceFactor = 1e6;

// Stream ids for the sampling generators.
constexpr std::uint64_t kSampleStream = 0;
constexpr std::uint64_t kComponentStream = 1;
constexpr std::uint64_t kNodeStreamBase = 2;

std::string to_string_g(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// Drives one sequential chain x_0 -> x_T. `step(x)` advances x in place;
// `gap(x)` evaluates the objective gap at checkpoints.
template <class Step, class Gap>
IterateTrace run_chain(const Vector& x0, const SolverConfig& config, double tau, Step&& step,
                       Gap&& gap) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t T = config.horizon;
  const double limit = kDivergenceFactor * (1.0 + x0.norm());

  IterateTrace trace;
  trace.step_size_used = tau;
  Vector x = x0;
  Vector sum = Vector::Zero(x0.size());
  for (std::size_t t = 1; t <= T; ++t) {
    step(x);
    const double norm = x.norm();
    if (!std::isfinite(norm) || norm > limit) throw DivergenceError(t, norm);
    if (config.record_average) sum += x;

    const bool checkpoint =
        t == T || (config.checkpoint_stride > 0 && t % config.checkpoint_stride == 0);
    if (checkpoint) {
      const double gap_avg = config.record_average ? gap(Vector(sum / double(t))) : kNaN;
      trace.checkpoints.push_back({t, gap(x), gap_avg});
      if (config.keep_snapshots) trace.snapshots.push_back(x);
    }
  }
  trace.last_iterate = std::move(x);
  trace.average_iterate = config.record_average ? Vector(sum / double(T)) : Vector();
  trace.wall_time = std::chrono::steady_clock::now() - start;
  return trace;
}

void require_incremental_rule(const SolverConfig& config, bool incremental) {
  if (incremental && std::holds_alternative<HorizonSpgdStep>(config.step_rule)) {
    throw std::invalid_argument(
        "step rule: incremental prox needs tau L < 1/4; use the RIPM rule (C > 4) or a fixed step");
  }
}

// Block indices touched by a component; empty means every block.
std::vector<std::size_t> support_blocks(const ProxOperator& op) {
  if (const auto* e = std::get_if<EdgeDiff>(&op.kind())) return {e->i, e->j};
  return {};
}

}  // namespace

DivergenceError::DivergenceError(std::size_t iteration, double norm)
    : std::runtime_error("iterate diverged at t=" + std::to_string(iteration) +
                         " (norm " + to_string_g(norm) + ")"),
      iteration_(iteration),
      norm_(norm) {}

ConvergenceError::ConvergenceError(const std::string& what, Vector best_x, double best_value,
                                   double best_residual, std::size_t iterations)
    : std::runtime_error(what + " (best residual " + to_string_g(best_residual) + " after " +
                         std::to_string(iterations) + " iterations)"),
      best_x_(std::move(best_x)),
      best_value_(best_value),
      best_residual_(best_residual),
      iterations_(iterations) {}

void SolverConfig::validate() const {
  if (horizon == 0) throw std::invalid_argument("config: horizon must be positive");
  std::visit(
      [](const auto& rule) {
        using R = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<R, HorizonSpgdStep>) {
          if (!(rule.C > 2.0)) throw std::invalid_argument("step rule: SPGD rule needs C > 2");
          if (!(rule.beta > 0.0)) throw std::invalid_argument("step rule: beta must be positive");
        } else if constexpr (std::is_same_v<R, HorizonRipmStep>) {
          if (!(rule.C > 4.0)) throw std::invalid_argument("step rule: RIPM rule needs C > 4");
          if (!(rule.beta > 0.0)) throw std::invalid_argument("step rule: beta must be positive");
        } else {
          if (!(rule.tau > 0.0) || !std::isfinite(rule.tau)) {
            throw std::invalid_argument("step rule: fixed tau must be positive");
          }
        }
      },
      step_rule);
}

double resolve_step(const SolverConfig& config, double L) {
  config.validate();
  const double T = double(config.horizon);
  return std::visit(
      [&](const auto& rule) -> double {
        using R = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<R, FixedStep>) {
          return rule.tau;
        } else {
          if (!(L > 0.0)) throw std::invalid_argument("step rule: smoothness constant must be positive");
          return 1.0 / (rule.C * L * std::pow(T, rule.beta));
        }
      },
      config.step_rule);
}

std::string describe(const StepRule& rule) {
  std::ostringstream os;
  std::visit(
      [&](const auto& r) {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, HorizonSpgdStep>) {
          os << "horizon_spgd(C=" << r.C << ",beta=" << r.beta << ")";
        } else if constexpr (std::is_same_v<R, HorizonRipmStep>) {
          os << "horizon_ripm(C=" << r.C << ",beta=" << r.beta << ")";
        } else {
          os << "fixed(tau=" << r.tau << ")";
        }
      },
      rule);
  return os.str();
}

IterateTrace run_spgd(const ProblemInstance& problem, const SolutionCertificate& cert,
                      const SolverConfig& config) {
  const ProxOperator& g = problem.monolithic_prox();
  const double tau = resolve_step(config, smoothness_constant(problem.oracle));
  const std::size_t N = problem.oracle.num_components();
  Rng rng(derive_seed(config.seed, kSampleStream));
  return run_chain(
      problem.x0, config, tau,
      [&](Vector& x) {
        const std::size_t i = uniform_index(rng, N);
        problem.oracle.add_grad_component(i, x, -tau, x);
        prox_inplace(g, x, tau);
      },
      [&](const Vector& x) { return problem.objective(x) - cert.h_star; });
}

IterateTrace run_proj_sgd(const ProblemInstance& problem, const SolutionCertificate& cert,
                          const SolverConfig& config) {
  if (!problem.has_monolithic_prox() || !problem.monolithic_prox().is_indicator()) {
    throw std::invalid_argument("proj_sgd: g must be a single box or ball indicator");
  }
  return run_spgd(problem, cert, config);
}

IterateTrace run_ripm(const ProblemInstance& problem, const SolutionCertificate& cert,
                      const SolverConfig& config) {
  problem.regularizer.require_lipschitz();
  require_incremental_rule(config, true);
  const double tau = resolve_step(config, smoothness_constant(problem.oracle));
  const std::size_t N = problem.oracle.num_components();
  const double prox_step = double(problem.regularizer.size()) * tau;
  Rng sample_rng(derive_seed(config.seed, kSampleStream));
  Rng component_rng(derive_seed(config.seed, kComponentStream));
  return run_chain(
      problem.x0, config, tau,
      [&](Vector& x) {
        const std::size_t i = uniform_index(sample_rng, N);
        problem.oracle.add_grad_component(i, x, -tau, x);
        const auto [j, gj] = sample_component(problem.regularizer, component_rng);
        prox_inplace(*gj, x, prox_step);
      },
      [&](const Vector& x) { return problem.objective(x) - cert.h_star; });
}

IterateTrace run_spp(const DecomposableRegularizer& reg, const Vector& x0, double g_star,
                     const SolverConfig& config) {
  reg.require_lipschitz();
  require_incremental_rule(config, true);
  if (static_cast<std::size_t>(x0.size()) != reg.dim()) {
    throw std::invalid_argument("spp: x0 has wrong dimension");
  }
  const double tau = resolve_step(config, 1.0);
  const double prox_step = double(reg.size()) * tau;
  Rng component_rng(derive_seed(config.seed, kComponentStream));
  return run_chain(
      x0, config, tau,
      [&](Vector& x) {
        const auto [j, gj] = sample_component(reg, component_rng);
        prox_inplace(*gj, x, prox_step);
      },
      [&](const Vector& x) { return eval_sum(reg, x) - g_star; });
}

IterateTrace run_blockprox(const ProblemInstance& problem, const SolutionCertificate& cert,
                           const SolverConfig& config) {
  const auto* sep = std::get_if<SeparableData>(&problem.oracle.kind());
  if (sep == nullptr) throw std::invalid_argument("blockprox: f must be separable over node blocks");
  problem.regularizer.require_lipschitz();
  const std::size_t d = sep->block_dim;
  const std::size_t nodes = sep->A.size();
  for (const auto& c : problem.regularizer.components()) {
    if (const auto* e = std::get_if<EdgeDiff>(&c.kind())) {
      if (e->block_dim != d) throw std::invalid_argument("blockprox: block dimension mismatch");
      if (e->i >= nodes || e->j >= nodes) throw std::invalid_argument("blockprox: edge node out of range");
    }
  }
  if (std::holds_alternative<HorizonRipmStep>(config.step_rule)) {
    throw std::invalid_argument("blockprox: use the SPGD rule (C > 2) or a fixed step");
  }
  const double tau = resolve_step(config, full_smoothness_constant(problem.oracle));
  const double prox_step = double(problem.regularizer.size()) * tau;

  std::vector<std::vector<std::size_t>> supports;
  for (const auto& c : problem.regularizer.components()) supports.push_back(support_blocks(c));

  std::vector<Rng> node_rngs;
  node_rngs.reserve(nodes);
  for (std::size_t k = 0; k < nodes; ++k) node_rngs.emplace_back(derive_seed(config.seed, kNodeStreamBase + k));

  const auto di = static_cast<Eigen::Index>(d);
  Vector y(problem.dim());
  Vector scratch(problem.dim());
  return run_chain(
      problem.x0, config, tau,
      [&](Vector& x) {
        y = x - tau * problem.oracle.full_grad(x);
        // Nodes only read y, so the per-node updates are independent.
        for (std::size_t k = 0; k < nodes; ++k) {
          const auto [j, gj] = sample_component(problem.regularizer, node_rngs[k]);
          const auto& support = supports[j];
          const bool covered =
              support.empty() || support[0] == k || (support.size() > 1 && support[1] == k);
          const auto off = static_cast<Eigen::Index>(k) * di;
          if (covered) {
            scratch = y;
            prox_inplace(*gj, scratch, prox_step);
            x.segment(off, di) = scratch.segment(off, di);
          } else {
            x.segment(off, di) = y.segment(off, di);
          }
        }
      },
      [&](const Vector& x) { return problem.objective(x) - cert.h_star; });
}

}  // namespace proxsgd
