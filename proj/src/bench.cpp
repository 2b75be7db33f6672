#include "proxsgd/bench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>
#include <thread>

#include "parallel.hpp"
#include "proxsgd/rng.hpp"

namespace proxsgd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Matrix normal_matrix(std::size_t rows, std::size_t cols, Rng& rng, NormalSampler& normal) {
  Matrix A(rows, cols);
  // Row-major fill so the draw order does not depend on Eigen's storage.
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) A(Eigen::Index(i), Eigen::Index(j)) = normal(rng);
  }
  return A;
}

Vector normal_vector(std::size_t n, Rng& rng, NormalSampler& normal) {
  Vector v(n);
  for (std::size_t i = 0; i < n; ++i) v[Eigen::Index(i)] = normal(rng);
  return v;
}

void mean_se(const std::vector<double>& xs, double& mean, double& se) {
  if (xs.empty()) {
    mean = se = kNaN;
    return;
  }
  mean = std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size());
  if (xs.size() < 2) {
    se = 0.0;
    return;
  }
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  se = std::sqrt(ss / double(xs.size() - 1) / double(xs.size()));
}

}  // namespace

GeneratedProblem gen_lasso(const LassoParams& p, std::uint64_t seed) {
  if (p.n == 0 || p.N == 0) throw std::invalid_argument("gen_lasso: n and N must be positive");
  if (p.sparsity == 0 || p.sparsity > p.n) throw std::invalid_argument("gen_lasso: need 0 < sparsity <= n");
  if (p.noise_std < 0.0 || p.lambda < 0.0) throw std::invalid_argument("gen_lasso: noise and lambda must be nonnegative");
  if (p.penalty != LassoPenalty::L1 && !(p.lambda > 0.0)) {
    throw std::invalid_argument("gen_lasso: constraint size must be positive");
  }

  Rng rng(seed);
  NormalSampler normal;
  Matrix A = normal_matrix(p.N, p.n, rng, normal);

  std::vector<std::size_t> idx(p.n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t k = 0; k < p.sparsity; ++k) {
    std::swap(idx[k], idx[k + uniform_index(rng, p.n - k)]);
  }
  Vector truth = Vector::Zero(p.n);
  for (std::size_t k = 0; k < p.sparsity; ++k) {
    truth[Eigen::Index(idx[k])] = (rng() & 1u) ? 1.0 : -1.0;
  }
  Vector b = A * truth;
  for (Eigen::Index i = 0; i < b.size(); ++i) b[i] += p.noise_std * normal(rng);

  ProxOperator g = ProxOperator::l1(p.lambda);
  if (p.penalty == LassoPenalty::Ball) {
    g = ProxOperator::ball(Vector::Zero(p.n), p.lambda);
  } else if (p.penalty == LassoPenalty::Box) {
    g = ProxOperator::box(Vector::Constant(p.n, -p.lambda), Vector::Constant(p.n, p.lambda));
  }
  DecomposableRegularizer reg({g}, p.n);
  return {ProblemInstance(SmoothOracle::least_squares(std::move(A), std::move(b)), std::move(reg),
                          Vector::Zero(p.n), "lasso"),
          truth};
}

GeneratedProblem gen_logistic(const LogisticParams& p, std::uint64_t seed) {
  if (p.n == 0 || p.N == 0) throw std::invalid_argument("gen_logistic: n and N must be positive");
  if (p.lambda < 0.0) throw std::invalid_argument("gen_logistic: lambda must be nonnegative");
  Rng rng(seed);
  NormalSampler normal;
  Matrix A = normal_matrix(p.N, p.n, rng, normal);
  Vector w = normal_vector(p.n, rng, normal);
  Vector y(p.N);
  for (std::size_t i = 0; i < p.N; ++i) {
    const double margin = A.row(Eigen::Index(i)).dot(w);
    const double prob = 1.0 / (1.0 + std::exp(-margin));
    y[Eigen::Index(i)] = uniform_unit(rng) < prob ? 1.0 : -1.0;
  }
  DecomposableRegularizer reg({ProxOperator::l1(p.lambda)}, p.n);
  return {ProblemInstance(SmoothOracle::logistic(std::move(A), std::move(y)), std::move(reg),
                          Vector::Zero(p.n), "logistic"),
          w};
}

GeneratedProblem gen_network_lasso(const NetworkParams& p, NetworkLayout layout,
                                   std::uint64_t seed) {
  if (p.nodes < 2) throw std::invalid_argument("gen_network_lasso: need at least two nodes");
  if (p.block_dim == 0 || p.samples_per_node == 0 || p.clusters == 0) {
    throw std::invalid_argument("gen_network_lasso: block_dim, samples and clusters must be positive");
  }
  if (p.edge_prob < 0.0 || p.edge_prob > 1.0) throw std::invalid_argument("gen_network_lasso: edge_prob must lie in [0, 1]");
  if (!(p.weight > 0.0)) throw std::invalid_argument("gen_network_lasso: weight must be positive");

  Rng rng(seed);
  NormalSampler normal;
  CollaborationGraph graph{p.nodes, p.block_dim, {}};
  std::set<std::pair<std::size_t, std::size_t>> present;
  for (std::size_t k = 1; k < p.nodes; ++k) {
    const std::size_t parent = uniform_index(rng, k);
    graph.edges.push_back({parent, k, p.weight});
    present.insert({parent, k});
  }
  for (std::size_t i = 0; i < p.nodes; ++i) {
    for (std::size_t j = i + 1; j < p.nodes; ++j) {
      const bool draw = uniform_unit(rng) < p.edge_prob;
      if (draw && !present.count({i, j})) {
        graph.edges.push_back({i, j, p.weight});
        present.insert({i, j});
      }
    }
  }

  const std::size_t d = p.block_dim;
  std::vector<Vector> centers;
  for (std::size_t c = 0; c < p.clusters; ++c) centers.push_back(normal_vector(d, rng, normal));

  const std::size_t dim = p.nodes * d;
  Vector truth(dim);
  std::vector<Matrix> blocks;
  std::vector<Vector> targets;
  for (std::size_t k = 0; k < p.nodes; ++k) {
    const Vector& theta = centers[k % p.clusters];
    truth.segment(Eigen::Index(k * d), Eigen::Index(d)) = theta;
    Matrix Ak = normal_matrix(p.samples_per_node, d, rng, normal);
    Vector bk = Ak * theta;
    for (Eigen::Index i = 0; i < bk.size(); ++i) bk[i] += p.noise_std * normal(rng);
    blocks.push_back(std::move(Ak));
    targets.push_back(std::move(bk));
  }

  DecomposableRegularizer reg = build_network_lasso(graph, p.norm);
  if (layout == NetworkLayout::Separable) {
    return {ProblemInstance(SmoothOracle::separable(d, std::move(blocks), std::move(targets)),
                            std::move(reg), Vector::Zero(dim), "network_lasso"),
            truth};
  }
  const std::size_t N = p.nodes * p.samples_per_node;
  Matrix A = Matrix::Zero(N, dim);
  Vector b(N);
  for (std::size_t k = 0; k < p.nodes; ++k) {
    const auto r0 = Eigen::Index(k * p.samples_per_node);
    const auto rows = Eigen::Index(p.samples_per_node);
    A.block(r0, Eigen::Index(k * d), rows, Eigen::Index(d)) = blocks[k];
    b.segment(r0, rows) = targets[k];
  }
  return {ProblemInstance(SmoothOracle::least_squares(std::move(A), std::move(b)), std::move(reg),
                          Vector::Zero(dim), "network_lasso"),
          truth};
}

void ExperimentSpec::validate() const {
  if (T_grid.empty()) throw std::invalid_argument("experiment: T_grid is empty");
  if (T_grid.front() == 0) throw std::invalid_argument("experiment: T_grid entries must be positive");
  for (std::size_t k = 1; k < T_grid.size(); ++k) {
    if (T_grid[k] <= T_grid[k - 1]) throw std::invalid_argument("experiment: T_grid must be strictly increasing");
  }
  if (trials == 0) throw std::invalid_argument("experiment: trials must be at least 1");
  if (!(cert_tol > 0.0)) throw std::invalid_argument("experiment: cert_tol must be positive");

  switch (step.kind) {
    case StepSpec::Kind::Horizon:
      if (!(step.beta > 0.0)) throw std::invalid_argument("experiment: beta must be positive");
      if (algorithm == Algorithm::Ripm && !(step.C > 4.0)) {
        throw std::invalid_argument("experiment: ripm needs C > 4");
      }
      if (!(step.C > 2.0)) throw std::invalid_argument("experiment: C must exceed 2");
      break;
    case StepSpec::Kind::Fixed:
      if (!(step.tau > 0.0)) throw std::invalid_argument("experiment: tau must be positive");
      break;
    case StepSpec::Kind::Scaled:
      if (!(step.c > 0.0)) throw std::invalid_argument("experiment: step scale must be positive");
      break;
  }

  const bool network = problem == ProblemKind::NetworkLasso;
  switch (algorithm) {
    case Algorithm::Spgd:
      if (network) throw std::invalid_argument("experiment: spgd needs a monolithic prox; use ripm or blockprox");
      break;
    case Algorithm::ProjSgd:
      if (problem != ProblemKind::Lasso || lasso.penalty == LassoPenalty::L1) {
        throw std::invalid_argument("experiment: proj_sgd needs a lasso problem with a ball or box constraint");
      }
      break;
    case Algorithm::Ripm:
      if (problem == ProblemKind::Lasso && lasso.penalty != LassoPenalty::L1) {
        throw std::invalid_argument("experiment: ripm needs Lipschitz components");
      }
      break;
    case Algorithm::BlockProx:
      if (!network) throw std::invalid_argument("experiment: blockprox needs the network_lasso problem");
      break;
  }
}

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::Lasso: return "lasso";
    case ProblemKind::Logistic: return "logistic";
    case ProblemKind::NetworkLasso: return "network_lasso";
  }
  return "?";
}

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::Spgd: return "spgd";
    case Algorithm::ProjSgd: return "proj_sgd";
    case Algorithm::Ripm: return "ripm";
    case Algorithm::BlockProx: return "blockprox";
  }
  return "?";
}

std::string to_string(StartMode mode) {
  switch (mode) {
    case StartMode::Zero: return "zero";
    case StartMode::GroundTruth: return "ground_truth";
    case StartMode::Certified: return "certified";
  }
  return "?";
}

std::optional<ProblemKind> parse_problem_kind(const std::string& s) {
  for (auto k : {ProblemKind::Lasso, ProblemKind::Logistic, ProblemKind::NetworkLasso}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::optional<Algorithm> parse_algorithm(const std::string& s) {
  for (auto a : {Algorithm::Spgd, Algorithm::ProjSgd, Algorithm::Ripm, Algorithm::BlockProx}) {
    if (to_string(a) == s) return a;
  }
  return std::nullopt;
}

std::optional<StartMode> parse_start_mode(const std::string& s) {
  for (auto m : {StartMode::Zero, StartMode::GroundTruth, StartMode::Certified}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

std::uint64_t data_seed(std::uint64_t master_seed) { return derive_seed(master_seed, 0xda7a); }

std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t trial) {
  return derive_seed(master_seed, 0x10000 + trial);
}

PreparedExperiment prepare_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const std::uint64_t seed = data_seed(spec.master_seed);
  auto generate = [&]() -> GeneratedProblem {
    switch (spec.problem) {
      case ProblemKind::Lasso: return gen_lasso(spec.lasso, seed);
      case ProblemKind::Logistic: return gen_logistic(spec.logistic, seed);
      case ProblemKind::NetworkLasso:
        return gen_network_lasso(spec.network,
                                 spec.algorithm == Algorithm::BlockProx ? NetworkLayout::Separable
                                                                        : NetworkLayout::Embedded,
                                 seed);
    }
    throw std::logic_error("unknown problem kind");
  };

  GeneratedProblem gen = generate();
  SolutionCertificate cert = certify_solution(gen.problem, gen.problem.x0, spec.cert_tol);
  if (spec.start != StartMode::Zero) {
    const Vector& start = spec.start == StartMode::GroundTruth ? gen.ground_truth : cert.x_star;
    gen.problem = ProblemInstance(gen.problem.oracle, gen.problem.regularizer, start, gen.problem.name);
    cert.d_star_sq = (cert.x_star - start).squaredNorm();
  }

  PreparedExperiment out{std::move(gen), std::move(cert), 0.0, 0.0};
  out.L = spec.algorithm == Algorithm::BlockProx ? full_smoothness_constant(out.generated.problem.oracle)
                                                 : smoothness_constant(out.generated.problem.oracle);
  out.initial_gap = std::max(0.0, out.generated.problem.objective(out.generated.problem.x0) - out.cert.h_star);
  return out;
}

SolverConfig solver_config(const ExperimentSpec& spec, std::size_t T, std::uint64_t seed) {
  SolverConfig config;
  config.horizon = T;
  config.seed = seed;
  config.checkpoint_stride = spec.checkpoint_stride;
  config.record_average = true;
  switch (spec.step.kind) {
    case StepSpec::Kind::Horizon:
      if (spec.algorithm == Algorithm::Ripm) {
        config.step_rule = HorizonRipmStep{spec.step.C, spec.step.beta};
      } else {
        config.step_rule = HorizonSpgdStep{spec.step.C, spec.step.beta};
      }
      break;
    case StepSpec::Kind::Fixed:
      config.step_rule = FixedStep{spec.step.tau};
      break;
    case StepSpec::Kind::Scaled:
      config.step_rule = FixedStep{spec.step.c / std::sqrt(double(T))};
      break;
  }
  return config;
}

IterateTrace run_algorithm(const ExperimentSpec& spec, const PreparedExperiment& prepared,
                           const SolverConfig& config) {
  const ProblemInstance& problem = prepared.generated.problem;
  switch (spec.algorithm) {
    case Algorithm::Spgd: return run_spgd(problem, prepared.cert, config);
    case Algorithm::ProjSgd: return run_proj_sgd(problem, prepared.cert, config);
    case Algorithm::Ripm: return run_ripm(problem, prepared.cert, config);
    case Algorithm::BlockProx: return run_blockprox(problem, prepared.cert, config);
  }
  throw std::logic_error("unknown algorithm");
}

SlopeFit fit_slope(const std::vector<double>& T, const std::vector<double>& mean,
                   const std::vector<double>& se) {
  SlopeFit fit;
  const std::size_t k = T.size();
  if (k < 2 || mean.size() != k || se.size() != k) return fit;
  std::vector<double> x(k), y(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (!(mean[i] > 0.0)) return fit;
    x[i] = std::log(T[i]);
    y[i] = std::log(mean[i]);
  }
  const double xbar = std::accumulate(x.begin(), x.end(), 0.0) / double(k);
  const double ybar = std::accumulate(y.begin(), y.end(), 0.0) / double(k);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (x[i] - xbar) * (x[i] - xbar);
    sxy += (x[i] - xbar) * (y[i] - ybar);
  }
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  double var = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double w = (x[i] - xbar) / sxx;
    const double rel = se[i] / mean[i];
    var += w * w * rel * rel;
  }
  const double half = 1.96 * std::sqrt(var);
  fit.ci_low = fit.slope - half;
  fit.ci_high = fit.slope + half;
  fit.valid = true;
  return fit;
}

std::size_t resolve_jobs(std::size_t jobs) {
  if (jobs > 0) return jobs;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

namespace {

std::optional<TheoryBound> matching_bound(const ExperimentSpec& spec, const PreparedExperiment& prep,
                                          std::size_t T) {
  if (spec.step.kind != StepSpec::Kind::Horizon || spec.algorithm == Algorithm::BlockProx) {
    return std::nullopt;
  }
  BoundInputs in;
  in.T = T;
  in.C = spec.step.C;
  in.beta = spec.step.beta;
  in.L = prep.L;
  in.d_star_sq = prep.cert.d_star_sq;
  in.sigma_star_sq = prep.cert.sigma_star_sq;
  in.initial_gap = prep.initial_gap;
  if (spec.algorithm == Algorithm::Ripm) {
    const auto& reg = prep.generated.problem.regularizer;
    in.m = double(reg.size());
    in.L_g = reg.lipschitz_g();
    return bound_ripm(in);
  }
  return bound_spgd(in);
}

std::vector<CellResult> run_cells(const ExperimentSpec& spec, const PreparedExperiment& prepared,
                                  const std::vector<std::size_t>& grid, std::size_t jobs) {
  const std::size_t trials = spec.trials;
  std::vector<CellResult> cells(grid.size() * trials);
  detail::parallel_for(cells.size(), resolve_jobs(jobs), [&](std::size_t k) {
    const std::size_t T = grid[k / trials];
    const std::size_t trial = k % trials;
    CellResult cell;
    cell.T = T;
    cell.trial = trial;
    const SolverConfig config = solver_config(spec, T, trial_seed(spec.master_seed, trial));
    try {
      const IterateTrace trace = run_algorithm(spec, prepared, config);
      cell.tau = trace.step_size_used;
      cell.gap_last = trace.final_gap_last();
      cell.gap_avg = trace.final_gap_avg();
    } catch (const DivergenceError& e) {
      cell.diverged = true;
      cell.gap_last = cell.gap_avg = kNaN;
      cell.note = e.what();
    }
    cells[k] = std::move(cell);
  });
  return cells;
}

}  // namespace

RateReport run_experiment(const ExperimentSpec& spec, std::size_t jobs) {
  const PreparedExperiment prepared = prepare_experiment(spec);
  return run_experiment(spec, prepared, jobs);
}

RateReport run_experiment(const ExperimentSpec& spec, const PreparedExperiment& prepared,
                          std::size_t jobs) {
  spec.validate();
  RateReport report;
  report.problem_name = prepared.generated.problem.name;
  report.algorithm = to_string(spec.algorithm);
  report.h_star = prepared.cert.h_star;
  report.L = prepared.L;
  report.sigma_star_sq = prepared.cert.sigma_star_sq;
  report.d_star_sq = prepared.cert.d_star_sq;
  report.initial_gap = prepared.initial_gap;
  report.cells = run_cells(spec, prepared, spec.T_grid, jobs);

  std::vector<double> Ts, means_last, ses_last, means_avg, ses_avg;
  for (std::size_t g = 0; g < spec.T_grid.size(); ++g) {
    RateRow row;
    row.T = spec.T_grid[g];
    row.tau = resolve_step(solver_config(spec, row.T, 0), prepared.L);
    std::vector<double> last, avg;
    for (std::size_t t = 0; t < spec.trials; ++t) {
      const CellResult& c = report.cells[g * spec.trials + t];
      if (c.diverged) {
        ++row.diverged;
        continue;
      }
      last.push_back(c.gap_last);
      avg.push_back(c.gap_avg);
    }
    row.completed = last.size();
    mean_se(last, row.mean_last, row.se_last);
    mean_se(avg, row.mean_avg, row.se_avg);
    row.bound = matching_bound(spec, prepared, row.T);
    if (row.completed > 0) {
      Ts.push_back(double(row.T));
      means_last.push_back(row.mean_last);
      ses_last.push_back(row.se_last);
      means_avg.push_back(row.mean_avg);
      ses_avg.push_back(row.se_avg);
    }
    report.rows.push_back(std::move(row));
  }
  report.slope_last = fit_slope(Ts, means_last, ses_last);
  report.slope_avg = fit_slope(Ts, means_avg, ses_avg);

  for (std::size_t k = 1; k < report.rows.size(); ++k) {
    const RateRow& a = report.rows[k - 1];
    const RateRow& b = report.rows[k];
    if (a.completed == 0 || b.completed == 0) continue;
    const double tol = 2.0 * std::hypot(a.se_last, b.se_last);
    if (b.mean_last > a.mean_last + tol) report.monotone = false;
  }
  return report;
}

ComparisonTable compare_last_vs_avg(const ExperimentSpec& spec, std::size_t jobs) {
  const PreparedExperiment prepared = prepare_experiment(spec);
  ComparisonTable table;
  table.T = spec.T_grid.back();
  const auto cells = run_cells(spec, prepared, {table.T}, jobs);
  for (const auto& c : cells) {
    if (c.diverged) {
      ++table.diverged;
      continue;
    }
    table.rows.push_back({c.trial, c.gap_last, c.gap_avg});
    if (c.gap_last < c.gap_avg) ++table.last_wins;
    else if (c.gap_avg < c.gap_last) ++table.avg_wins;
    else ++table.ties;
  }
  return table;
}

}  // namespace proxsgd
