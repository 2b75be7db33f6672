#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "proxsgd/problem.hpp"
#include "proxsgd/solvers.hpp"
#include "proxsgd/theory.hpp"

namespace proxsgd {

struct GeneratedProblem {
  ProblemInstance problem;
  Vector ground_truth;
};

enum class LassoPenalty { L1, Ball, Box };

struct LassoParams {
  std::size_t n = 50;
  std::size_t N = 200;
  std::size_t sparsity = 5;
  double noise_std = 0.1;
  double lambda = 0.1;
  /// L1 gives lambda ||x||_1; Ball and Box constrain to radius / bound lambda.
  LassoPenalty penalty = LassoPenalty::L1;
};

/// f(x) = 1/(2N) ||A x - b||^2 with A standard normal and b = A x_true + noise,
/// x_true having `sparsity` entries of +-1. x0 = 0.
GeneratedProblem gen_lasso(const LassoParams& params, std::uint64_t seed);

struct LogisticParams {
  std::size_t n = 20;
  std::size_t N = 200;
  double lambda = 0.01;
};

/// Labels drawn from the logistic model around a standard normal w_true.
GeneratedProblem gen_logistic(const LogisticParams& params, std::uint64_t seed);

enum class NetworkLayout {
  Embedded,   // one least-squares row per sample, zero outside its node block
  Separable,  // block-separable f for BlockProx
};

struct NetworkParams {
  std::size_t nodes = 10;
  std::size_t block_dim = 2;
  std::size_t samples_per_node = 20;
  double edge_prob = 0.3;  // extra edges on top of a random spanning tree
  double weight = 0.1;
  double noise_std = 0.1;
  std::size_t clusters = 2;
  EdgeNorm norm = EdgeNorm::L2;
};

/// Connected random graph; node k regresses on the parameter of cluster k % clusters.
GeneratedProblem gen_network_lasso(const NetworkParams& params, NetworkLayout layout,
                                   std::uint64_t seed);

enum class ProblemKind { Lasso, Logistic, NetworkLasso };
enum class Algorithm { Spgd, ProjSgd, Ripm, BlockProx };
enum class StartMode { Zero, GroundTruth, Certified };

struct StepSpec {
  enum class Kind {
    Horizon,  // tau = 1/(C L T^beta)
    Fixed,    // tau
    Scaled,   // tau = c / sqrt(T)
  };
  Kind kind = Kind::Horizon;
  double C = 3.0;
  double beta = 0.5;
  double tau = 0.0;
  double c = 1.0;
};

struct ExperimentSpec {
  ProblemKind problem = ProblemKind::Lasso;
  LassoParams lasso;
  LogisticParams logistic;
  NetworkParams network;
  Algorithm algorithm = Algorithm::Spgd;
  StepSpec step;
  std::vector<std::size_t> T_grid{100, 1000, 10000};
  std::size_t trials = 20;
  std::uint64_t master_seed = 1;
  StartMode start = StartMode::Zero;
  double cert_tol = 1e-10;
  std::size_t checkpoint_stride = 0;

  /// Throws std::invalid_argument on an empty or unsorted grid, zero trials,
  /// or an algorithm that does not fit the problem.
  void validate() const;
};

std::string to_string(ProblemKind kind);
std::string to_string(Algorithm algorithm);
std::string to_string(StartMode mode);
std::optional<ProblemKind> parse_problem_kind(const std::string& s);
std::optional<Algorithm> parse_algorithm(const std::string& s);
std::optional<StartMode> parse_start_mode(const std::string& s);

/// The instance, its certificate and the constants every cell shares.
struct PreparedExperiment {
  GeneratedProblem generated;
  SolutionCertificate cert;
  double L = 0.0;          // constant the step rule uses
  double initial_gap = 0.0;
};

PreparedExperiment prepare_experiment(const ExperimentSpec& spec);

SolverConfig solver_config(const ExperimentSpec& spec, std::size_t T, std::uint64_t seed);

/// Seed of the sampling streams for one trial; the dataset seed is separate.
std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t trial);
std::uint64_t data_seed(std::uint64_t master_seed);

IterateTrace run_algorithm(const ExperimentSpec& spec, const PreparedExperiment& prepared,
                           const SolverConfig& config);

struct CellResult {
  std::size_t T = 0;
  std::size_t trial = 0;
  double tau = 0.0;
  double gap_last = 0.0;
  double gap_avg = 0.0;
  bool diverged = false;
  std::string note;
};

struct RateRow {
  std::size_t T = 0;
  double tau = 0.0;
  std::size_t completed = 0;
  std::size_t diverged = 0;
  double mean_last = 0.0;
  double se_last = 0.0;
  double mean_avg = 0.0;
  double se_avg = 0.0;
  std::optional<TheoryBound> bound;
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool valid = false;
};

/// Least squares on (ln T, ln mean). The interval is slope +- 1.96 SE with
/// each ln mean carrying standard error se/mean.
SlopeFit fit_slope(const std::vector<double>& T, const std::vector<double>& mean,
                   const std::vector<double>& se);

struct RateReport {
  std::string problem_name;
  std::string algorithm;
  double h_star = 0.0;
  double L = 0.0;
  double sigma_star_sq = 0.0;
  double d_star_sq = 0.0;
  double initial_gap = 0.0;
  std::vector<CellResult> cells;  // ordered by (T, trial)
  std::vector<RateRow> rows;
  SlopeFit slope_last;
  SlopeFit slope_avg;
  /// Mean last-iterate gap nonincreasing in T up to 2 standard errors.
  bool monotone = true;
};

/// jobs = 0 uses the available hardware parallelism.
RateReport run_experiment(const ExperimentSpec& spec, std::size_t jobs = 0);

/// Same as run_experiment on an already prepared instance.
RateReport run_experiment(const ExperimentSpec& spec, const PreparedExperiment& prepared,
                          std::size_t jobs = 0);

struct ComparisonRow {
  std::size_t trial = 0;
  double gap_last = 0.0;
  double gap_avg = 0.0;
};

struct ComparisonTable {
  std::size_t T = 0;
  std::vector<ComparisonRow> rows;
  std::size_t last_wins = 0;
  std::size_t avg_wins = 0;
  std::size_t ties = 0;
  std::size_t diverged = 0;
};

/// Final last vs averaged gaps per trial at the largest grid T.
ComparisonTable compare_last_vs_avg(const ExperimentSpec& spec, std::size_t jobs = 0);

std::size_t resolve_jobs(std::size_t jobs);

}  // namespace proxsgd
