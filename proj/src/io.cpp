#include "proxsgd/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace proxsgd {

ConfigError::ConfigError(std::size_t line, const std::string& field, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ", field '" + field + "': " + message
                                  : "field '" + field + "': " + message),
      line_(line),
      field_(field) {}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Field {
  std::size_t line;
  std::string key;
  std::string value;

  ConfigError error(const std::string& message) const { return ConfigError(line, key, message); }

  double as_double() const {
    double out = 0.0;
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end || !std::isfinite(out)) throw error("expected a number, got '" + value + "'");
    return out;
  }

  std::uint64_t as_uint() const {
    std::uint64_t out = 0;
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end) throw error("expected a nonnegative integer, got '" + value + "'");
    return out;
  }

  std::vector<std::size_t> as_uint_list() const {
    std::vector<std::size_t> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      Field sub{line, key, trim(item)};
      out.push_back(static_cast<std::size_t>(sub.as_uint()));
    }
    if (out.empty()) throw error("expected a comma separated list");
    return out;
  }
};

using Setter = std::function<void(ExperimentSpec&, const Field&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"problem",
       [](ExperimentSpec& s, const Field& f) {
         const auto k = parse_problem_kind(f.value);
         if (!k) throw f.error("unknown problem '" + f.value + "' (lasso, logistic, network_lasso)");
         s.problem = *k;
       }},
      {"algorithm",
       [](ExperimentSpec& s, const Field& f) {
         const auto a = parse_algorithm(f.value);
         if (!a) throw f.error("unknown algorithm '" + f.value + "' (spgd, proj_sgd, ripm, blockprox)");
         s.algorithm = *a;
       }},
      {"n",
       [](ExperimentSpec& s, const Field& f) {
         s.lasso.n = s.logistic.n = static_cast<std::size_t>(f.as_uint());
       }},
      {"N",
       [](ExperimentSpec& s, const Field& f) {
         s.lasso.N = s.logistic.N = static_cast<std::size_t>(f.as_uint());
       }},
      {"sparsity",
       [](ExperimentSpec& s, const Field& f) { s.lasso.sparsity = static_cast<std::size_t>(f.as_uint()); }},
      {"noise_std",
       [](ExperimentSpec& s, const Field& f) { s.lasso.noise_std = s.network.noise_std = f.as_double(); }},
      {"lambda",
       [](ExperimentSpec& s, const Field& f) {
         s.lasso.lambda = s.logistic.lambda = s.network.weight = f.as_double();
       }},
      {"penalty",
       [](ExperimentSpec& s, const Field& f) {
         if (f.value == "l1") s.lasso.penalty = LassoPenalty::L1;
         else if (f.value == "ball") s.lasso.penalty = LassoPenalty::Ball;
         else if (f.value == "box") s.lasso.penalty = LassoPenalty::Box;
         else throw f.error("unknown penalty '" + f.value + "' (l1, ball, box)");
       }},
      {"nodes",
       [](ExperimentSpec& s, const Field& f) { s.network.nodes = static_cast<std::size_t>(f.as_uint()); }},
      {"block_dim",
       [](ExperimentSpec& s, const Field& f) { s.network.block_dim = static_cast<std::size_t>(f.as_uint()); }},
      {"samples_per_node",
       [](ExperimentSpec& s, const Field& f) {
         s.network.samples_per_node = static_cast<std::size_t>(f.as_uint());
       }},
      {"edge_prob", [](ExperimentSpec& s, const Field& f) { s.network.edge_prob = f.as_double(); }},
      {"clusters",
       [](ExperimentSpec& s, const Field& f) { s.network.clusters = static_cast<std::size_t>(f.as_uint()); }},
      {"edge_norm",
       [](ExperimentSpec& s, const Field& f) {
         if (f.value == "l2") s.network.norm = EdgeNorm::L2;
         else if (f.value == "l1") s.network.norm = EdgeNorm::L1;
         else throw f.error("unknown edge norm '" + f.value + "' (l2, l1)");
       }},
      {"step",
       [](ExperimentSpec& s, const Field& f) {
         if (f.value == "horizon") s.step.kind = StepSpec::Kind::Horizon;
         else if (f.value == "fixed") s.step.kind = StepSpec::Kind::Fixed;
         else if (f.value == "scaled") s.step.kind = StepSpec::Kind::Scaled;
         else throw f.error("unknown step rule '" + f.value + "' (horizon, fixed, scaled)");
       }},
      {"C", [](ExperimentSpec& s, const Field& f) { s.step.C = f.as_double(); }},
      {"beta", [](ExperimentSpec& s, const Field& f) { s.step.beta = f.as_double(); }},
      {"tau", [](ExperimentSpec& s, const Field& f) { s.step.tau = f.as_double(); }},
      {"step_scale", [](ExperimentSpec& s, const Field& f) { s.step.c = f.as_double(); }},
      {"T_grid", [](ExperimentSpec& s, const Field& f) { s.T_grid = f.as_uint_list(); }},
      {"trials",
       [](ExperimentSpec& s, const Field& f) { s.trials = static_cast<std::size_t>(f.as_uint()); }},
      {"seed", [](ExperimentSpec& s, const Field& f) { s.master_seed = f.as_uint(); }},
      {"x0",
       [](ExperimentSpec& s, const Field& f) {
         const auto m = parse_start_mode(f.value);
         if (!m) throw f.error("unknown start '" + f.value + "' (zero, ground_truth, certified)");
         s.start = *m;
       }},
      {"cert_tol", [](ExperimentSpec& s, const Field& f) { s.cert_tol = f.as_double(); }},
      {"checkpoint_stride",
       [](ExperimentSpec& s, const Field& f) {
         s.checkpoint_stride = static_cast<std::size_t>(f.as_uint());
       }},
  };
  return table;
}

}  // namespace

ExperimentSpec parse_config(const std::string& text) {
  ExperimentSpec spec;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(line_no, line, "expected 'key = value'");
    Field field{line_no, trim(line.substr(0, eq)), trim(line.substr(eq + 1))};
    if (field.key.empty()) throw ConfigError(line_no, "", "missing key");
    if (field.value.empty()) throw field.error("missing value");
    const auto it = setters().find(field.key);
    if (it == setters().end()) throw field.error("unknown key");
    if (!seen.insert(field.key).second) throw field.error("key given twice");
    it->second(spec, field);
  }
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(0, "experiment", e.what());
  }
  return spec;
}

ExperimentSpec load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "config", "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string format_config(const ExperimentSpec& s) {
  std::ostringstream os;
  auto kv = [&](const char* k, const std::string& v) { os << k << " = " << v << '\n'; };
  auto num = [&](const char* k, double v) { kv(k, format_double(v)); };
  kv("problem", to_string(s.problem));
  kv("algorithm", to_string(s.algorithm));
  switch (s.problem) {
    case ProblemKind::Lasso:
      kv("n", std::to_string(s.lasso.n));
      kv("N", std::to_string(s.lasso.N));
      kv("sparsity", std::to_string(s.lasso.sparsity));
      num("noise_std", s.lasso.noise_std);
      num("lambda", s.lasso.lambda);
      kv("penalty", s.lasso.penalty == LassoPenalty::L1    ? "l1"
                    : s.lasso.penalty == LassoPenalty::Ball ? "ball"
                                                            : "box");
      break;
    case ProblemKind::Logistic:
      kv("n", std::to_string(s.logistic.n));
      kv("N", std::to_string(s.logistic.N));
      num("lambda", s.logistic.lambda);
      break;
    case ProblemKind::NetworkLasso:
      kv("nodes", std::to_string(s.network.nodes));
      kv("block_dim", std::to_string(s.network.block_dim));
      kv("samples_per_node", std::to_string(s.network.samples_per_node));
      num("edge_prob", s.network.edge_prob);
      num("lambda", s.network.weight);
      num("noise_std", s.network.noise_std);
      kv("clusters", std::to_string(s.network.clusters));
      kv("edge_norm", s.network.norm == EdgeNorm::L2 ? "l2" : "l1");
      break;
  }
  switch (s.step.kind) {
    case StepSpec::Kind::Horizon:
      kv("step", "horizon");
      num("C", s.step.C);
      num("beta", s.step.beta);
      break;
    case StepSpec::Kind::Fixed:
      kv("step", "fixed");
      num("tau", s.step.tau);
      break;
    case StepSpec::Kind::Scaled:
      kv("step", "scaled");
      num("step_scale", s.step.c);
      break;
  }
  std::string grid;
  for (std::size_t k = 0; k < s.T_grid.size(); ++k) grid += (k ? "," : "") + std::to_string(s.T_grid[k]);
  kv("T_grid", grid);
  kv("trials", std::to_string(s.trials));
  kv("seed", std::to_string(s.master_seed));
  kv("x0", to_string(s.start));
  num("cert_tol", s.cert_tol);
  kv("checkpoint_stride", std::to_string(s.checkpoint_stride));
  return os.str();
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string cells_csv(const RateReport& report) {
  std::ostringstream os;
  os << "T,trial,tau,gap_last,gap_avg,diverged\n";
  for (const auto& c : report.cells) {
    os << c.T << ',' << c.trial << ',' << format_double(c.tau) << ',' << format_double(c.gap_last) << ','
       << format_double(c.gap_avg) << ',' << (c.diverged ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string plot_csv(const RateReport& report) {
  std::ostringstream os;
  os << "T,series,value,se\n";
  for (const auto& r : report.rows) {
    os << r.T << ",last," << format_double(r.mean_last) << ',' << format_double(r.se_last) << '\n';
    os << r.T << ",average," << format_double(r.mean_avg) << ',' << format_double(r.se_avg) << '\n';
    if (r.bound) os << r.T << ",bound," << format_double(r.bound->total) << ",0\n";
  }
  return os.str();
}

std::string comparison_csv(const ComparisonTable& table) {
  std::ostringstream os;
  os << "trial,gap_last,gap_avg,last_wins\n";
  for (const auto& r : table.rows) {
    os << r.trial << ',' << format_double(r.gap_last) << ',' << format_double(r.gap_avg) << ','
       << (r.gap_last < r.gap_avg ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string trace_csv(const IterateTrace& trace) {
  std::ostringstream os;
  os << "t,gap_last,gap_avg\n";
  for (const auto& p : trace.checkpoints) {
    os << p.t << ',' << format_double(p.gap_last) << ',' << format_double(p.gap_avg) << '\n';
  }
  return os.str();
}

namespace {

nlohmann::json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

nlohmann::json to_json(const SlopeFit& fit) {
  if (!fit.valid) return nullptr;
  return {{"slope", fit.slope}, {"intercept", fit.intercept}, {"ci_low", fit.ci_low}, {"ci_high", fit.ci_high}};
}

}  // namespace

nlohmann::json to_json(const TheoryBound& b) {
  return {{"total", number(b.total)},
          {"A", number(b.A_const)},
          {"v", number(b.v)},
          {"terms",
           {{"distance", number(b.terms.distance)},
            {"initial_gap", number(b.terms.initial_gap)},
            {"variance", number(b.terms.variance)},
            {"variance_log", number(b.terms.variance_log)},
            {"prox_noise", number(b.terms.prox_noise)},
            {"prox_noise_log", number(b.terms.prox_noise_log)}}}};
}

nlohmann::json to_json(const RateReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"T", r.T},
                    {"tau", number(r.tau)},
                    {"completed", r.completed},
                    {"diverged", r.diverged},
                    {"mean_last", number(r.mean_last)},
                    {"se_last", number(r.se_last)},
                    {"mean_avg", number(r.mean_avg)},
                    {"se_avg", number(r.se_avg)},
                    {"bound", r.bound ? to_json(*r.bound) : nlohmann::json(nullptr)}});
  }
  nlohmann::json diverged = nlohmann::json::array();
  for (const auto& c : report.cells) {
    if (c.diverged) diverged.push_back({{"T", c.T}, {"trial", c.trial}, {"note", c.note}});
  }
  return {{"problem", report.problem_name},
          {"algorithm", report.algorithm},
          {"h_star", number(report.h_star)},
          {"L", number(report.L)},
          {"sigma_star_sq", number(report.sigma_star_sq)},
          {"d_star_sq", number(report.d_star_sq)},
          {"initial_gap", number(report.initial_gap)},
          {"rows", rows},
          {"slope_last", to_json(report.slope_last)},
          {"slope_avg", to_json(report.slope_avg)},
          {"monotone", report.monotone},
          {"diverged_cells", diverged}};
}

nlohmann::json to_json(const ComparisonTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"trial", r.trial}, {"gap_last", number(r.gap_last)}, {"gap_avg", number(r.gap_avg)}});
  }
  return {{"T", table.T},
          {"last_wins", table.last_wins},
          {"avg_wins", table.avg_wins},
          {"ties", table.ties},
          {"diverged", table.diverged},
          {"rows", rows}};
}

}  // namespace proxsgd
