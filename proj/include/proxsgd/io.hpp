#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "proxsgd/bench.hpp"

namespace proxsgd {

/// Parse failure in a config file; line is 1-based, 0 when not tied to a line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::size_t line, const std::string& field, const std::string& message);
  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

/// Flat "key = value" text, '#' comments. Unknown or repeated keys are errors.
/// Shared keys (n, N, lambda, noise_std) apply to whichever problem is chosen.
ExperimentSpec parse_config(const std::string& text);
ExperimentSpec load_config(const std::filesystem::path& path);

/// Canonical key = value listing of every field; stable across runs.
std::string format_config(const ExperimentSpec& spec);

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t value);

/// Writes to a sibling temp file, then renames over the target.
void write_atomic(const std::filesystem::path& path, const std::string& content);

std::string format_double(double value);

/// One row per (T, trial).
std::string cells_csv(const RateReport& report);
/// Long format: T, series, value, se.
std::string plot_csv(const RateReport& report);
std::string comparison_csv(const ComparisonTable& table);
std::string trace_csv(const IterateTrace& trace);

nlohmann::json to_json(const TheoryBound& bound);
nlohmann::json to_json(const RateReport& report);
nlohmann::json to_json(const ComparisonTable& table);

}  // namespace proxsgd
