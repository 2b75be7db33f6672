#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace proxsgd {

enum class VerifyScope { Alpha, Prox, Variance, Descent, Bounds, All };

std::optional<VerifyScope> parse_verify_scope(const std::string& s);
std::string to_string(VerifyScope scope);

struct VerifyCheck {
  std::string scope;
  std::string name;
  std::string cell;  // identifies the grid point
  bool pass = false;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  std::size_t failures() const;
  bool all_pass() const { return failures() == 0; }
};

/// Runs the invariant grids of a scope. Cells are independent and run on
/// `jobs` workers; the check order is fixed regardless of scheduling.
VerifyReport run_verify(VerifyScope scope, std::uint64_t seed = 7, std::size_t jobs = 0);

nlohmann::json to_json(const VerifyReport& report);

}  // namespace proxsgd
