#include "proxsgd/problem.hpp"

#include <stdexcept>

namespace proxsgd {

ProblemInstance::ProblemInstance(SmoothOracle f, DecomposableRegularizer g, Vector start,
                                 std::string label)
    : oracle(std::move(f)), regularizer(std::move(g)), x0(std::move(start)), name(std::move(label)) {
  if (regularizer.dim() != oracle.dim()) {
    throw std::invalid_argument("problem: regularizer and oracle dimensions differ");
  }
  if (static_cast<std::size_t>(x0.size()) != oracle.dim()) {
    throw std::invalid_argument("problem: x0 has wrong dimension");
  }
  if (!x0.allFinite()) throw std::invalid_argument("problem: x0 is not finite");
}

double ProblemInstance::objective(const Vector& x) const {
  return oracle.value(x) + eval_sum(regularizer, x);
}

const ProxOperator& ProblemInstance::monolithic_prox() const {
  if (!has_monolithic_prox()) {
    throw std::logic_error("problem: regularizer has " + std::to_string(regularizer.size()) +
                           " components; no monolithic prox");
  }
  return regularizer.component(0);
}

}  // namespace proxsgd
