#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "proxsgd/prox.hpp"
#include "proxsgd/rng.hpp"

namespace proxsgd {

/// g = sum_j g_j over closed-form prox components.
///
/// lipschitz_g() is the uniform bound max_j Lip(g_j) on R^dim; it is +inf
/// whenever an indicator component is present.
class DecomposableRegularizer {
 public:
  DecomposableRegularizer(std::vector<ProxOperator> components, std::size_t dim);

  std::size_t size() const { return components_.size(); }
  std::size_t dim() const { return dim_; }
  double lipschitz_g() const { return lipschitz_g_; }
  const ProxOperator& component(std::size_t j) const { return components_.at(j); }
  const std::vector<ProxOperator>& components() const { return components_; }

  /// True when every component is real-valued and Lipschitz, which the
  /// incremental proximal methods require.
  bool lipschitz_admissible() const;

  /// Throws std::invalid_argument naming the first indicator component.
  void require_lipschitz() const;

 private:
  std::vector<ProxOperator> components_;
  std::size_t dim_;
  double lipschitz_g_ = 0.0;
};

struct GraphEdge {
  std::size_t i;
  std::size_t j;
  double weight;
};

struct CollaborationGraph {
  std::size_t num_nodes = 0;
  std::size_t block_dim = 1;
  std::vector<GraphEdge> edges;

  /// Throws on self-loops, out-of-range nodes, or nonpositive weights.
  void validate() const;
};

/// One EdgeDiff component per edge; L_g = max_e c * w_e.
DecomposableRegularizer build_network_lasso(const CollaborationGraph& graph,
                                            EdgeNorm norm = EdgeNorm::L2);

double eval_sum(const DecomposableRegularizer& reg, const Vector& x);

/// Uniform component draw; advances the caller's generator.
std::pair<std::size_t, const ProxOperator*> sample_component(const DecomposableRegularizer& reg,
                                                             Rng& rng);

/// Reads "i j weight" lines; '#' starts a comment. num_nodes is inferred as
/// max index + 1 unless a larger value is given.
CollaborationGraph load_edge_list(const std::string& path, std::size_t block_dim,
                                  std::size_t num_nodes = 0);

}  // namespace proxsgd
