#include "proxsgd/regularizers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace proxsgd {

DecomposableRegularizer::DecomposableRegularizer(std::vector<ProxOperator> components,
                                                 std::size_t dim)
    : components_(std::move(components)), dim_(dim) {
  if (components_.empty()) throw std::invalid_argument("regularizer: needs at least one component");
  if (dim_ == 0) throw std::invalid_argument("regularizer: zero dimension");
  for (const auto& c : components_) lipschitz_g_ = std::max(lipschitz_g_, c.lipschitz(dim_));
}

bool DecomposableRegularizer::lipschitz_admissible() const {
  return std::none_of(components_.begin(), components_.end(),
                      [](const ProxOperator& c) { return c.is_indicator(); });
}

void DecomposableRegularizer::require_lipschitz() const {
  for (std::size_t j = 0; j < components_.size(); ++j) {
    if (components_[j].is_indicator()) {
      throw std::invalid_argument("regularizer: component " + std::to_string(j) + " (" +
                                  components_[j].name() +
                                  ") is an indicator; incremental prox needs Lipschitz g_j");
    }
  }
}

void CollaborationGraph::validate() const {
  if (num_nodes == 0) throw std::invalid_argument("graph: no nodes");
  if (block_dim == 0) throw std::invalid_argument("graph: block_dim must be positive");
  for (const auto& e : edges) {
    if (e.i == e.j) throw std::invalid_argument("graph: self-loop at node " + std::to_string(e.i));
    if (e.i >= num_nodes || e.j >= num_nodes) throw std::invalid_argument("graph: node index out of range");
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      throw std::invalid_argument("graph: edge weights must be positive");
    }
  }
}

DecomposableRegularizer build_network_lasso(const CollaborationGraph& graph, EdgeNorm norm) {
  graph.validate();
  if (graph.edges.empty()) throw std::invalid_argument("network lasso: empty edge list");
  std::vector<ProxOperator> comps;
  comps.reserve(graph.edges.size());
  for (const auto& e : graph.edges) {
    comps.push_back(ProxOperator::edge_diff(e.i, e.j, e.weight, graph.block_dim, norm));
  }
  return DecomposableRegularizer(std::move(comps), graph.num_nodes * graph.block_dim);
}

double eval_sum(const DecomposableRegularizer& reg, const Vector& x) {
  double total = 0.0;
  for (const auto& c : reg.components()) total += eval_g(c, x);
  return total;
}

std::pair<std::size_t, const ProxOperator*> sample_component(const DecomposableRegularizer& reg,
                                                             Rng& rng) {
  const std::size_t j = uniform_index(rng, reg.size());
  return {j, &reg.component(j)};
}

CollaborationGraph load_edge_list(const std::string& path, std::size_t block_dim,
                                  std::size_t num_nodes) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  CollaborationGraph g;
  g.block_dim = block_dim;
  std::string line;
  std::size_t lineno = 0;
  std::size_t max_node = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    long long i = 0, j = 0;
    double w = 0.0;
    if (!(ss >> i)) continue;
    std::string rest;
    if (!(ss >> j >> w) || (ss >> rest) || i < 0 || j < 0) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 'i j weight'");
    }
    g.edges.push_back({std::size_t(i), std::size_t(j), w});
    max_node = std::max({max_node, std::size_t(i), std::size_t(j)});
  }
  g.num_nodes = std::max(num_nodes, g.edges.empty() ? std::size_t{0} : max_node + 1);
  g.validate();
  return g;
}

}  // namespace proxsgd
