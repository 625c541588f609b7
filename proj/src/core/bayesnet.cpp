// Apache License, Version 2.0, refer to LICENSE.txt

#include "core/bayesnet.hpp"

#include <algorithm>
#include <numeric>

#include "core/error.hpp"

namespace smm {

BayesNetComponent::BayesNetComponent(std::vector<TreeModel> local_trees)
    : trees_(std::move(local_trees)) {
  if (trees_.empty()) throw data_error("bayesnet: no local trees");
  for (size_t v = 0; v < trees_.size(); ++v) {
    if (trees_[v].target() != static_cast<int>(v)) {
      throw data_error("bayesnet: local tree targets must follow schema order");
    }
  }
  if (!edges_acyclic(num_variables(), edges())) {
    throw data_error("bayesnet: edge set has a cycle");
  }
}

double BayesNetComponent::log_density(const Dataset& d, size_t row) const {
  double ll = 0.0;
  for (const auto& tree : trees_) ll += tree.log_prob(d, row);
  return ll;
}

std::vector<std::pair<int, int>> BayesNetComponent::edges() const {
  std::vector<std::pair<int, int>> result;
  for (size_t v = 0; v < trees_.size(); ++v) {
    for (int parent : trees_[v].split_variables()) {
      result.emplace_back(parent, static_cast<int>(v));
    }
  }
  std::sort(result.begin(), result.end(),
            [](const auto& a, const auto& b) {
              return a.second != b.second ? a.second < b.second
                                          : a.first < b.first;
            });
  return result;
}

bool BayesNetComponent::is_marginal() const {
  return std::all_of(trees_.begin(), trees_.end(),
                     [](const TreeModel& t) { return t.leaf_count() == 1; });
}

int BayesNetComponent::free_parameters() const {
  int d = 0;
  for (const auto& t : trees_) d += t.free_parameters();
  return d;
}

void BayesNetComponent::validate(const Schema& schema) const {
  if (static_cast<int>(trees_.size()) != schema.arity()) {
    throw data_error("bayesnet: tree count does not match schema arity");
  }
  for (const auto& t : trees_) t.validate(schema);
}

bool edges_acyclic(int num_vars,
                   const std::vector<std::pair<int, int>>& edges) {
  // Kahn's algorithm
  std::vector<std::vector<int>> children(num_vars);
  std::vector<int> in_degree(num_vars, 0);
  for (const auto& [parent, child] : edges) {
    children[parent].push_back(child);
    ++in_degree[child];
  }
  std::vector<int> stack;
  for (int v = 0; v < num_vars; ++v) {
    if (in_degree[v] == 0) stack.push_back(v);
  }
  int removed = 0;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    ++removed;
    for (int c : children[v]) {
      if (--in_degree[c] == 0) stack.push_back(c);
    }
  }
  return removed == num_vars;
}

BayesNetComponent learn_marginal(const WeightedDataset& wd, double alpha,
                                 double variance_floor) {
  if (!(wd.fractional_count() > 0.0)) {
    throw numeric_error("learn_marginal: zero fractional count");
  }
  const Dataset& d = wd.data();
  std::vector<size_t> rows(d.size());
  std::iota(rows.begin(), rows.end(), 0);
  std::vector<TreeModel> trees;
  trees.reserve(d.schema().arity());
  for (int v = 0; v < d.schema().arity(); ++v) {
    double floor = d.schema().variables[v].kind == VarKind::Continuous
                       ? detail::effective_variance_floor(d, v, variance_floor)
                       : variance_floor;
    std::vector<TreeNode> nodes(1);
    nodes[0].dist = detail::fit_rows(d, wd.weights(), rows, v, alpha, floor);
    trees.emplace_back(v, std::move(nodes));
  }
  return BayesNetComponent(std::move(trees));
}

namespace {

// Is there a directed path from -> to in the parent->child edge relation?
bool reachable(const std::vector<std::vector<int>>& children, int from,
               int to) {
  if (from == to) return true;
  std::vector<int> stack{from};
  std::vector<bool> seen(children.size(), false);
  seen[from] = true;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int c : children[v]) {
      if (c == to) return true;
      if (!seen[c]) {
        seen[c] = true;
        stack.push_back(c);
      }
    }
  }
  return false;
}

}  // namespace

BayesNetComponent learn_bayesnet(const WeightedDataset& wd,
                                 const LearnConfig& cfg) {
  const Dataset& d = wd.data();
  const Schema& schema = d.schema();
  int num_vars = schema.arity();
  if (cfg.max_leaves < 1) {
    throw usage_error("learn_bayesnet: max_leaves must be >= 1");
  }
  if (!(wd.fractional_count() > 0.0)) {
    throw numeric_error("learn_bayesnet: zero fractional count");
  }

  const std::vector<double>& weights = wd.weights();
  double penalty = detail::per_param_penalty(cfg.score, wd.size());

  std::vector<double> floors(num_vars, cfg.variance_floor);
  for (int v = 0; v < num_vars; ++v) {
    if (schema.variables[v].kind == VarKind::Continuous) {
      floors[v] = detail::effective_variance_floor(d, v, cfg.variance_floor);
    }
  }

  // per-variable grow state
  std::vector<std::vector<TreeNode>> nodes(num_vars);
  std::vector<std::vector<detail::GrowLeaf>> leaves(num_vars);
  std::vector<std::vector<std::optional<detail::SplitChoice>>> cached(num_vars);
  std::vector<std::vector<bool>> is_parent(num_vars,
                                           std::vector<bool>(num_vars, false));
  std::vector<std::vector<int>> children(num_vars);  // adjacency, parent->child

  // X may split v's tree if the edge X->v already exists or creates no cycle.
  auto legal_parent = [&](int v, int x) {
    if (x == v) return false;
    if (is_parent[v][x]) return true;
    return !reachable(children, v, x);
  };
  auto legal_parents = [&](int v) {
    std::vector<int> out;
    for (int x = 0; x < num_vars; ++x) {
      if (legal_parent(v, x)) out.push_back(x);
    }
    return out;
  };

  std::vector<size_t> all_rows(d.size());
  std::iota(all_rows.begin(), all_rows.end(), 0);
  for (int v = 0; v < num_vars; ++v) {
    detail::GrowLeaf root;
    root.node_id = 0;
    root.rows = all_rows;
    root.frac_count = wd.fractional_count();
    LeafDistribution fit =
        detail::fit_rows(d, weights, root.rows, v, cfg.alpha, floors[v]);
    root.fit_score = detail::rows_log_likelihood(d, weights, root.rows, v, fit);
    nodes[v].resize(1);
    nodes[v][0].dist = std::move(fit);
    cached[v].push_back(detail::best_split(d, weights, root, v, legal_parents(v),
                                           cfg, floors[v], penalty));
    leaves[v].push_back(std::move(root));
  }

  while (true) {
    int best_v = -1, best_leaf = -1;
    for (int v = 0; v < num_vars; ++v) {
      if (leaves[v].size() >= cfg.max_leaves) continue;
      for (size_t li = 0; li < leaves[v].size(); ++li) {
        auto& entry = cached[v][li];
        if (entry && !legal_parent(v, entry->pred.variable)) {
          // the legal parent set only shrinks, so a recompute is needed only
          // when the cached winner itself became illegal
          entry = detail::best_split(d, weights, leaves[v][li], v,
                                     legal_parents(v), cfg, floors[v], penalty);
        }
        if (!entry) continue;
        if (best_v < 0 ||
            entry->improvement > cached[best_v][best_leaf]->improvement) {
          best_v = v;
          best_leaf = static_cast<int>(li);
        }
      }
    }
    if (best_v < 0 || !(cached[best_v][best_leaf]->improvement > 0.0)) break;

    detail::SplitChoice choice = std::move(*cached[best_v][best_leaf]);
    int v = best_v;
    int node_id = leaves[v][best_leaf].node_id;
    int yes_id = static_cast<int>(nodes[v].size());
    int no_id = yes_id + 1;
    nodes[v].emplace_back();
    nodes[v].emplace_back();
    nodes[v][node_id].is_leaf = false;
    nodes[v][node_id].split = choice.pred;
    nodes[v][node_id].yes = yes_id;
    nodes[v][node_id].no = no_id;
    nodes[v][node_id].dist = LeafDistribution{};
    nodes[v][yes_id].dist = std::move(choice.yes_fit);
    nodes[v][no_id].dist = std::move(choice.no_fit);

    int parent = choice.pred.variable;
    if (!is_parent[v][parent]) {
      is_parent[v][parent] = true;
      children[parent].push_back(v);
    }

    leaves[v].erase(leaves[v].begin() + best_leaf);
    cached[v].erase(cached[v].begin() + best_leaf);
    detail::GrowLeaf yes_leaf{yes_id, std::move(choice.yes_rows),
                              choice.yes_score, choice.yes_count};
    detail::GrowLeaf no_leaf{no_id, std::move(choice.no_rows), choice.no_score,
                             choice.no_count};
    leaves[v].push_back(std::move(yes_leaf));
    cached[v].push_back(detail::best_split(d, weights, leaves[v].back(), v,
                                           legal_parents(v), cfg, floors[v],
                                           penalty));
    leaves[v].push_back(std::move(no_leaf));
    cached[v].push_back(detail::best_split(d, weights, leaves[v].back(), v,
                                           legal_parents(v), cfg, floors[v],
                                           penalty));
  }

  std::vector<TreeModel> trees;
  trees.reserve(num_vars);
  for (int v = 0; v < num_vars; ++v) {
    trees.emplace_back(v, std::move(nodes[v]));
  }
  BayesNetComponent bn(std::move(trees));

  // the maintained parent sets must agree with the edges derived from trees
  std::vector<std::pair<int, int>> maintained;
  for (int v = 0; v < num_vars; ++v) {
    for (int x = 0; x < num_vars; ++x) {
      if (is_parent[v][x]) maintained.emplace_back(x, v);
    }
  }
  std::sort(maintained.begin(), maintained.end(),
            [](const auto& a, const auto& b) {
              return a.second != b.second ? a.second < b.second
                                          : a.first < b.first;
            });
  if (maintained != bn.edges()) {
    throw numeric_error("learn_bayesnet: edge bookkeeping diverged from trees");
  }
  return bn;
}

}  // namespace smm
