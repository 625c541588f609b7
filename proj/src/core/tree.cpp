// Apache License, Version 2.0, refer to LICENSE.txt

#include "core/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/error.hpp"

namespace smm {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

double LeafDistribution::log_prob(double value) const {
  if (kind == Kind::Multinomial) {
    double p = probs[static_cast<size_t>(value)];
    return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
  }
  double diff = value - mean;
  return -0.5 * (kLog2Pi + std::log(variance)) - diff * diff / (2.0 * variance);
}

TreeModel::TreeModel(int target, std::vector<TreeNode> nodes)
    : target_(target), nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw data_error("tree: no nodes");
  for (const auto& n : nodes_) {
    if (n.is_leaf) {
      ++leaf_count_;
    } else {
      if (n.yes < 0 || n.no < 0 || n.yes >= static_cast<int>(nodes_.size()) ||
          n.no >= static_cast<int>(nodes_.size())) {
        throw data_error("tree: child index out of range");
      }
      if (n.split.variable == target_) {
        throw data_error("tree: split on the target variable");
      }
    }
  }
}

const TreeNode& TreeModel::leaf_for(const Dataset& d, size_t row) const {
  const TreeNode* n = &nodes_[0];
  while (!n->is_leaf) {
    n = &nodes_[n->split.eval(d, row) ? n->yes : n->no];
  }
  return *n;
}

int TreeModel::free_parameters() const {
  int d = 0;
  for (const auto& n : nodes_) {
    if (n.is_leaf) d += n.dist.free_parameters();
  }
  return d;
}

std::vector<int> TreeModel::split_variables() const {
  std::vector<int> vars;
  for (const auto& n : nodes_) {
    if (!n.is_leaf) vars.push_back(n.split.variable);
  }
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  return vars;
}

void TreeModel::validate(const Schema& schema) const {
  if (target_ < 0 || target_ >= schema.arity()) {
    throw data_error("tree: target index out of range");
  }
  const Variable& tv = schema.variables[target_];
  for (const auto& n : nodes_) {
    if (n.is_leaf) {
      if (tv.kind == VarKind::Discrete) {
        if (n.dist.kind != LeafDistribution::Kind::Multinomial ||
            n.dist.probs.size() != tv.states.size()) {
          throw data_error("tree: leaf distribution does not match target");
        }
        double sum = 0.0;
        for (double p : n.dist.probs) {
          if (!(p >= 0.0)) throw data_error("tree: negative leaf probability");
          sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
          throw data_error("tree: leaf probabilities do not sum to 1");
        }
      } else if (n.dist.kind != LeafDistribution::Kind::Gaussian ||
                 !(n.dist.variance > 0.0)) {
        throw data_error("tree: invalid gaussian leaf");
      }
    } else {
      int v = n.split.variable;
      if (v < 0 || v >= schema.arity()) {
        throw data_error("tree: split variable out of range");
      }
      const Variable& sv = schema.variables[v];
      if (n.split.test == VarKind::Discrete) {
        if (sv.kind != VarKind::Discrete || n.split.state < 0 ||
            n.split.state >= static_cast<int>(sv.states.size())) {
          throw data_error("tree: bad discrete split");
        }
      } else {
        if (sv.kind != VarKind::Continuous ||
            !std::isfinite(n.split.threshold)) {
          throw data_error("tree: bad continuous split");
        }
      }
    }
  }
}

namespace detail {

std::vector<double> split_points_for_rows(const Dataset& d,
                                          const std::vector<double>& weights,
                                          const std::vector<size_t>& rows,
                                          int variable) {
  // (value, weight) for positively weighted rows
  std::vector<std::pair<double, double>> vw;
  vw.reserve(rows.size());
  for (size_t r : rows) {
    if (weights[r] > 0.0) vw.emplace_back(d.value(r, variable), weights[r]);
  }
  if (vw.empty()) return {};
  std::sort(vw.begin(), vw.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  // collapse to distinct values with summed weights
  std::vector<double> values, cum;
  double total = 0.0;
  for (const auto& [v, w] : vw) {
    if (values.empty() || v != values.back()) {
      values.push_back(v);
      cum.push_back(0.0);
    }
    total += w;
    cum.back() = total;
  }
  if (values.size() < 2) return {};

  std::vector<double> points;
  size_t j = 0;
  for (int k = 1; k <= 7; ++k) {
    double want = total * (static_cast<double>(k) / 8.0);
    while (j + 1 < values.size() && cum[j] < want) ++j;
    if (cum[j] < want) break;  // quantile lands on the largest value
    if (j + 1 >= values.size()) break;
    double t = 0.5 * (values[j] + values[j + 1]);
    if (points.empty() || t != points.back()) points.push_back(t);
  }
  return points;
}

LeafDistribution fit_rows(const Dataset& d, const std::vector<double>& weights,
                          const std::vector<size_t>& rows, int target,
                          double alpha, double variance_floor) {
  const Variable& tv = d.schema().variables[target];
  LeafDistribution leaf;
  if (tv.kind == VarKind::Discrete) {
    size_t k = tv.states.size();
    std::vector<double> counts(k, 0.0);
    double total = 0.0;
    for (size_t r : rows) {
      counts[d.state(r, target)] += weights[r];
      total += weights[r];
    }
    double denom = total + alpha * static_cast<double>(k);
    if (denom <= 0.0) {
      throw numeric_error("leaf fit: zero fractional count with alpha = 0");
    }
    leaf.kind = LeafDistribution::Kind::Multinomial;
    leaf.alpha = alpha;
    leaf.probs.resize(k);
    for (size_t s = 0; s < k; ++s) leaf.probs[s] = (counts[s] + alpha) / denom;
  } else {
    double total = 0.0, sum = 0.0;
    for (size_t r : rows) {
      total += weights[r];
      sum += weights[r] * d.value(r, target);
    }
    if (total <= 0.0) {
      throw numeric_error("leaf fit: gaussian leaf with zero fractional count");
    }
    double mean = sum / total;
    double ss = 0.0;
    for (size_t r : rows) {
      double diff = d.value(r, target) - mean;
      ss += weights[r] * diff * diff;
    }
    leaf.kind = LeafDistribution::Kind::Gaussian;
    leaf.mean = mean;
    leaf.variance = std::max(ss / total, variance_floor);
  }
  return leaf;
}

double rows_log_likelihood(const Dataset& d, const std::vector<double>& weights,
                           const std::vector<size_t>& rows, int target,
                           const LeafDistribution& fit) {
  double ll = 0.0;
  for (size_t r : rows) {
    double w = weights[r];
    if (w > 0.0) ll += w * fit.log_prob(d.value(r, target));
  }
  return ll;
}

double per_param_penalty(const ModelScore& score, size_t num_cases) {
  switch (score.kind) {
    case ScoreKind::ML:
      return 0.0;
    case ScoreKind::BIC:
      if (num_cases == 0) {
        throw numeric_error("BIC: empty data set");
      }
      return 0.5 * std::log(static_cast<double>(num_cases));
    case ScoreKind::PenalizedML:
      if (!(score.kappa > 0.0 && score.kappa <= 1.0)) {
        throw usage_error("PenalizedML: kappa must be in (0,1]");
      }
      return -std::log(score.kappa);
  }
  return 0.0;
}

double effective_variance_floor(const Dataset& d, int variable,
                                double configured_floor) {
  size_t n = d.size();
  if (n == 0) return configured_floor;
  double mean = 0.0;
  for (size_t r = 0; r < n; ++r) mean += d.value(r, variable);
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (size_t r = 0; r < n; ++r) {
    double diff = d.value(r, variable) - mean;
    ss += diff * diff;
  }
  return std::max(configured_floor, 1e-6 * ss / static_cast<double>(n));
}

std::optional<SplitChoice> best_split(const Dataset& d,
                                      const std::vector<double>& weights,
                                      const GrowLeaf& leaf, int target,
                                      std::span<const int> predictors,
                                      const LearnConfig& cfg,
                                      double effective_floor, double penalty) {
  const Schema& schema = d.schema();
  int delta_params =
      schema.variables[target].kind == VarKind::Discrete
          ? static_cast<int>(schema.variables[target].states.size()) - 1
          : 2;
  double gamma = cfg.gamma;

  std::optional<SplitChoice> best;
  std::vector<size_t> yes_rows, no_rows;
  auto consider = [&](const SplitPredicate& pred) {
    yes_rows.clear();
    no_rows.clear();
    double yes_count = 0.0, no_count = 0.0;
    for (size_t r : leaf.rows) {
      if (pred.eval(d, r)) {
        yes_rows.push_back(r);
        yes_count += weights[r];
      } else {
        no_rows.push_back(r);
        no_count += weights[r];
      }
    }
    if (!(yes_count > 0.0) || !(no_count > 0.0)) return;
    if (yes_count < gamma || no_count < gamma) return;

    LeafDistribution yes_fit =
        fit_rows(d, weights, yes_rows, target, cfg.alpha, effective_floor);
    LeafDistribution no_fit =
        fit_rows(d, weights, no_rows, target, cfg.alpha, effective_floor);
    double yes_score = rows_log_likelihood(d, weights, yes_rows, target, yes_fit);
    double no_score = rows_log_likelihood(d, weights, no_rows, target, no_fit);
    double improvement =
        (yes_score + no_score - leaf.fit_score) - delta_params * penalty;
    if (!best || improvement > best->improvement) {
      SplitChoice c;
      c.pred = pred;
      c.improvement = improvement;
      c.yes_fit = std::move(yes_fit);
      c.no_fit = std::move(no_fit);
      c.yes_score = yes_score;
      c.no_score = no_score;
      c.yes_rows = yes_rows;
      c.no_rows = no_rows;
      c.yes_count = yes_count;
      c.no_count = no_count;
      best = std::move(c);
    }
  };

  for (int p : predictors) {
    const Variable& pv = schema.variables[p];
    if (pv.kind == VarKind::Discrete) {
      for (int s = 0; s < static_cast<int>(pv.states.size()); ++s) {
        SplitPredicate pred;
        pred.variable = p;
        pred.test = VarKind::Discrete;
        pred.state = s;
        consider(pred);
      }
    } else {
      for (double t : split_points_for_rows(d, weights, leaf.rows, p)) {
        SplitPredicate pred;
        pred.variable = p;
        pred.test = VarKind::Continuous;
        pred.threshold = t;
        consider(pred);
      }
    }
  }
  return best;
}

}  // namespace detail

std::vector<double> candidate_split_points(const WeightedDataset& wd,
                                           int variable) {
  const Schema& schema = wd.data().schema();
  if (variable < 0 || variable >= schema.arity() ||
      schema.variables[variable].kind != VarKind::Continuous) {
    throw usage_error("candidate_split_points: variable must be continuous");
  }
  if (!(wd.fractional_count() > 0.0)) {
    throw numeric_error("candidate_split_points: all weights zero");
  }
  std::vector<size_t> rows(wd.size());
  std::iota(rows.begin(), rows.end(), 0);
  return detail::split_points_for_rows(wd.data(), wd.weights(), rows, variable);
}

LeafDistribution weighted_leaf_fit(const WeightedDataset& wd, int target,
                                   double alpha, double variance_floor) {
  std::vector<size_t> rows(wd.size());
  std::iota(rows.begin(), rows.end(), 0);
  return detail::fit_rows(wd.data(), wd.weights(), rows, target, alpha,
                          variance_floor);
}

double model_score(const TreeModel& tree, const WeightedDataset& wd,
                   const ModelScore& score) {
  const Dataset& d = wd.data();
  double ml = 0.0;
  for (size_t r = 0; r < wd.size(); ++r) {
    double w = wd.weight(r);
    if (w > 0.0) ml += w * tree.log_prob(d, r);
  }
  return ml -
         tree.free_parameters() * detail::per_param_penalty(score, wd.size());
}

TreeModel learn_tree(const WeightedDataset& wd, int target,
                     const std::vector<int>& predictors,
                     const LearnConfig& cfg) {
  const Dataset& d = wd.data();
  const Schema& schema = d.schema();
  if (cfg.max_leaves < 1) throw usage_error("learn_tree: max_leaves must be >= 1");
  if (target < 0 || target >= schema.arity()) {
    throw usage_error("learn_tree: target out of range");
  }
  for (int p : predictors) {
    if (p == target) throw usage_error("learn_tree: predictors include target");
    if (p < 0 || p >= schema.arity()) {
      throw usage_error("learn_tree: predictor out of range");
    }
  }
  if (!(wd.fractional_count() > 0.0)) {
    throw numeric_error("learn_tree: zero fractional count");
  }

  double floor = schema.variables[target].kind == VarKind::Continuous
                     ? detail::effective_variance_floor(d, target,
                                                        cfg.variance_floor)
                     : cfg.variance_floor;
  double penalty = detail::per_param_penalty(cfg.score, wd.size());
  const std::vector<double>& weights = wd.weights();

  std::vector<TreeNode> nodes(1);
  std::vector<detail::GrowLeaf> leaves;
  std::vector<std::optional<detail::SplitChoice>> cached;

  {
    detail::GrowLeaf root;
    root.node_id = 0;
    root.rows.resize(d.size());
    std::iota(root.rows.begin(), root.rows.end(), 0);
    root.frac_count = wd.fractional_count();
    LeafDistribution fit =
        detail::fit_rows(d, weights, root.rows, target, cfg.alpha, floor);
    root.fit_score =
        detail::rows_log_likelihood(d, weights, root.rows, target, fit);
    nodes[0].dist = std::move(fit);
    cached.push_back(detail::best_split(d, weights, root, target, predictors,
                                        cfg, floor, penalty));
    leaves.push_back(std::move(root));
  }

  size_t leaf_count = 1;
  while (leaf_count < cfg.max_leaves) {
    // leaves are in creation order; strict > keeps the earliest candidate
    int pick = -1;
    for (size_t i = 0; i < leaves.size(); ++i) {
      if (!cached[i]) continue;
      if (pick < 0 || cached[i]->improvement > cached[pick]->improvement) {
        pick = static_cast<int>(i);
      }
    }
    if (pick < 0 || !(cached[pick]->improvement > 0.0)) break;

    detail::SplitChoice choice = std::move(*cached[pick]);
    int node_id = leaves[pick].node_id;
    int yes_id = static_cast<int>(nodes.size());
    int no_id = yes_id + 1;
    nodes.emplace_back();
    nodes.emplace_back();
    nodes[node_id].is_leaf = false;
    nodes[node_id].split = choice.pred;
    nodes[node_id].yes = yes_id;
    nodes[node_id].no = no_id;
    nodes[node_id].dist = LeafDistribution{};
    nodes[yes_id].dist = std::move(choice.yes_fit);
    nodes[no_id].dist = std::move(choice.no_fit);

    detail::GrowLeaf yes_leaf{yes_id, std::move(choice.yes_rows),
                              choice.yes_score, choice.yes_count};
    detail::GrowLeaf no_leaf{no_id, std::move(choice.no_rows), choice.no_score,
                             choice.no_count};

    leaves.erase(leaves.begin() + pick);
    cached.erase(cached.begin() + pick);
    leaves.push_back(std::move(yes_leaf));
    cached.push_back(detail::best_split(d, weights, leaves.back(), target,
                                        predictors, cfg, floor, penalty));
    leaves.push_back(std::move(no_leaf));
    cached.push_back(detail::best_split(d, weights, leaves.back(), target,
                                        predictors, cfg, floor, penalty));
    ++leaf_count;
  }

  return TreeModel(target, std::move(nodes));
}

}  // namespace smm
