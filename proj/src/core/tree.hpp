// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef SMM_CORE_TREE_HPP
#define SMM_CORE_TREE_HPP

#include <optional>
#include <span>
#include <vector>

#include "core/data.hpp"

namespace smm {

enum class ScoreKind { ML, BIC, PenalizedML };

// Model score selector. ML is the weighted log-likelihood; BIC subtracts
// (d/2) ln N with N the number of cases in the weighted data set; PenalizedML
// adds d ln kappa (the log of a kappa^d structure prior).
struct ModelScore {
  ScoreKind kind = ScoreKind::ML;
  double kappa = 1.0;  // PenalizedML only, in (0, 1]
};

struct SplitPredicate {
  int variable = -1;
  VarKind test = VarKind::Discrete;  // Discrete: equals state; Continuous: value < threshold
  int state = 0;
  double threshold = 0.0;

  bool eval(const Dataset& d, size_t row) const {
    return test == VarKind::Discrete ? d.state(row, variable) == state
                                     : d.value(row, variable) < threshold;
  }
};

struct LeafDistribution {
  enum class Kind { Multinomial, Gaussian };

  Kind kind = Kind::Multinomial;
  std::vector<double> probs;  // multinomial: simplex over target states
  double alpha = 0.0;         // smoothing used by the fit
  double mean = 0.0;          // gaussian
  double variance = 1.0;      // gaussian, >= configured floor

  // ln p(value); value is a state index for multinomial leaves.
  double log_prob(double value) const;
  int free_parameters() const {
    return kind == Kind::Multinomial ? static_cast<int>(probs.size()) - 1 : 2;
  }
};

struct TreeNode {
  bool is_leaf = true;
  SplitPredicate split;  // internal nodes
  int yes = -1;          // child when the predicate holds
  int no = -1;
  LeafDistribution dist;  // leaves
};

// Immutable decision/regression tree for one target variable. Nodes live in
// a flat pool with index links; node 0 is the root.
class TreeModel {
 public:
  TreeModel(int target, std::vector<TreeNode> nodes);

  int target() const { return target_; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& root() const { return nodes_[0]; }
  size_t leaf_count() const { return leaf_count_; }

  const TreeNode& leaf_for(const Dataset& d, size_t row) const;
  // ln p(target value of the case | its other values)
  double log_prob(const Dataset& d, size_t row) const {
    return leaf_for(d, row).dist.log_prob(d.value(row, target_));
  }

  int free_parameters() const;
  // Distinct predictor variables appearing in split predicates, ascending.
  std::vector<int> split_variables() const;

  void validate(const Schema& schema) const;

 private:
  int target_;
  std::vector<TreeNode> nodes_;
  size_t leaf_count_ = 0;
};

struct LearnConfig {
  size_t max_leaves = 8;  // L; kUnboundedLeaves for no bound
  ModelScore score;
  double alpha = 1.0;           // multinomial smoothing
  double variance_floor = 1e-9; // absolute part of the gaussian floor
  double gamma = 1.0;           // min fractional count per prospective child
};

inline constexpr size_t kUnboundedLeaves = static_cast<size_t>(-1);

// Candidate thresholds for a continuous variable: the weighted k/8 quantiles
// (k = 1..7) of the variable's weighted empirical distribution. The quantile
// rule: for each k, take the smallest distinct value whose cumulative weight
// reaches k/8 of the total, and emit the midpoint between it and the next
// distinct value; quantiles landing on the largest value emit nothing.
// Duplicates are removed, so at most 7 ascending thresholds come back.
std::vector<double> candidate_split_points(const WeightedDataset& wd,
                                           int variable);

// Weighted leaf estimate. Multinomial: p_k = (count_k + alpha) /
// (total + alpha K). Gaussian: weighted mean and ML variance (denominator
// sum of weights), clamped below by variance_floor.
LeafDistribution weighted_leaf_fit(const WeightedDataset& wd, int target,
                                   double alpha, double variance_floor);

double model_score(const TreeModel& tree, const WeightedDataset& wd,
                   const ModelScore& score);

// Greedy bounded-leaves growth: start from a single leaf and repeatedly
// apply, over all current leaves, the predictor/split-point pair with the
// greatest strict score improvement. Deterministic: leaves are visited in
// creation order, predictors in the order given, split points in generation
// order, and ties keep the earliest candidate.
TreeModel learn_tree(const WeightedDataset& wd, int target,
                     const std::vector<int>& predictors,
                     const LearnConfig& cfg);

// --- internals shared with the Bayesian-network learner ---

namespace detail {

struct GrowLeaf {
  int node_id = 0;
  std::vector<size_t> rows;
  double fit_score = 0.0;  // weighted log-likelihood at this leaf
  double frac_count = 0.0;
};

struct SplitChoice {
  SplitPredicate pred;
  double improvement = 0.0;
  LeafDistribution yes_fit, no_fit;
  double yes_score = 0.0, no_score = 0.0;
  std::vector<size_t> yes_rows, no_rows;
  double yes_count = 0.0, no_count = 0.0;
};

std::vector<double> split_points_for_rows(const Dataset& d,
                                          const std::vector<double>& weights,
                                          const std::vector<size_t>& rows,
                                          int variable);

LeafDistribution fit_rows(const Dataset& d, const std::vector<double>& weights,
                          const std::vector<size_t>& rows, int target,
                          double alpha, double variance_floor);

// Weighted log-likelihood of `fit` over the rows.
double rows_log_likelihood(const Dataset& d, const std::vector<double>& weights,
                           const std::vector<size_t>& rows, int target,
                           const LeafDistribution& fit);

// Penalty charged per added free parameter under `score`; improvement of a
// split is delta(log-likelihood) - delta(params) * per_param_penalty.
double per_param_penalty(const ModelScore& score, size_t num_cases);

// Best eligible split of one leaf, or nullopt. Eligible: both children have
// fractional count >= gamma and > 0.
std::optional<SplitChoice> best_split(const Dataset& d,
                                      const std::vector<double>& weights,
                                      const GrowLeaf& leaf, int target,
                                      std::span<const int> predictors,
                                      const LearnConfig& cfg,
                                      double effective_floor,
                                      double penalty);

double effective_variance_floor(const Dataset& d, int variable,
                                double configured_floor);

}  // namespace detail

}  // namespace smm

#endif  // SMM_CORE_TREE_HPP
