// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef SMM_CORE_BAYESNET_HPP
#define SMM_CORE_BAYESNET_HPP

#include <utility>
#include <vector>

#include "core/tree.hpp"

namespace smm {

// Density-estimation component: one local tree per schema variable, with the
// edge X -> v present exactly when X appears in a split predicate of v's
// tree. The edge set is kept acyclic by the learner and re-derived (never
// stored separately) so it cannot drift from the trees.
class BayesNetComponent {
 public:
  explicit BayesNetComponent(std::vector<TreeModel> local_trees);

  const std::vector<TreeModel>& local_trees() const { return trees_; }
  int num_variables() const { return static_cast<int>(trees_.size()); }

  // ln p(case) = sum over variables of ln p(value_v | other values)
  double log_density(const Dataset& d, size_t row) const;

  // (parent, child) pairs, ascending by (child, parent).
  std::vector<std::pair<int, int>> edges() const;
  bool is_marginal() const;
  int free_parameters() const;

  void validate(const Schema& schema) const;

 private:
  std::vector<TreeModel> trees_;
};

bool edges_acyclic(int num_vars,
                   const std::vector<std::pair<int, int>>& edges);

// Fully independent model: a single-leaf tree per variable.
BayesNetComponent learn_marginal(const WeightedDataset& wd, double alpha,
                                 double variance_floor);

// Greedy structural search over a global pool of (variable, leaf, split)
// candidates: at each step apply the single best strictly-improving split
// anywhere in the network whose implied edge keeps the DAG acyclic and whose
// children meet the fractional-count minimum. The leaf bound applies to each
// local tree independently. Network score = sum of local tree scores.
// Ties are broken by lowest target variable index, then the tree learner's
// candidate order.
BayesNetComponent learn_bayesnet(const WeightedDataset& wd,
                                 const LearnConfig& cfg);

inline double bn_log_density(const BayesNetComponent& bn, const Dataset& d,
                             size_t row) {
  return bn.log_density(d, row);
}

}  // namespace smm

#endif  // SMM_CORE_BAYESNET_HPP
