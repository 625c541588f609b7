// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef SMM_CORE_MIXTURE_HPP
#define SMM_CORE_MIXTURE_HPP

#include <algorithm>
#include <variant>
#include <vector>

#include "core/bayesnet.hpp"
#include "core/data.hpp"
#include "core/tree.hpp"

namespace smm {

enum class Task { Density, Classification };

inline Task task_of(const Schema& schema) {
  return schema.is_classification() ? Task::Classification : Task::Density;
}

// One mixture member: a decision tree p(y|x) for classification or a
// Bayesian network p(z) for density estimation.
class Component {
 public:
  enum class Kind { Tree, BayesNet };

  explicit Component(TreeModel tree) : model_(std::move(tree)) {}
  explicit Component(BayesNetComponent bn) : model_(std::move(bn)) {}

  Kind kind() const {
    return std::holds_alternative<TreeModel>(model_) ? Kind::Tree
                                                     : Kind::BayesNet;
  }
  const TreeModel& tree() const { return std::get<TreeModel>(model_); }
  const BayesNetComponent& bn() const {
    return std::get<BayesNetComponent>(model_);
  }

  // ln p(y|x) for tree components, ln p(z) for network components.
  double log_prob(const Dataset& d, size_t row) const;
  int free_parameters() const;

 private:
  std::variant<TreeModel, BayesNetComponent> model_;
};

// Ordered component list with mixture weights summing to 1. Immutable;
// the staged operations below return new mixtures.
class StagedMixture {
 public:
  StagedMixture(Schema schema, std::vector<Component> components,
                std::vector<double> weights);

  const Schema& schema() const { return schema_; }
  Task task() const { return task_of(schema_); }
  size_t num_components() const { return components_.size(); }
  const Component& component(size_t i) const { return components_[i]; }
  const std::vector<Component>& components() const { return components_; }
  double weight(size_t i) const { return weights_[i]; }
  const std::vector<double>& weights() const { return weights_; }

  // ln sum_i pi_i p_i(case), log-sum-exp.
  double log_predictive(const Dataset& d, size_t row) const;
  // Classification: mixture p(y|x) over the target's states.
  std::vector<double> class_posterior(const Dataset& d, size_t row) const;

  double train_log_likelihood(const Dataset& d) const;

 private:
  Schema schema_;
  std::vector<Component> components_;
  std::vector<double> weights_;
};

double mixture_log_predictive(const StagedMixture& m, const Dataset& d,
                              size_t row);

// E-step for one component: weight of case j = pi_i p_i(z_j) / sum_k pi_k
// p_k(z_j). Fails (numeric) if every component assigns zero density to some
// case, which is possible only with smoothing disabled.
WeightedDataset membership_weights(const StagedMixture& m,
                                   size_t component_index, DatasetPtr d);

// M-step for the newest component's weight: pi_n' = fractional count / N.
// Earlier components keep their relative weights and are rescaled so the
// weights still sum to 1.
StagedMixture maximize_new_weight(const StagedMixture& m, const Dataset& d);

struct Schedule {
  int s1 = 5;
  int s2 = 5;
  int s3 = 20;
  int max_outer = 20;      // additional cap on s3
  double conv_tol = 1e-5;

  int outer_iterations() const { return std::min(s3, max_outer); }
};

enum class InitialComponent { Marginal, Uniform };

struct AddComponentConfig {
  double pi_init = 0.2;
  InitialComponent initial = InitialComponent::Marginal;
  Schedule schedule;
  LearnConfig learn;
};

// Per-event instrumentation of a fit; overall_bic is the mixture training
// BIC (train LL minus (d/2) ln N, d counting component parameters plus the
// n-1 free mixture weights).
struct FitTrace {
  struct Event {
    int stage;
    std::string what;  // stage_start, relearn_accepted, weight_step,
                       // stage_accepted, stage_rejected
    double train_ll;
    double overall_bic;
  };
  std::vector<Event> events;
};

// The Add-Component procedure: append an initial component with weight
// pi_init (earlier weights scaled by 1 - pi_init), then up to
// min(s3, max_outer) outer iterations of [s1 gated structure-search steps,
// s2 weight-maximization steps], stopping early when
// |LL_after_step1 - LL_end| / |LL_end - LL_at_entry| < conv_tol.
StagedMixture add_component(const AddComponentConfig& cfg,
                            const StagedMixture& prev, DatasetPtr d,
                            FitTrace* trace = nullptr);

struct FitConfig {
  AddComponentConfig add;
  // When set, a stage is kept only if the overall training score (in the
  // learner's score kind) strictly improves; rejected stages repeat the
  // previous mixture.
  bool stage_gate = false;
};

// Stage 1 is the fractional-data learner on uniformly weighted data; stage
// k applies add_component to stage k-1. Returns all K mixtures.
std::vector<StagedMixture> fit_smm(DatasetPtr d, int num_components,
                                   const FitConfig& cfg,
                                   FitTrace* trace = nullptr);

// Training score of a whole mixture under `score`: LL - d_total * per-param
// penalty, d_total = component parameters + (n - 1) mixture weights.
double overall_score(const StagedMixture& m, const Dataset& d,
                     const ModelScore& score);
double overall_bic(const StagedMixture& m, const Dataset& d);

// Component score on a weighted data set (sum of local tree scores for
// networks); the step-1 acceptance test of add_component.
double component_score(const Component& c, const WeightedDataset& wd,
                       const ModelScore& score);

Component make_initial_component(const AddComponentConfig& cfg, DatasetPtr d);
Component learn_component(const WeightedDataset& wd, const LearnConfig& cfg,
                          Task task);

}  // namespace smm

#endif  // SMM_CORE_MIXTURE_HPP
