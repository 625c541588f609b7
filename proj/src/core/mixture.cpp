// Apache License, Version 2.0, refer to LICENSE.txt

#include "core/mixture.hpp"

#include <cmath>
#include <numeric>

#include "core/error.hpp"
#include "core/numeric.hpp"

namespace smm {

double Component::log_prob(const Dataset& d, size_t row) const {
  if (kind() == Kind::Tree) return tree().log_prob(d, row);
  return bn().log_density(d, row);
}

int Component::free_parameters() const {
  if (kind() == Kind::Tree) return tree().free_parameters();
  return bn().free_parameters();
}

StagedMixture::StagedMixture(Schema schema, std::vector<Component> components,
                             std::vector<double> weights)
    : schema_(std::move(schema)),
      components_(std::move(components)),
      weights_(std::move(weights)) {
  schema_.validate();
  if (components_.empty()) throw data_error("mixture: no components");
  if (components_.size() != weights_.size()) {
    throw data_error("mixture: component/weight count mismatch");
  }
  double sum = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw data_error("mixture: negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw data_error("mixture: weights must sum to 1");
  }
  Component::Kind expected = task() == Task::Classification
                                 ? Component::Kind::Tree
                                 : Component::Kind::BayesNet;
  for (const auto& c : components_) {
    if (c.kind() != expected) {
      throw data_error("mixture: component kind does not match the task");
    }
    if (c.kind() == Component::Kind::Tree) {
      if (c.tree().target() != schema_.target_index()) {
        throw data_error("mixture: tree component target mismatch");
      }
      c.tree().validate(schema_);
    } else {
      c.bn().validate(schema_);
    }
  }
}

double StagedMixture::log_predictive(const Dataset& d, size_t row) const {
  double total = kNegInf;
  for (size_t i = 0; i < components_.size(); ++i) {
    if (weights_[i] <= 0.0) continue;
    total = log_sum_exp2(total,
                         std::log(weights_[i]) + components_[i].log_prob(d, row));
  }
  return total;
}

std::vector<double> StagedMixture::class_posterior(const Dataset& d,
                                                   size_t row) const {
  if (task() != Task::Classification) {
    throw usage_error("class_posterior: density mixture");
  }
  size_t k = schema_.variables[schema_.target_index()].states.size();
  std::vector<double> posterior(k, 0.0);
  for (size_t i = 0; i < components_.size(); ++i) {
    if (weights_[i] <= 0.0) continue;
    const auto& leaf = components_[i].tree().leaf_for(d, row);
    for (size_t s = 0; s < k; ++s) {
      posterior[s] += weights_[i] * leaf.dist.probs[s];
    }
  }
  return posterior;
}

double StagedMixture::train_log_likelihood(const Dataset& d) const {
  double ll = 0.0;
  for (size_t r = 0; r < d.size(); ++r) ll += log_predictive(d, r);
  return ll;
}

double mixture_log_predictive(const StagedMixture& m, const Dataset& d,
                              size_t row) {
  return m.log_predictive(d, row);
}

WeightedDataset membership_weights(const StagedMixture& m,
                                   size_t component_index, DatasetPtr d) {
  if (component_index >= m.num_components()) {
    throw usage_error("membership_weights: component index out of range");
  }
  size_t n = d->size();
  std::vector<double> lps(m.num_components());
  std::vector<double> weights(n, 0.0);
  for (size_t r = 0; r < n; ++r) {
    for (size_t i = 0; i < m.num_components(); ++i) {
      lps[i] = m.weight(i) > 0.0
                   ? std::log(m.weight(i)) + m.component(i).log_prob(*d, r)
                   : kNegInf;
    }
    double total = log_sum_exp(lps);
    if (total == kNegInf) {
      throw numeric_error(
          "membership_weights: zero total predictive density at case " +
          std::to_string(r));
    }
    weights[r] =
        lps[component_index] == kNegInf ? 0.0 : std::exp(lps[component_index] - total);
  }
  return WeightedDataset(std::move(d), std::move(weights));
}

StagedMixture maximize_new_weight(const StagedMixture& m, const Dataset& d) {
  size_t n = m.num_components();
  if (n < 2) throw usage_error("maximize_new_weight: need >= 2 components");
  auto data = std::make_shared<Dataset>(d);
  WeightedDataset wd = membership_weights(m, n - 1, data);
  double pi_old = m.weight(n - 1);
  double pi_new = wd.fractional_count() / static_cast<double>(d.size());

  std::vector<double> weights(m.weights());
  if (1.0 - pi_old > 0.0) {
    double scale = (1.0 - pi_new) / (1.0 - pi_old);
    for (size_t i = 0; i + 1 < n; ++i) weights[i] *= scale;
  }
  weights[n - 1] = pi_new;
  return StagedMixture(m.schema(), m.components(), std::move(weights));
}

Component learn_component(const WeightedDataset& wd, const LearnConfig& cfg,
                          Task task) {
  if (task == Task::Classification) {
    const Schema& schema = wd.data().schema();
    int target = schema.target_index();
    std::vector<int> predictors;
    for (int v = 0; v < schema.arity(); ++v) {
      if (v != target) predictors.push_back(v);
    }
    return Component(learn_tree(wd, target, predictors, cfg));
  }
  return Component(learn_bayesnet(wd, cfg));
}

namespace {

TreeModel single_leaf_tree(int target, LeafDistribution dist) {
  std::vector<TreeNode> nodes(1);
  nodes[0].dist = std::move(dist);
  return TreeModel(target, std::move(nodes));
}

}  // namespace

Component make_initial_component(const AddComponentConfig& cfg, DatasetPtr d) {
  const Schema& schema = d->schema();
  Task task = task_of(schema);
  if (cfg.initial == InitialComponent::Marginal) {
    WeightedDataset uw = uniform_weights(d);
    if (task == Task::Classification) {
      LeafDistribution fit =
          weighted_leaf_fit(uw, schema.target_index(), cfg.learn.alpha,
                            cfg.learn.variance_floor);
      return Component(single_leaf_tree(schema.target_index(), std::move(fit)));
    }
    return Component(
        learn_marginal(uw, cfg.learn.alpha, cfg.learn.variance_floor));
  }

  // Uniform initial model: equal state probabilities for discrete variables;
  // for continuous variables a broad gaussian (full-data fit with variance
  // inflated x10) stands in for a flat density on an unbounded domain.
  auto uniform_leaf = [&](int v) {
    const Variable& var = schema.variables[v];
    LeafDistribution leaf;
    if (var.kind == VarKind::Discrete) {
      leaf.kind = LeafDistribution::Kind::Multinomial;
      leaf.probs.assign(var.states.size(), 1.0 / var.states.size());
    } else {
      WeightedDataset uw = uniform_weights(d);
      double floor = detail::effective_variance_floor(*d, v,
                                                      cfg.learn.variance_floor);
      LeafDistribution fit = weighted_leaf_fit(uw, v, 0.0, floor);
      leaf = fit;
      leaf.variance = std::max(fit.variance * 10.0, floor);
    }
    return leaf;
  };

  if (task == Task::Classification) {
    return Component(single_leaf_tree(schema.target_index(),
                                      uniform_leaf(schema.target_index())));
  }
  std::vector<TreeModel> trees;
  for (int v = 0; v < schema.arity(); ++v) {
    trees.push_back(single_leaf_tree(v, uniform_leaf(v)));
  }
  return Component(BayesNetComponent(std::move(trees)));
}

double component_score(const Component& c, const WeightedDataset& wd,
                       const ModelScore& score) {
  if (c.kind() == Component::Kind::Tree) {
    return model_score(c.tree(), wd, score);
  }
  double total = 0.0;
  for (const auto& tree : c.bn().local_trees()) {
    total += model_score(tree, wd, score);
  }
  return total;
}

double overall_score(const StagedMixture& m, const Dataset& d,
                     const ModelScore& score) {
  double ll = m.train_log_likelihood(d);
  int d_total = static_cast<int>(m.num_components()) - 1;
  for (const auto& c : m.components()) d_total += c.free_parameters();
  return ll - d_total * detail::per_param_penalty(score, d.size());
}

double overall_bic(const StagedMixture& m, const Dataset& d) {
  return overall_score(m, d, ModelScore{ScoreKind::BIC, 1.0});
}

namespace {

double safe_log(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

}  // namespace

StagedMixture add_component(const AddComponentConfig& cfg,
                            const StagedMixture& prev, DatasetPtr d,
                            FitTrace* trace) {
  if (!(cfg.pi_init > 0.0 && cfg.pi_init < 1.0)) {
    throw usage_error("add_component: pi_init must be in (0,1)");
  }
  if (prev.schema() != d->schema()) {
    throw data_error("add_component: mixture and data schemas differ");
  }
  const Dataset& data = *d;
  size_t n_cases = data.size();
  if (n_cases == 0) throw data_error("add_component: empty data set");
  Task task = prev.task();
  int stage = static_cast<int>(prev.num_components()) + 1;

  Component comp = make_initial_component(cfg, d);
  double pi_n = cfg.pi_init;

  // The previous mixture is frozen for the whole stage, so its per-case
  // log-density is cached once; only the new component's column changes.
  std::vector<double> log_prev(n_cases), log_new(n_cases);
  for (size_t r = 0; r < n_cases; ++r) log_prev[r] = prev.log_predictive(data, r);
  auto refresh_new = [&] {
    for (size_t r = 0; r < n_cases; ++r) log_new[r] = comp.log_prob(data, r);
  };
  refresh_new();

  auto train_ll = [&] {
    double lp = safe_log(pi_n), lq = safe_log(1.0 - pi_n);
    double ll = 0.0;
    for (size_t r = 0; r < n_cases; ++r) {
      ll += log_sum_exp2(lp + log_new[r], lq + log_prev[r]);
    }
    return ll;
  };
  auto memberships = [&] {
    double lp = safe_log(pi_n), lq = safe_log(1.0 - pi_n);
    std::vector<double> w(n_cases, 0.0);
    for (size_t r = 0; r < n_cases; ++r) {
      double a = lp + log_new[r];
      double total = log_sum_exp2(a, lq + log_prev[r]);
      if (total == kNegInf) {
        throw numeric_error(
            "add_component: zero total predictive density at case " +
            std::to_string(r));
      }
      if (a != kNegInf) w[r] = std::exp(a - total);
    }
    return w;
  };

  int d_prev = static_cast<int>(prev.num_components()) - 1;
  for (const auto& c : prev.components()) d_prev += c.free_parameters();
  auto record = [&](const char* what) {
    if (!trace) return;
    double ll = train_ll();
    // + 1 free weight for the new component
    int d_total = d_prev + 1 + comp.free_parameters();
    double bic = ll - 0.5 * d_total * std::log(static_cast<double>(n_cases));
    trace->events.push_back({stage, what, ll, bic});
  };

  double ll_initial = train_ll();
  record("stage_start");

  for (int outer = 1; outer <= cfg.schedule.outer_iterations(); ++outer) {
    for (int k = 0; k < cfg.schedule.s1; ++k) {
      std::vector<double> w = memberships();
      WeightedDataset wd(d, std::move(w));
      if (!(wd.fractional_count() > 0.0)) break;  // component is dead
      Component candidate = learn_component(wd, cfg.learn, task);
      double score_new = component_score(candidate, wd, cfg.learn.score);
      double score_old = component_score(comp, wd, cfg.learn.score);
      if (!(score_new > score_old)) break;
      comp = std::move(candidate);
      refresh_new();
      record("relearn_accepted");
    }
    double ll_after_search = train_ll();

    for (int k = 0; k < cfg.schedule.s2; ++k) {
      std::vector<double> w = memberships();
      double frac = std::accumulate(w.begin(), w.end(), 0.0);
      pi_n = frac / static_cast<double>(n_cases);
      record("weight_step");
    }
    double ll_end = train_ll();

    double denom = std::abs(ll_end - ll_initial);
    if (denom == 0.0) break;
    if (std::abs(ll_after_search - ll_end) / denom < cfg.schedule.conv_tol) {
      break;
    }
  }

  std::vector<Component> components(prev.components());
  components.push_back(std::move(comp));
  std::vector<double> weights(prev.weights());
  for (double& w : weights) w *= (1.0 - pi_n);
  weights.push_back(pi_n);
  return StagedMixture(prev.schema(), std::move(components), std::move(weights));
}

std::vector<StagedMixture> fit_smm(DatasetPtr d, int num_components,
                                   const FitConfig& cfg, FitTrace* trace) {
  if (num_components < 1) {
    throw usage_error("fit_smm: need at least one component");
  }
  Task task = task_of(d->schema());

  std::vector<StagedMixture> stages;
  Component first = learn_component(uniform_weights(d), cfg.add.learn, task);
  stages.emplace_back(d->schema(), std::vector<Component>{std::move(first)},
                      std::vector<double>{1.0});
  if (trace) {
    trace->events.push_back({1, "stage_accepted",
                             stages.back().train_log_likelihood(*d),
                             overall_bic(stages.back(), *d)});
  }

  for (int k = 2; k <= num_components; ++k) {
    StagedMixture candidate = add_component(cfg.add, stages.back(), d, trace);
    bool accept = true;
    if (cfg.stage_gate) {
      double before = overall_score(stages.back(), *d, cfg.add.learn.score);
      double after = overall_score(candidate, *d, cfg.add.learn.score);
      accept = after > before;
    }
    if (accept) {
      stages.push_back(std::move(candidate));
    } else {
      stages.push_back(stages.back());
    }
    if (trace) {
      trace->events.push_back({k, accept ? "stage_accepted" : "stage_rejected",
                               stages.back().train_log_likelihood(*d),
                               overall_bic(stages.back(), *d)});
    }
  }
  return stages;
}

}  // namespace smm
