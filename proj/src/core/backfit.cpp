// Apache License, Version 2.0, refer to LICENSE.txt

#include "core/backfit.hpp"

#include <cmath>

#include "core/error.hpp"
#include "core/numeric.hpp"

namespace smm {

namespace {

bool converged(double ll_old, double ll_new, double tol) {
  return std::abs(ll_new - ll_old) < tol * std::max(1.0, std::abs(ll_old));
}

}  // namespace

StagedMixture mixture_weight_backfit(const StagedMixture& m, DatasetPtr d,
                                     const BackfitConfig& cfg,
                                     BackfitReport* report) {
  size_t n_comp = m.num_components();
  size_t n_cases = d->size();
  if (n_cases == 0) throw data_error("mixture_weight_backfit: empty data set");

  // components are frozen: cache their per-case log densities once
  std::vector<std::vector<double>> comp_lp(n_comp,
                                           std::vector<double>(n_cases));
  for (size_t i = 0; i < n_comp; ++i) {
    for (size_t r = 0; r < n_cases; ++r) {
      comp_lp[i][r] = m.component(i).log_prob(*d, r);
    }
  }

  std::vector<double> pi(m.weights());
  std::vector<double> lps(n_comp);
  auto train_ll = [&] {
    double ll = 0.0;
    for (size_t r = 0; r < n_cases; ++r) {
      double total = kNegInf;
      for (size_t i = 0; i < n_comp; ++i) {
        if (pi[i] > 0.0) {
          total = log_sum_exp2(total, std::log(pi[i]) + comp_lp[i][r]);
        }
      }
      ll += total;
    }
    return ll;
  };

  double ll = train_ll();
  if (report) report->rows.push_back({0, ll, pi});

  if (n_comp > 1) {
    for (int it = 1; it <= cfg.max_iters; ++it) {
      std::vector<double> sums(n_comp, 0.0);
      for (size_t r = 0; r < n_cases; ++r) {
        double total = kNegInf;
        for (size_t i = 0; i < n_comp; ++i) {
          lps[i] = pi[i] > 0.0 ? std::log(pi[i]) + comp_lp[i][r] : kNegInf;
          total = log_sum_exp2(total, lps[i]);
        }
        if (total == kNegInf) {
          throw numeric_error(
              "mixture_weight_backfit: zero total density at case " +
              std::to_string(r));
        }
        for (size_t i = 0; i < n_comp; ++i) {
          if (lps[i] != kNegInf) sums[i] += std::exp(lps[i] - total);
        }
      }
      for (size_t i = 0; i < n_comp; ++i) {
        pi[i] = sums[i] / static_cast<double>(n_cases);
      }
      double ll_new = train_ll();
      if (report) report->rows.push_back({it, ll_new, pi});
      bool done = converged(ll, ll_new, cfg.tol);
      ll = ll_new;
      if (done) break;
    }
  }

  // renormalize away accumulated rounding before the ctor's checks
  double sum = 0.0;
  for (double w : pi) sum += w;
  for (double& w : pi) w /= sum;
  return StagedMixture(m.schema(), m.components(), std::move(pi));
}

StagedMixture structure_backfit(const StagedMixture& m, DatasetPtr d,
                                const Schedule& schedule,
                                const LearnConfig& learn,
                                const BackfitConfig& cfg,
                                BackfitReport* report) {
  StagedMixture current = m;
  Task task = m.task();
  double ll = current.train_log_likelihood(*d);
  if (report) report->rows.push_back({0, ll, current.weights()});

  for (int sweep = 1; sweep <= schedule.outer_iterations(); ++sweep) {
    for (size_t i = 0; i < current.num_components(); ++i) {
      WeightedDataset wd = membership_weights(current, i, d);
      if (!(wd.fractional_count() > 0.0)) continue;
      Component candidate = learn_component(wd, learn, task);
      double score_new = component_score(candidate, wd, learn.score);
      double score_old = component_score(current.component(i), wd, learn.score);
      if (score_new > score_old) {
        std::vector<Component> components(current.components());
        components[i] = std::move(candidate);
        current = StagedMixture(current.schema(), std::move(components),
                                current.weights());
      }
    }
    current = mixture_weight_backfit(current, d, cfg);
    double ll_new = current.train_log_likelihood(*d);
    if (report) report->rows.push_back({sweep, ll_new, current.weights()});
    bool done = converged(ll, ll_new, cfg.tol);
    ll = ll_new;
    if (done) break;
  }
  return current;
}

}  // namespace smm
