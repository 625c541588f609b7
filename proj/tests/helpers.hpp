// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef SMM_TESTS_HELPERS_HPP
#define SMM_TESTS_HELPERS_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "core/data.hpp"
#include "core/rng.hpp"
#include "core/tree.hpp"

namespace smm::testing {

inline Schema binary_schema(int num_vars, std::optional<int> target = {}) {
  Schema schema;
  for (int v = 0; v < num_vars; ++v) {
    schema.variables.push_back(
        {"v" + std::to_string(v), VarKind::Discrete, {"s0", "s1"}});
  }
  schema.target = target;
  schema.validate();
  return schema;
}

inline DatasetPtr make_dataset(Schema schema, std::vector<double> values) {
  return std::make_shared<Dataset>(std::move(schema), std::move(values));
}

// Uniform random all-binary dataset.
inline DatasetPtr random_binary_dataset(int num_vars, size_t n, Rng& rng,
                                        std::optional<int> target = {}) {
  std::vector<double> values;
  values.reserve(n * num_vars);
  for (size_t i = 0; i < n * static_cast<size_t>(num_vars); ++i) {
    values.push_back(static_cast<double>(rng.below(2)));
  }
  return make_dataset(binary_schema(num_vars, target), std::move(values));
}

inline std::vector<double> random_weights(size_t n, Rng& rng) {
  std::vector<double> w(n);
  for (auto& x : w) x = rng.next_unit();
  return w;
}

// ---- independent oracle for greedy tree induction on discrete data ----
//
// Straight-line reimplementation of the documented first-split rule used to
// cross-check learn_tree: enumerate predictors in schema order and states in
// index order, fit both children with the smoothing formula, and keep the
// first strictly best ML improvement.

struct OracleSplit {
  int variable = -1;
  int state = -1;
  double improvement = 0.0;
  bool found = false;
};

inline std::vector<double> oracle_fit(const Dataset& d,
                                      const std::vector<double>& w,
                                      const std::vector<size_t>& rows,
                                      int target, double alpha) {
  size_t k = d.schema().variables[target].states.size();
  std::vector<double> counts(k, 0.0);
  double total = 0.0;
  for (size_t r : rows) {
    counts[d.state(r, target)] += w[r];
    total += w[r];
  }
  std::vector<double> probs(k);
  for (size_t s = 0; s < k; ++s) {
    probs[s] = (counts[s] + alpha) / (total + alpha * k);
  }
  return probs;
}

inline double oracle_ll(const Dataset& d, const std::vector<double>& w,
                        const std::vector<size_t>& rows, int target,
                        const std::vector<double>& probs) {
  double ll = 0.0;
  for (size_t r : rows) {
    if (w[r] > 0.0) ll += w[r] * std::log(probs[d.state(r, target)]);
  }
  return ll;
}

inline OracleSplit oracle_first_split(const Dataset& d,
                                      const std::vector<double>& w, int target,
                                      const std::vector<int>& predictors,
                                      double alpha, double gamma) {
  std::vector<size_t> all(d.size());
  for (size_t r = 0; r < d.size(); ++r) all[r] = r;
  double root_ll =
      oracle_ll(d, w, all, target, oracle_fit(d, w, all, target, alpha));

  OracleSplit best;
  for (int p : predictors) {
    size_t k = d.schema().variables[p].states.size();
    for (int s = 0; s < static_cast<int>(k); ++s) {
      std::vector<size_t> yes, no;
      double yes_count = 0.0, no_count = 0.0;
      for (size_t r = 0; r < d.size(); ++r) {
        if (d.state(r, p) == s) {
          yes.push_back(r);
          yes_count += w[r];
        } else {
          no.push_back(r);
          no_count += w[r];
        }
      }
      if (!(yes_count > 0.0) || !(no_count > 0.0)) continue;
      if (yes_count < gamma || no_count < gamma) continue;
      double ll = oracle_ll(d, w, yes, target,
                            oracle_fit(d, w, yes, target, alpha)) +
                  oracle_ll(d, w, no, target,
                            oracle_fit(d, w, no, target, alpha));
      double improvement = ll - root_ll;
      if (!best.found || improvement > best.improvement) {
        best.found = true;
        best.variable = p;
        best.state = s;
        best.improvement = improvement;
      }
    }
  }
  return best;
}

}  // namespace smm::testing

#endif  // SMM_TESTS_HELPERS_HPP
