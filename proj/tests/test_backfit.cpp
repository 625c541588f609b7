// Apache License, Version 2.0, refer to LICENSE.txt

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/backfit.hpp"
#include "core/synth.hpp"
#include "helpers.hpp"

using namespace smm;
using namespace smm::testing;

namespace {

GenerativeSpec separated_spec(int num_vars, std::vector<double> weights,
                              double hi = 0.95) {
  GenerativeSpec spec;
  spec.schema = binary_schema(num_vars);
  for (size_t c = 0; c < weights.size(); ++c) {
    GenerativeSpec::Component comp;
    comp.weight = weights[c];
    for (int v = 0; v < num_vars; ++v) {
      LeafDistribution m;
      m.kind = LeafDistribution::Kind::Multinomial;
      double p = (c + v) % 2 == 0 ? hi : 1.0 - hi;
      m.probs = {p, 1.0 - p};
      comp.marginals.push_back(m);
    }
    spec.components.push_back(comp);
  }
  return spec;
}

}  // namespace

TEST_CASE("weight backfit leaves a single component untouched") {
  Rng rng(3);
  auto d = random_binary_dataset(3, 50, rng);
  FitConfig cfg;
  auto stages = fit_smm(d, 1, cfg);
  BackfitReport report;
  StagedMixture out = mixture_weight_backfit(stages[0], d, {}, &report);
  CHECK(out.num_components() == 1);
  CHECK(out.weight(0) == 1.0);
  CHECK(report.rows.size() == 1);  // nothing to iterate
}

TEST_CASE("weight backfit on identical components keeps likelihood flat") {
  Schema schema = binary_schema(2);
  Rng rng(5);
  auto d = random_binary_dataset(2, 60, rng);
  std::vector<TreeModel> trees;
  for (int v = 0; v < 2; ++v) {
    std::vector<TreeNode> nodes(1);
    nodes[0].dist.kind = LeafDistribution::Kind::Multinomial;
    nodes[0].dist.probs = {0.6, 0.4};
    trees.emplace_back(v, std::move(nodes));
  }
  BayesNetComponent bn(std::move(trees));
  StagedMixture m(schema, {Component(bn), Component(bn)}, {0.8, 0.2});

  BackfitReport report;
  StagedMixture out = mixture_weight_backfit(m, d, {}, &report);
  double first = report.rows.front().train_ll;
  for (const auto& row : report.rows) {
    CHECK(row.train_ll == doctest::Approx(first).epsilon(1e-12));
  }
  CHECK(out.train_log_likelihood(*d) == doctest::Approx(first).epsilon(1e-12));
}

TEST_CASE("weight backfit recovers generative mixture weights") {
  GenerativeSpec spec = separated_spec(6, {0.7, 0.3});
  auto d = std::make_shared<Dataset>(sample(spec, 5000, 13));

  // true components, wrong weights
  StagedMixture truth = genspec_to_mixture(spec);
  StagedMixture skewed(truth.schema(), truth.components(), {0.5, 0.5});
  StagedMixture fitted = mixture_weight_backfit(skewed, d, {});
  CHECK(fitted.weight(0) == doctest::Approx(0.7).epsilon(0.07));
  CHECK(fitted.weight(1) == doctest::Approx(0.3).epsilon(0.17));
  CHECK(fitted.weight(0) + fitted.weight(1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("weight backfit is monotone and stays on the simplex") {
  Rng rng(17);
  GenerativeSpec spec = separated_spec(4, {0.5, 0.25, 0.25});
  auto d = std::make_shared<Dataset>(sample(spec, 400, 19));
  FitConfig cfg;
  cfg.add.learn.max_leaves = 2;
  auto stages = fit_smm(d, 3, cfg);

  BackfitReport report;
  mixture_weight_backfit(stages.back(), d, {}, &report);
  REQUIRE(report.rows.size() >= 2);
  for (size_t i = 1; i < report.rows.size(); ++i) {
    CHECK(report.rows[i].train_ll >=
          report.rows[i - 1].train_ll -
              1e-9 * std::abs(report.rows[i - 1].train_ll));
    double sum = 0.0;
    for (double pi : report.rows[i].pi) {
      CHECK(pi >= 0.0);
      sum += pi;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("structure backfit: single component reduces to a gated relearn") {
  Rng rng(23);
  auto d = random_binary_dataset(3, 80, rng);
  FitConfig cfg;
  cfg.add.learn.max_leaves = 2;
  auto stages = fit_smm(d, 1, cfg);
  StagedMixture out = structure_backfit(stages[0], d, cfg.add.schedule,
                                        cfg.add.learn, {});
  CHECK(out.num_components() == 1);
  CHECK(out.train_log_likelihood(*d) >=
        stages[0].train_log_likelihood(*d) - 1e-9);
}

TEST_CASE("structure backfit converges on the first sweep at a fixed point") {
  // constant data plus two identical components fitted exactly the way the
  // learner would fit them: relearns are rejected and the weight EM is
  // stationary, so the first sweep moves nothing
  Schema schema = binary_schema(2);
  size_t n = 40;
  std::vector<double> values;
  for (size_t i = 0; i < n; ++i) {
    values.push_back(0.0);
    values.push_back(1.0);
  }
  auto d = make_dataset(schema, values);

  LearnConfig learn;
  learn.max_leaves = 2;
  double p_hit = (n + learn.alpha) / (n + 2.0 * learn.alpha);
  std::vector<TreeModel> trees;
  for (int v = 0; v < 2; ++v) {
    std::vector<TreeNode> nodes(1);
    nodes[0].dist.kind = LeafDistribution::Kind::Multinomial;
    nodes[0].dist.probs = v == 0 ? std::vector<double>{p_hit, 1.0 - p_hit}
                                 : std::vector<double>{1.0 - p_hit, p_hit};
    trees.emplace_back(v, std::move(nodes));
  }
  BayesNetComponent bn(std::move(trees));
  StagedMixture m(schema, {Component(bn), Component(bn)}, {0.6, 0.4});

  BackfitReport report;
  StagedMixture out = structure_backfit(m, d, Schedule{}, learn, {}, &report);
  REQUIRE(report.rows.size() == 2);  // initial row + one converged sweep
  CHECK(report.rows[1].train_ll ==
        doctest::Approx(report.rows[0].train_ll).epsilon(1e-12));
  CHECK(out.weight(0) == doctest::Approx(0.6).epsilon(1e-9));
}

TEST_CASE("structure backfit never lowers training likelihood") {
  GenerativeSpec spec = separated_spec(5, {0.4, 0.3, 0.2, 0.1});
  auto d = std::make_shared<Dataset>(sample(spec, 800, 37));
  FitConfig cfg;
  cfg.add.learn.max_leaves = 3;
  auto stages = fit_smm(d, 4, cfg);

  double before = stages.back().train_log_likelihood(*d);
  StagedMixture after = structure_backfit(stages.back(), d, cfg.add.schedule,
                                          cfg.add.learn, {});
  CHECK(after.num_components() == 4);
  CHECK(after.train_log_likelihood(*d) >= before - 1e-9 * std::abs(before));
}
