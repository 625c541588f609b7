// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef SMM_CORE_SYNTH_HPP
#define SMM_CORE_SYNTH_HPP

#include <string>
#include <vector>

#include "core/mixture.hpp"

namespace smm {

// Ground-truth generator: a mixture of product distributions (one
// multinomial or gaussian marginal per variable and component), so the true
// density stays exactly computable.
struct GenerativeSpec {
  struct Component {
    double weight = 0.0;
    std::vector<LeafDistribution> marginals;  // one per schema variable
  };

  Schema schema;
  std::vector<Component> components;

  void validate() const;
};

// Spec file: the schema grammar followed by a `components:` line and, per
// component, `weight: w` plus one line per variable, either
//   name: p1 p2 ...           (discrete state probabilities)
//   name: gaussian(mean, variance)
GenerativeSpec parse_genspec_text(const std::string& text,
                                  const std::string& origin);
GenerativeSpec load_genspec(const std::string& path);

// i.i.d. draws, deterministic for a fixed seed: component by inverse-CDF on
// the mixture weights, then each variable independently from its marginal.
Dataset sample(const GenerativeSpec& spec, size_t n, uint64_t seed);

double true_log_density(const GenerativeSpec& spec, const Dataset& d,
                        size_t row);

// The spec as a mixture of single-leaf network components (density schemas
// only); true_log_density and the mixture's log predictive then agree.
StagedMixture genspec_to_mixture(const GenerativeSpec& spec);

}  // namespace smm

#endif  // SMM_CORE_SYNTH_HPP
