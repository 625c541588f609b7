// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef SMM_CORE_BACKFIT_HPP
#define SMM_CORE_BACKFIT_HPP

#include "core/mixture.hpp"

namespace smm {

// Per-iteration trace of a backfitting run; exportable as CSV for
// log-score-vs-components comparisons.
struct BackfitReport {
  struct Row {
    int iteration;
    double train_ll;
    std::vector<double> pi;
  };
  std::vector<Row> rows;
};

struct BackfitConfig {
  int max_iters = 100;
  double tol = 1e-6;  // relative train-LL change that counts as converged
};

// Full EM over all mixture weights with every component frozen. Training LL
// is non-decreasing per iteration (EM M-step).
StagedMixture mixture_weight_backfit(const StagedMixture& m, DatasetPtr d,
                                     const BackfitConfig& cfg,
                                     BackfitReport* report = nullptr);

// SEM sweeps over the whole mixture: components are relearned one at a time
// in stage order from their current membership weights (each relearn gated
// on the component model score), then a full mixture-weight backfit runs.
// Repeats schedule.s3 sweeps or stops when the sweep's relative LL change
// falls under cfg.tol. Component count never changes.
StagedMixture structure_backfit(const StagedMixture& m, DatasetPtr d,
                                const Schedule& schedule,
                                const LearnConfig& learn,
                                const BackfitConfig& cfg,
                                BackfitReport* report = nullptr);

}  // namespace smm

#endif  // SMM_CORE_BACKFIT_HPP
