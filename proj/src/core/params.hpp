// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef SMM_CORE_PARAMS_HPP
#define SMM_CORE_PARAMS_HPP

#include <cstdint>
#include <string>

#include "core/evaluate.hpp"
#include "core/mixture.hpp"

namespace smm {

// Flat bag of every engine hyperparameter, settable from key=value strings.
// The C API's smm_params and the CLI both sit on top of this.
struct RunParams {
  std::string task = "density";  // density | classification
  std::string mode = "smm";      // smm | baseline
  int components = 16;
  size_t max_leaves = 8;
  double pi_init = 0.2;
  double alpha = 1.0;
  double variance_floor = 1e-9;
  double gamma = 1.0;
  ScoreKind score = ScoreKind::BIC;
  double kappa = 0.9;
  Schedule schedule;  // 5-5-20, max_outer 20, conv_tol 1e-5
  InitialComponent init = InitialComponent::Marginal;
  bool stage_gate = false;
  uint64_t seed = 0;
  int threads = 0;
  bool timings = false;

  std::vector<size_t> tune_leaf_grid{2, 4, 8, 16, 32, 64, 128, 256, 512};
  std::vector<double> tune_pi_grid{0.05, 0.1, 0.2, 0.3, 0.5};
  double tune_fraction = 0.7;
  int tune_components = 8;
  int tune_max_outer = 5;

  std::vector<double> baseline_kappa_grid{0.1, 0.5, 0.9};
  std::vector<double> baseline_gamma_grid{1.0, 5.0, 25.0};

  int backfit_max_iters = 100;
  double backfit_tol = 1e-6;

  // Throws usage_error on unknown keys or malformed/out-of-range values.
  void set(const std::string& key, const std::string& value);

  // Throws data_error when the declared task contradicts the schema.
  void check_task(const Schema& schema) const;

  LearnConfig learn_config() const;
  FitConfig fit_config() const;
  TuneConfig tune_config() const;
  BaselineConfig baseline_config() const;
  BackfitConfig backfit_config() const;
};

Schedule parse_schedule(const std::string& text);

}  // namespace smm

#endif  // SMM_CORE_PARAMS_HPP
