// Apache License, Version 2.0, refer to LICENSE.txt

#include "core/params.hpp"

#include <charconv>
#include <sstream>

#include "core/error.hpp"

namespace smm {

namespace {

double to_double(const std::string& key, const std::string& value) {
  double x = 0.0;
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
  if (ec != std::errc() || p != value.data() + value.size()) {
    throw usage_error(key + ": bad number '" + value + "'");
  }
  return x;
}

long to_long(const std::string& key, const std::string& value) {
  long x = 0;
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
  if (ec != std::errc() || p != value.data() + value.size()) {
    throw usage_error(key + ": bad integer '" + value + "'");
  }
  return x;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "on" || value == "true" || value == "1") return true;
  if (value == "off" || value == "false" || value == "0") return false;
  throw usage_error(key + ": expected on/off, got '" + value + "'");
}

template <typename T, typename F>
std::vector<T> to_list(const std::string& key, const std::string& value,
                       F parse_one) {
  std::vector<T> out;
  std::istringstream in(value);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) throw usage_error(key + ": empty list entry");
    out.push_back(parse_one(key, tok));
  }
  if (out.empty()) throw usage_error(key + ": empty list");
  return out;
}

}  // namespace

Schedule parse_schedule(const std::string& text) {
  if (text == "smm" || text == "SMM") return Schedule{};
  Schedule s;
  std::istringstream in(text);
  std::string tok;
  int* fields[3] = {&s.s1, &s.s2, &s.s3};
  for (int i = 0; i < 3; ++i) {
    if (!std::getline(in, tok, '-')) {
      throw usage_error("schedule: expected s1-s2-s3, got '" + text + "'");
    }
    *fields[i] = static_cast<int>(to_long("schedule", trim(tok)));
  }
  if (std::getline(in, tok, '-')) {
    throw usage_error("schedule: expected s1-s2-s3, got '" + text + "'");
  }
  if (s.s1 < 0 || s.s2 < 0 || s.s3 < 1) {
    throw usage_error("schedule: need s1 >= 0, s2 >= 0, s3 >= 1");
  }
  return s;
}

void RunParams::set(const std::string& key, const std::string& value) {
  auto positive = [&](double x) {
    if (!(x > 0.0)) throw usage_error(key + ": must be > 0");
    return x;
  };
  if (key == "task") {
    if (value != "density" && value != "classification") {
      throw usage_error("task: expected density or classification");
    }
    task = value;
  } else if (key == "mode") {
    if (value != "smm" && value != "baseline") {
      throw usage_error("mode: expected smm or baseline");
    }
    mode = value;
  } else if (key == "components") {
    long k = to_long(key, value);
    if (k < 1) throw usage_error("components: must be >= 1");
    components = static_cast<int>(k);
  } else if (key == "max_leaves") {
    long l = to_long(key, value);
    if (l < 1) throw usage_error("max_leaves: must be >= 1");
    max_leaves = static_cast<size_t>(l);
  } else if (key == "pi_init") {
    double x = to_double(key, value);
    if (!(x > 0.0 && x < 1.0)) throw usage_error("pi_init: must be in (0,1)");
    pi_init = x;
  } else if (key == "alpha") {
    double x = to_double(key, value);
    if (x < 0.0) throw usage_error("alpha: must be >= 0");
    alpha = x;
  } else if (key == "variance_floor") {
    variance_floor = positive(to_double(key, value));
  } else if (key == "gamma") {
    double x = to_double(key, value);
    if (x < 0.0) throw usage_error("gamma: must be >= 0");
    gamma = x;
  } else if (key == "score") {
    if (value == "ml") score = ScoreKind::ML;
    else if (value == "bic") score = ScoreKind::BIC;
    else if (value == "penalized") score = ScoreKind::PenalizedML;
    else throw usage_error("score: expected ml, bic or penalized");
  } else if (key == "kappa") {
    double x = to_double(key, value);
    if (!(x > 0.0 && x <= 1.0)) throw usage_error("kappa: must be in (0,1]");
    kappa = x;
  } else if (key == "schedule") {
    Schedule parsed = parse_schedule(value);
    parsed.max_outer = schedule.max_outer;
    parsed.conv_tol = schedule.conv_tol;
    schedule = parsed;
  } else if (key == "max_outer") {
    long x = to_long(key, value);
    if (x < 1) throw usage_error("max_outer: must be >= 1");
    schedule.max_outer = static_cast<int>(x);
  } else if (key == "conv_tol") {
    schedule.conv_tol = positive(to_double(key, value));
  } else if (key == "init") {
    if (value == "marginal") init = InitialComponent::Marginal;
    else if (value == "uniform") init = InitialComponent::Uniform;
    else throw usage_error("init: expected marginal or uniform");
  } else if (key == "stage_gate") {
    stage_gate = to_bool(key, value);
  } else if (key == "seed") {
    seed = static_cast<uint64_t>(to_long(key, value));
  } else if (key == "threads") {
    long x = to_long(key, value);
    if (x < 0) throw usage_error("threads: must be >= 0");
    threads = static_cast<int>(x);
  } else if (key == "timings") {
    timings = to_bool(key, value);
  } else if (key == "tune_leaf_grid") {
    tune_leaf_grid = to_list<size_t>(key, value, [](const auto& k, const auto& v) {
      long x = to_long(k, v);
      if (x < 1) throw usage_error(k + ": leaves must be >= 1");
      return static_cast<size_t>(x);
    });
  } else if (key == "tune_pi_grid") {
    tune_pi_grid = to_list<double>(key, value, [](const auto& k, const auto& v) {
      double x = to_double(k, v);
      if (!(x > 0.0 && x < 1.0)) throw usage_error(k + ": pi must be in (0,1)");
      return x;
    });
  } else if (key == "tune_fraction") {
    double x = to_double(key, value);
    if (!(x > 0.0 && x < 1.0)) {
      throw usage_error("tune_fraction: must be in (0,1)");
    }
    tune_fraction = x;
  } else if (key == "tune_components") {
    long x = to_long(key, value);
    if (x < 1) throw usage_error("tune_components: must be >= 1");
    tune_components = static_cast<int>(x);
  } else if (key == "tune_max_outer") {
    long x = to_long(key, value);
    if (x < 1) throw usage_error("tune_max_outer: must be >= 1");
    tune_max_outer = static_cast<int>(x);
  } else if (key == "baseline_kappa_grid") {
    baseline_kappa_grid =
        to_list<double>(key, value, [](const auto& k, const auto& v) {
          double x = to_double(k, v);
          if (!(x > 0.0 && x <= 1.0)) {
            throw usage_error(k + ": kappa must be in (0,1]");
          }
          return x;
        });
  } else if (key == "baseline_gamma_grid") {
    baseline_gamma_grid =
        to_list<double>(key, value, [](const auto& k, const auto& v) {
          double x = to_double(k, v);
          if (x < 0.0) throw usage_error(k + ": gamma must be >= 0");
          return x;
        });
  } else if (key == "backfit_max_iters") {
    long x = to_long(key, value);
    if (x < 1) throw usage_error("backfit_max_iters: must be >= 1");
    backfit_max_iters = static_cast<int>(x);
  } else if (key == "backfit_tol") {
    backfit_tol = positive(to_double(key, value));
  } else {
    throw usage_error("unknown parameter '" + key + "'");
  }
}

void RunParams::check_task(const Schema& schema) const {
  bool wants_classification = task == "classification";
  if (wants_classification != schema.is_classification()) {
    throw data_error(wants_classification
                         ? "task=classification but the schema has no target"
                         : "task=density but the schema declares a target");
  }
}

LearnConfig RunParams::learn_config() const {
  LearnConfig cfg;
  cfg.max_leaves = max_leaves;
  cfg.score = ModelScore{score, kappa};
  cfg.alpha = alpha;
  cfg.variance_floor = variance_floor;
  cfg.gamma = gamma;
  return cfg;
}

FitConfig RunParams::fit_config() const {
  FitConfig cfg;
  cfg.add.pi_init = pi_init;
  cfg.add.initial = init;
  cfg.add.schedule = schedule;
  cfg.add.learn = learn_config();
  cfg.stage_gate = stage_gate;
  return cfg;
}

TuneConfig RunParams::tune_config() const {
  TuneConfig cfg;
  cfg.leaf_grid = tune_leaf_grid;
  cfg.pi_grid = tune_pi_grid;
  cfg.fraction = tune_fraction;
  cfg.seed = seed;
  cfg.components = tune_components;
  cfg.max_outer = tune_max_outer;
  cfg.threads = threads;
  return cfg;
}

BaselineConfig RunParams::baseline_config() const {
  BaselineConfig cfg;
  cfg.kappa_grid = baseline_kappa_grid;
  cfg.gamma_grid = baseline_gamma_grid;
  cfg.fraction = tune_fraction;
  cfg.seed = seed;
  cfg.alpha = alpha;
  cfg.variance_floor = variance_floor;
  return cfg;
}

BackfitConfig RunParams::backfit_config() const {
  BackfitConfig cfg;
  cfg.max_iters = backfit_max_iters;
  cfg.tol = backfit_tol;
  return cfg;
}

}  // namespace smm
