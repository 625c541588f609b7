// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef SMM_CORE_DATA_HPP
#define SMM_CORE_DATA_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "core/schema.hpp"

namespace smm {

// Immutable table of cases over a schema. Values are stored as doubles:
// discrete variables hold their state index as an exact small integer,
// continuous variables hold the (finite) observed value.
class Dataset {
 public:
  Dataset(Schema schema, std::vector<double> values);

  const Schema& schema() const { return schema_; }
  size_t size() const { return num_cases_; }

  double value(size_t row, int var) const {
    return values_[row * schema_.arity() + var];
  }
  int state(size_t row, int var) const {
    return static_cast<int>(value(row, var));
  }

  bool operator==(const Dataset&) const = default;

 private:
  Schema schema_;
  std::vector<double> values_;  // row-major, size() x arity()
  size_t num_cases_ = 0;
};

using DatasetPtr = std::shared_ptr<const Dataset>;

// A dataset plus one real-valued weight per case. Membership weighting
// produces weights in [0, 1]; construction only requires them finite and
// non-negative so that scaled data can be scored in tests.
class WeightedDataset {
 public:
  WeightedDataset(DatasetPtr data, std::vector<double> weights);

  const Dataset& data() const { return *data_; }
  DatasetPtr data_ptr() const { return data_; }
  size_t size() const { return weights_.size(); }
  double weight(size_t row) const { return weights_[row]; }
  const std::vector<double>& weights() const { return weights_; }
  double fractional_count() const { return fractional_count_; }

 private:
  DatasetPtr data_;
  std::vector<double> weights_;
  double fractional_count_ = 0.0;
};

// CSV ingestion against a declared schema. The header row must contain
// every schema variable (any order, no duplicates, no unknown columns);
// discrete values are mapped to state indices by exact string match.
// Errors carry the file line and column name.
Dataset load_csv(const std::string& csv_path, const std::string& schema_path);
Dataset parse_csv_dataset(const std::string& csv_path, const Schema& schema);

void save_csv(const Dataset& d, const std::string& csv_path);

// Deterministic shuffle split. |train| = round(fraction * N), ties round
// half up; the shuffle is a Fisher-Yates pass driven by Rng (mt19937_64),
// so the same seed reproduces the same partition on every platform.
std::pair<Dataset, Dataset> holdout_split(const Dataset& d, double fraction,
                                          uint64_t seed);

WeightedDataset uniform_weights(DatasetPtr d);

}  // namespace smm

#endif  // SMM_CORE_DATA_HPP
