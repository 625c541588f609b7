// Apache License, Version 2.0, refer to LICENSE.txt

#include "core/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "core/csv.hpp"
#include "core/error.hpp"
#include "core/rng.hpp"

namespace smm {

Dataset::Dataset(Schema schema, std::vector<double> values)
    : schema_(std::move(schema)), values_(std::move(values)) {
  schema_.validate();
  int arity = schema_.arity();
  if (values_.size() % arity != 0) {
    throw data_error("dataset: value count is not a multiple of schema arity");
  }
  num_cases_ = values_.size() / arity;
  for (size_t r = 0; r < num_cases_; ++r) {
    for (int v = 0; v < arity; ++v) {
      double x = value(r, v);
      if (!std::isfinite(x)) {
        throw data_error("dataset: non-finite value at case " +
                         std::to_string(r) + ", variable '" +
                         schema_.variables[v].name + "'");
      }
      if (schema_.variables[v].kind == VarKind::Discrete) {
        int s = static_cast<int>(x);
        if (s != x || s < 0 ||
            s >= static_cast<int>(schema_.variables[v].states.size())) {
          throw data_error("dataset: state index out of range at case " +
                           std::to_string(r) + ", variable '" +
                           schema_.variables[v].name + "'");
        }
      }
    }
  }
}

WeightedDataset::WeightedDataset(DatasetPtr data, std::vector<double> weights)
    : data_(std::move(data)), weights_(std::move(weights)) {
  if (!data_) throw data_error("weighted dataset: null dataset");
  if (weights_.size() != data_->size()) {
    throw data_error("weighted dataset: weight count does not match cases");
  }
  for (double w : weights_) {
    if (!std::isfinite(w) || w < 0.0) {
      throw data_error("weighted dataset: weights must be finite and >= 0");
    }
    fractional_count_ += w;
  }
}

Dataset parse_csv_dataset(const std::string& csv_path, const Schema& schema) {
  CsvTable table = read_csv(csv_path);

  int arity = schema.arity();
  // column index in the CSV for each schema variable
  std::vector<int> col_of(arity, -1);
  for (size_t c = 0; c < table.header.size(); ++c) {
    const std::string name = trim(table.header[c]);
    int v = schema.index_of(name);
    if (v < 0) {
      throw data_error(csv_path + ": unknown column '" + name + "'");
    }
    if (col_of[v] >= 0) {
      throw data_error(csv_path + ": duplicate column '" + name + "'");
    }
    col_of[v] = static_cast<int>(c);
  }
  for (int v = 0; v < arity; ++v) {
    if (col_of[v] < 0) {
      throw data_error(csv_path + ": missing column '" +
                       schema.variables[v].name + "'");
    }
  }
  if (table.rows.empty()) throw data_error(csv_path + ": no data rows");

  std::vector<double> values;
  values.reserve(table.rows.size() * arity);
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    std::string where = csv_path + ":" + std::to_string(table.row_lines[r]);
    if (row.size() != table.header.size()) {
      throw data_error(where + ": expected " +
                       std::to_string(table.header.size()) + " fields, got " +
                       std::to_string(row.size()));
    }
    for (int v = 0; v < arity; ++v) {
      const Variable& var = schema.variables[v];
      const std::string& field = row[col_of[v]];
      if (field.empty()) {
        throw data_error(where + ", column '" + var.name +
                         "': missing value (complete data required)");
      }
      if (var.kind == VarKind::Discrete) {
        int s = schema.state_index(v, field);
        if (s < 0) {
          throw data_error(where + ", column '" + var.name +
                           "': unknown state '" + field + "'");
        }
        values.push_back(static_cast<double>(s));
      } else {
        double x = 0.0;
        auto [p, ec] =
            std::from_chars(field.data(), field.data() + field.size(), x);
        if (ec != std::errc() || p != field.data() + field.size() ||
            !std::isfinite(x)) {
          throw data_error(where + ", column '" + var.name +
                           "': unparseable numeric value '" + field + "'");
        }
        values.push_back(x);
      }
    }
  }
  return Dataset(schema, std::move(values));
}

Dataset load_csv(const std::string& csv_path, const std::string& schema_path) {
  Schema schema = load_schema(schema_path);
  return parse_csv_dataset(csv_path, schema);
}

namespace {

std::string format_value(const Variable& var, double x) {
  if (var.kind == VarKind::Discrete) {
    return var.states[static_cast<size_t>(x)];
  }
  char buf[40];
  snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void save_csv(const Dataset& d, const std::string& csv_path) {
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw data_error(csv_path + ": cannot open for writing");
  const Schema& schema = d.schema();
  std::vector<std::string> fields;
  for (const auto& v : schema.variables) fields.push_back(v.name);
  write_csv_row(out, fields);
  for (size_t r = 0; r < d.size(); ++r) {
    fields.clear();
    for (int v = 0; v < schema.arity(); ++v) {
      fields.push_back(format_value(schema.variables[v], d.value(r, v)));
    }
    write_csv_row(out, fields);
  }
  if (!out) throw data_error(csv_path + ": write failed");
}

std::pair<Dataset, Dataset> holdout_split(const Dataset& d, double fraction,
                                          uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw usage_error("holdout_split: fraction must be in (0,1)");
  }
  size_t n = d.size();
  if (n < 2) throw data_error("holdout_split: need at least 2 cases");
  // round half up
  size_t n_train = static_cast<size_t>(std::floor(fraction * n + 0.5));
  if (n_train == 0 || n_train == n) {
    throw data_error("holdout_split: split leaves an empty part");
  }

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (size_t i = n - 1; i >= 1; --i) {
    size_t j = rng.below(i + 1);
    std::swap(order[i], order[j]);
  }

  int arity = d.schema().arity();
  auto take = [&](size_t begin, size_t end) {
    std::vector<double> values;
    values.reserve((end - begin) * arity);
    for (size_t k = begin; k < end; ++k) {
      for (int v = 0; v < arity; ++v) values.push_back(d.value(order[k], v));
    }
    return Dataset(d.schema(), std::move(values));
  };
  return {take(0, n_train), take(n_train, n)};
}

WeightedDataset uniform_weights(DatasetPtr d) {
  std::vector<double> w(d->size(), 1.0);
  return WeightedDataset(std::move(d), std::move(w));
}

}  // namespace smm
