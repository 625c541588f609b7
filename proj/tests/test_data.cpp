// Apache License, Version 2.0, refer to LICENSE.txt

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "core/data.hpp"
#include "core/error.hpp"
#include "core/mixture.hpp"
#include "helpers.hpp"

using namespace smm;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  fs::path dir = fs::temp_directory_path() / "smm_test_data";
  fs::create_directories(dir);
  return dir;
}

fs::path write_file(const std::string& name, const std::string& content) {
  fs::path p = temp_dir() / name;
  std::ofstream out(p, std::ios::binary);
  out << content;
  return p;
}

}  // namespace

TEST_CASE("schema file grammar round trips") {
  auto path = write_file("basic.schema",
                         "# demo\n"
                         "A : discrete(a0,a1)\n"
                         "B : continuous\n");
  Schema schema = load_schema(path.string());
  CHECK(schema.arity() == 2);
  CHECK(schema.variables[0].states == std::vector<std::string>{"a0", "a1"});
  CHECK(schema.variables[1].kind == VarKind::Continuous);
  CHECK(!schema.is_classification());

  Schema again = parse_schema_text(format_schema(schema), "mem");
  CHECK(again == schema);
}

TEST_CASE("schema target must be a declared discrete variable") {
  CHECK_THROWS_AS(parse_schema_text("A : discrete(a0,a1)\ntarget: Z\n", "mem"),
                  Error);
  CHECK_THROWS_AS(parse_schema_text("A : continuous\ntarget: A\n", "mem"),
                  Error);
  Schema ok = parse_schema_text("A : discrete(a0,a1)\ntarget: A\n", "mem");
  CHECK(ok.is_classification());
  CHECK(ok.target_index() == 0);
}

TEST_CASE("load_csv maps discrete states and numerics") {
  auto schema = write_file("two.schema", "A : discrete(a0,a1)\nB : continuous\n");
  auto csv = write_file("two.csv", "A,B\na0,1.5\na1,-2.0\n");
  Dataset d = load_csv(csv.string(), schema.string());
  REQUIRE(d.size() == 2);
  CHECK(d.state(0, 0) == 0);
  CHECK(d.value(0, 1) == 1.5);
  CHECK(d.state(1, 0) == 1);
  CHECK(d.value(1, 1) == -2.0);
}

TEST_CASE("load_csv reports row and column for bad values") {
  auto schema = write_file("two.schema", "A : discrete(a0,a1)\nB : continuous\n");

  auto bad_state = write_file("bad_state.csv", "A,B\na0,1.0\na2,2.0\n");
  try {
    load_csv(bad_state.string(), schema.string());
    FAIL("expected unknown-state error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Data);
    std::string msg = e.what();
    CHECK(msg.find(":3") != std::string::npos);  // header is line 1
    CHECK(msg.find("'A'") != std::string::npos);
    CHECK(msg.find("a2") != std::string::npos);
  }

  auto bad_num = write_file("bad_num.csv", "A,B\na0,oops\n");
  CHECK_THROWS_WITH_AS(load_csv(bad_num.string(), schema.string()),
                       doctest::Contains("unparseable"), Error);

  auto missing_col = write_file("missing.csv", "A\na0\n");
  CHECK_THROWS_WITH_AS(load_csv(missing_col.string(), schema.string()),
                       doctest::Contains("missing column 'B'"), Error);

  auto unknown_col = write_file("unknown.csv", "A,B,C\na0,1.0,2.0\n");
  CHECK_THROWS_WITH_AS(load_csv(unknown_col.string(), schema.string()),
                       doctest::Contains("unknown column 'C'"), Error);

  auto empty = write_file("empty.csv", "");
  CHECK_THROWS_WITH_AS(load_csv(empty.string(), schema.string()),
                       doctest::Contains("empty file"), Error);

  auto duplicate = write_file("dup.csv", "A,B,A\na0,1.0,a1\n");
  CHECK_THROWS_WITH_AS(load_csv(duplicate.string(), schema.string()),
                       doctest::Contains("duplicate column 'A'"), Error);

  auto short_row = write_file("short.csv", "A,B\na0,1.0\na1\n");
  CHECK_THROWS_WITH_AS(load_csv(short_row.string(), schema.string()),
                       doctest::Contains("expected 2 fields"), Error);

  auto missing_value = write_file("missing_value.csv", "A,B\na0,\n");
  CHECK_THROWS_WITH_AS(load_csv(missing_value.string(), schema.string()),
                       doctest::Contains("missing value"), Error);
}

TEST_CASE("csv save/load round trip preserves the dataset") {
  Rng rng(7);
  Schema schema = parse_schema_text(
      "A : discrete(left,right)\nX : continuous\nY : continuous\n", "mem");
  std::vector<double> values;
  for (int i = 0; i < 40; ++i) {
    values.push_back(static_cast<double>(rng.below(2)));
    values.push_back(rng.next_gaussian() * 3.25);
    values.push_back(rng.next_unit() * 1e-7);
  }
  Dataset d(schema, values);

  auto csv = temp_dir() / "roundtrip.csv";
  save_csv(d, csv.string());
  auto schema_path = write_file("roundtrip.schema", format_schema(schema));
  Dataset back = load_csv(csv.string(), schema_path.string());
  CHECK(back == d);
}

TEST_CASE("holdout_split sizes and determinism") {
  Rng rng(3);
  auto d = testing::random_binary_dataset(2, 10, rng);
  auto [train, holdout] = holdout_split(*d, 0.7, 1);
  CHECK(train.size() == 7);
  CHECK(holdout.size() == 3);

  auto [train2, holdout2] = holdout_split(*d, 0.7, 1);
  CHECK(train == train2);
  CHECK(holdout == holdout2);

  auto [train3, holdout3] = holdout_split(*d, 0.7, 2);
  CHECK((train3 == train) == false);  // different seed, different shuffle
}

TEST_CASE("holdout_split rounds half up") {
  Rng rng(3);
  auto d = testing::random_binary_dataset(1, 528, rng);
  auto [train, holdout] = holdout_split(*d, 0.7, 9);
  CHECK(train.size() == 370);  // round(369.6)
  CHECK(holdout.size() == 158);
}

TEST_CASE("holdout_split is an exact partition") {
  // tag each case by a unique pattern over enough binary vars
  Schema schema = testing::binary_schema(10);
  std::vector<double> values;
  size_t n = 100;
  for (size_t i = 0; i < n; ++i) {
    for (int b = 0; b < 10; ++b) values.push_back((i >> b) & 1);
  }
  Dataset d(schema, values);
  auto [train, holdout] = holdout_split(d, 0.31, 5);
  CHECK(train.size() + holdout.size() == n);

  auto id_of = [](const Dataset& part, size_t row) {
    size_t id = 0;
    for (int b = 0; b < 10; ++b) id |= static_cast<size_t>(part.state(row, b)) << b;
    return id;
  };
  std::set<size_t> seen;
  for (size_t r = 0; r < train.size(); ++r) CHECK(seen.insert(id_of(train, r)).second);
  for (size_t r = 0; r < holdout.size(); ++r) CHECK(seen.insert(id_of(holdout, r)).second);
  CHECK(seen.size() == n);
}

TEST_CASE("holdout_split rejects degenerate inputs") {
  Rng rng(3);
  auto d = testing::random_binary_dataset(2, 10, rng);
  CHECK_THROWS_AS(holdout_split(*d, 0.0, 1), Error);
  CHECK_THROWS_AS(holdout_split(*d, 1.0, 1), Error);
  CHECK_THROWS_AS(holdout_split(*d, 0.01, 1), Error);  // empty train part
}

TEST_CASE("uniform_weights gives weight one per case in order") {
  Rng rng(11);
  auto d = testing::random_binary_dataset(3, 3, rng);
  WeightedDataset wd = uniform_weights(d);
  CHECK(wd.size() == 3);
  CHECK(wd.fractional_count() == 3.0);
  for (size_t r = 0; r < wd.size(); ++r) {
    CHECK(wd.weight(r) == 1.0);
    for (int v = 0; v < 3; ++v) CHECK(wd.data().value(r, v) == d->value(r, v));
  }
}

TEST_CASE("E-step of a one-component mixture reproduces uniform weights") {
  Rng rng(13);
  auto d = testing::random_binary_dataset(3, 20, rng);
  FitConfig cfg;
  cfg.add.learn.max_leaves = 2;
  auto stages = fit_smm(d, 1, cfg);
  WeightedDataset wd = membership_weights(stages[0], 0, d);
  for (size_t r = 0; r < wd.size(); ++r) CHECK(wd.weight(r) == 1.0);
  CHECK(wd.fractional_count() == static_cast<double>(d->size()));
}
