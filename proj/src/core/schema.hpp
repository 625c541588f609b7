// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef SMM_CORE_SCHEMA_HPP
#define SMM_CORE_SCHEMA_HPP

#include <optional>
#include <string>
#include <vector>

namespace smm {

enum class VarKind { Discrete, Continuous };

struct Variable {
  std::string name;
  VarKind kind = VarKind::Discrete;
  std::vector<std::string> states;  // discrete only, >= 2 entries

  bool operator==(const Variable&) const = default;
};

// Declared variable list plus an optional classification target. A schema
// with a target is a classification schema; without one it is a density
// schema.
struct Schema {
  std::vector<Variable> variables;
  std::optional<int> target;

  int arity() const { return static_cast<int>(variables.size()); }
  bool is_classification() const { return target.has_value(); }
  int target_index() const { return *target; }

  // -1 when absent.
  int index_of(const std::string& name) const;

  int state_index(int var, const std::string& state) const;  // -1 when absent

  // Throws data_error on any invariant violation (empty/duplicate names,
  // < 2 states, duplicate states, bad target).
  void validate() const;

  bool operator==(const Schema&) const = default;
};

// Schema file grammar, one variable per line:
//   name : discrete(s1,s2,...)
//   name : continuous
// plus an optional final line `target: name`. Blank lines and lines starting
// with '#' are ignored. Names and states are trimmed and must not contain
// ',', '(', ')' or ':'.
Schema parse_schema_text(const std::string& text, const std::string& origin);
Schema load_schema(const std::string& path);
std::string format_schema(const Schema& schema);

std::string trim(const std::string& s);

}  // namespace smm

#endif  // SMM_CORE_SCHEMA_HPP
