// Apache License, Version 2.0, refer to LICENSE.txt

#include "core/schema.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "core/error.hpp"

namespace smm {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

int Schema::index_of(const std::string& name) const {
  for (size_t i = 0; i < variables.size(); ++i) {
    if (variables[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

int Schema::state_index(int var, const std::string& state) const {
  const auto& states = variables[var].states;
  for (size_t i = 0; i < states.size(); ++i) {
    if (states[i] == state) return static_cast<int>(i);
  }
  return -1;
}

void Schema::validate() const {
  if (variables.empty()) throw data_error("schema declares no variables");
  std::set<std::string> seen;
  for (const auto& v : variables) {
    if (v.name.empty()) throw data_error("schema: empty variable name");
    if (!seen.insert(v.name).second) {
      throw data_error("schema: duplicate variable name '" + v.name + "'");
    }
    if (v.kind == VarKind::Discrete) {
      if (v.states.size() < 2) {
        throw data_error("schema: variable '" + v.name +
                         "' needs at least 2 states");
      }
      std::set<std::string> sseen;
      for (const auto& s : v.states) {
        if (s.empty()) {
          throw data_error("schema: variable '" + v.name + "' has empty state");
        }
        if (!sseen.insert(s).second) {
          throw data_error("schema: variable '" + v.name +
                           "' has duplicate state '" + s + "'");
        }
      }
    } else if (!v.states.empty()) {
      throw data_error("schema: continuous variable '" + v.name +
                       "' lists states");
    }
  }
  if (target) {
    if (*target < 0 || *target >= arity()) {
      throw data_error("schema: target index out of range");
    }
    if (variables[*target].kind != VarKind::Discrete) {
      throw data_error("schema: target '" + variables[*target].name +
                       "' must be discrete");
    }
  }
}

namespace {

void check_token(const std::string& tok, const std::string& what,
                 const std::string& origin) {
  if (tok.empty()) throw data_error(origin + ": empty " + what);
  if (tok.find_first_of(",():") != std::string::npos) {
    throw data_error(origin + ": " + what + " '" + tok +
                     "' contains a reserved character (one of ',():')");
  }
}

}  // namespace

Schema parse_schema_text(const std::string& text, const std::string& origin) {
  Schema schema;
  std::optional<std::string> target_name;
  std::istringstream in(text);
  std::string raw;
  size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    std::string where = origin + ":" + std::to_string(lineno);

    size_t colon = line.find(':');
    if (colon == std::string::npos) {
      throw data_error(where + ": expected 'name : kind' or 'target: name'");
    }
    std::string head = trim(line.substr(0, colon));
    std::string rest = trim(line.substr(colon + 1));
    if (head == "target") {
      if (target_name) throw data_error(where + ": duplicate target line");
      target_name = rest;
      continue;
    }
    check_token(head, "variable name", where);
    Variable v;
    v.name = head;
    if (rest == "continuous") {
      v.kind = VarKind::Continuous;
    } else if (rest.rfind("discrete", 0) == 0) {
      v.kind = VarKind::Discrete;
      size_t open = rest.find('(');
      size_t close = rest.rfind(')');
      if (open == std::string::npos || close == std::string::npos ||
          close < open) {
        throw data_error(where + ": expected discrete(s1,s2,...)");
      }
      std::string inner = rest.substr(open + 1, close - open - 1);
      std::string state;
      std::istringstream states(inner);
      while (std::getline(states, state, ',')) {
        std::string s = trim(state);
        if (s.empty()) throw data_error(where + ": empty state name");
        v.states.push_back(s);
      }
    } else {
      throw data_error(where + ": unknown kind '" + rest + "'");
    }
    schema.variables.push_back(std::move(v));
  }
  if (target_name) {
    int idx = schema.index_of(*target_name);
    if (idx < 0) {
      throw data_error(origin + ": target '" + *target_name +
                       "' is not a declared variable");
    }
    schema.target = idx;
  }
  schema.validate();
  return schema;
}

Schema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error(path + ": cannot open schema file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_schema_text(buf.str(), path);
}

std::string format_schema(const Schema& schema) {
  std::ostringstream out;
  for (const auto& v : schema.variables) {
    out << v.name << " : ";
    if (v.kind == VarKind::Continuous) {
      out << "continuous";
    } else {
      out << "discrete(";
      for (size_t i = 0; i < v.states.size(); ++i) {
        if (i) out << ',';
        out << v.states[i];
      }
      out << ')';
    }
    out << '\n';
  }
  if (schema.target) {
    out << "target: " << schema.variables[*schema.target].name << '\n';
  }
  return out.str();
}

}  // namespace smm
