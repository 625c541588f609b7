// Apache License, Version 2.0, refer to LICENSE.txt

#include "core/synth.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "core/error.hpp"
#include "core/numeric.hpp"
#include "core/rng.hpp"

namespace smm {

void GenerativeSpec::validate() const {
  schema.validate();
  if (components.empty()) throw data_error("genspec: no components");
  double total = 0.0;
  for (const auto& c : components) {
    if (!(c.weight >= 0.0)) throw data_error("genspec: negative weight");
    total += c.weight;
    if (static_cast<int>(c.marginals.size()) != schema.arity()) {
      throw data_error("genspec: component must list every variable");
    }
    for (int v = 0; v < schema.arity(); ++v) {
      const Variable& var = schema.variables[v];
      const LeafDistribution& m = c.marginals[v];
      if (var.kind == VarKind::Discrete) {
        if (m.kind != LeafDistribution::Kind::Multinomial ||
            m.probs.size() != var.states.size()) {
          throw data_error("genspec: marginal of '" + var.name +
                           "' does not match its states");
        }
        double sum = 0.0;
        for (double p : m.probs) {
          if (!(p >= 0.0)) {
            throw data_error("genspec: negative probability for '" + var.name +
                             "'");
          }
          sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
          throw data_error("genspec: probabilities of '" + var.name +
                           "' must sum to 1");
        }
      } else {
        if (m.kind != LeafDistribution::Kind::Gaussian ||
            !std::isfinite(m.mean) || !(m.variance > 0.0)) {
          throw data_error("genspec: bad gaussian for '" + var.name + "'");
        }
      }
    }
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw data_error("genspec: component weights must sum to 1");
  }
}

namespace {

double parse_number(const std::string& tok, const std::string& where) {
  double x = 0.0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
  if (ec != std::errc() || p != tok.data() + tok.size()) {
    throw data_error(where + ": bad number '" + tok + "'");
  }
  return x;
}

}  // namespace

GenerativeSpec parse_genspec_text(const std::string& text,
                                  const std::string& origin) {
  // split at the components: line; the head is plain schema grammar
  std::istringstream in(text);
  std::string raw;
  std::ostringstream schema_text;
  std::vector<std::pair<size_t, std::string>> body;  // (line number, line)
  size_t lineno = 0;
  bool in_components = false;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(raw);
    if (!in_components && line == "components:") {
      in_components = true;
      continue;
    }
    if (in_components) {
      if (line.empty() || line[0] == '#') continue;
      body.emplace_back(lineno, line);
    } else {
      schema_text << raw << '\n';
    }
  }
  if (!in_components) throw data_error(origin + ": missing components: section");

  GenerativeSpec spec;
  spec.schema = parse_schema_text(schema_text.str(), origin);

  GenerativeSpec::Component* current = nullptr;
  for (const auto& [ln, line] : body) {
    std::string where = origin + ":" + std::to_string(ln);
    size_t colon = line.find(':');
    if (colon == std::string::npos) {
      throw data_error(where + ": expected 'weight: w' or 'name: ...'");
    }
    std::string head = trim(line.substr(0, colon));
    std::string rest = trim(line.substr(colon + 1));
    if (head == "weight") {
      spec.components.emplace_back();
      current = &spec.components.back();
      current->weight = parse_number(rest, where);
      current->marginals.resize(spec.schema.arity());
      continue;
    }
    if (!current) throw data_error(where + ": variable line before weight:");
    int v = spec.schema.index_of(head);
    if (v < 0) throw data_error(where + ": unknown variable '" + head + "'");
    LeafDistribution& m = current->marginals[v];
    if (spec.schema.variables[v].kind == VarKind::Discrete) {
      m.kind = LeafDistribution::Kind::Multinomial;
      std::istringstream toks(rest);
      std::string tok;
      while (toks >> tok) m.probs.push_back(parse_number(tok, where));
    } else {
      if (rest.rfind("gaussian", 0) != 0) {
        throw data_error(where + ": expected gaussian(mean, variance)");
      }
      size_t open = rest.find('(');
      size_t close = rest.rfind(')');
      size_t comma = rest.find(',');
      if (open == std::string::npos || close == std::string::npos ||
          comma == std::string::npos || !(open < comma && comma < close)) {
        throw data_error(where + ": expected gaussian(mean, variance)");
      }
      m.kind = LeafDistribution::Kind::Gaussian;
      m.mean = parse_number(trim(rest.substr(open + 1, comma - open - 1)), where);
      m.variance =
          parse_number(trim(rest.substr(comma + 1, close - comma - 1)), where);
    }
  }
  spec.validate();
  return spec;
}

GenerativeSpec load_genspec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error(path + ": cannot open spec file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_genspec_text(buf.str(), path);
}

namespace {

size_t pick_index(const std::vector<double>& probs, double u) {
  double cum = 0.0;
  for (size_t i = 0; i + 1 < probs.size(); ++i) {
    cum += probs[i];
    if (u < cum) return i;
  }
  return probs.size() - 1;
}

}  // namespace

Dataset sample(const GenerativeSpec& spec, size_t n, uint64_t seed) {
  spec.validate();
  if (n < 1) throw usage_error("sample: n must be >= 1");
  Rng rng(seed);
  int arity = spec.schema.arity();

  std::vector<double> pis;
  for (const auto& c : spec.components) pis.push_back(c.weight);

  std::vector<double> values;
  values.reserve(n * arity);
  for (size_t i = 0; i < n; ++i) {
    size_t c = pick_index(pis, rng.next_unit());
    const auto& comp = spec.components[c];
    for (int v = 0; v < arity; ++v) {
      const LeafDistribution& m = comp.marginals[v];
      if (m.kind == LeafDistribution::Kind::Multinomial) {
        values.push_back(
            static_cast<double>(pick_index(m.probs, rng.next_unit())));
      } else {
        values.push_back(m.mean + std::sqrt(m.variance) * rng.next_gaussian());
      }
    }
  }
  return Dataset(spec.schema, std::move(values));
}

double true_log_density(const GenerativeSpec& spec, const Dataset& d,
                        size_t row) {
  double total = kNegInf;
  for (const auto& c : spec.components) {
    if (c.weight <= 0.0) continue;
    double lp = std::log(c.weight);
    for (int v = 0; v < spec.schema.arity(); ++v) {
      lp += c.marginals[v].log_prob(d.value(row, v));
    }
    total = log_sum_exp2(total, lp);
  }
  return total;
}

StagedMixture genspec_to_mixture(const GenerativeSpec& spec) {
  spec.validate();
  if (spec.schema.is_classification()) {
    throw usage_error("genspec_to_mixture: density schemas only");
  }
  std::vector<Component> components;
  std::vector<double> weights;
  for (const auto& c : spec.components) {
    std::vector<TreeModel> trees;
    for (int v = 0; v < spec.schema.arity(); ++v) {
      std::vector<TreeNode> nodes(1);
      nodes[0].dist = c.marginals[v];
      trees.emplace_back(v, std::move(nodes));
    }
    components.emplace_back(BayesNetComponent(std::move(trees)));
    weights.push_back(c.weight);
  }
  return StagedMixture(spec.schema, std::move(components), std::move(weights));
}

}  // namespace smm
