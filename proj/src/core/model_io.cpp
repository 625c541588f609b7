// Apache License, Version 2.0, refer to LICENSE.txt

#include "core/model_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "core/error.hpp"
#include "core/evaluate.hpp"

namespace smm {

namespace {

constexpr const char* kHeader = "smm-model v1";

void write_tree(std::ostringstream& out, const TreeModel& tree) {
  out << "tree " << tree.target() << " {\n";
  const auto& nodes = tree.nodes();
  // pre-order: node, true subtree, false subtree
  auto emit = [&](auto&& self, int id) -> void {
    const TreeNode& n = nodes[id];
    if (n.is_leaf) {
      if (n.dist.kind == LeafDistribution::Kind::Multinomial) {
        out << "leaf multinomial " << format_double(n.dist.alpha);
        for (double p : n.dist.probs) out << ' ' << format_double(p);
        out << '\n';
      } else {
        out << "leaf gaussian " << format_double(n.dist.mean) << ' '
            << format_double(n.dist.variance) << '\n';
      }
      return;
    }
    if (n.split.test == VarKind::Discrete) {
      out << "split " << n.split.variable << " == " << n.split.state << '\n';
    } else {
      out << "split " << n.split.variable << " < "
          << format_double(n.split.threshold) << '\n';
    }
    self(self, n.yes);
    self(self, n.no);
  };
  emit(emit, 0);
  out << "}\n";
}

}  // namespace

std::string format_model(const StagedMixture& m) {
  std::ostringstream out;
  out << kHeader << '\n';
  out << "task "
      << (m.task() == Task::Classification ? "classification" : "density")
      << '\n';
  out << "schema {\n" << format_schema(m.schema()) << "}\n";
  out << "components " << m.num_components() << '\n';
  for (size_t i = 0; i < m.num_components(); ++i) {
    out << "component {\n";
    out << "weight " << format_double(m.weight(i)) << '\n';
    const Component& c = m.component(i);
    if (c.kind() == Component::Kind::Tree) {
      write_tree(out, c.tree());
    } else {
      out << "bayesnet {\n";
      for (const auto& tree : c.bn().local_trees()) write_tree(out, tree);
      out << "}\n";
    }
    out << "}\n";
  }
  return out.str();
}

void save_model(const StagedMixture& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error(path + ": cannot open for writing");
  out << format_model(m);
  if (!out) throw data_error(path + ": write failed");
}

namespace {

class LineCursor {
 public:
  LineCursor(const std::string& text, std::string origin)
      : origin_(std::move(origin)) {
    std::istringstream in(text);
    std::string raw;
    size_t n = 0;
    while (std::getline(in, raw)) {
      ++n;
      std::string line = trim(raw);
      if (line.empty()) continue;
      lines_.push_back(std::move(line));
      numbers_.push_back(n);
    }
  }

  bool done() const { return pos_ >= lines_.size(); }
  const std::string& peek() const {
    if (done()) throw data_error(origin_ + ": unexpected end of file");
    return lines_[pos_];
  }
  std::string next() {
    std::string line = peek();
    ++pos_;
    return line;
  }
  void expect(const std::string& what) {
    if (next() != what) {
      throw data_error(where() + ": expected '" + what + "'");
    }
  }
  std::string where() const {
    size_t i = pos_ == 0 ? 0 : pos_ - 1;
    return origin_ + ":" +
           (i < numbers_.size() ? std::to_string(numbers_[i]) : "eof");
  }

 private:
  std::string origin_;
  std::vector<std::string> lines_;
  std::vector<size_t> numbers_;
  size_t pos_ = 0;
};

double parse_double_tok(const std::string& tok, const std::string& where) {
  double x = 0.0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
  if (ec != std::errc() || p != tok.data() + tok.size()) {
    throw data_error(where + ": bad number '" + tok + "'");
  }
  return x;
}

long parse_int_tok(const std::string& tok, const std::string& where) {
  long x = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
  if (ec != std::errc() || p != tok.data() + tok.size()) {
    throw data_error(where + ": bad integer '" + tok + "'");
  }
  return x;
}

int parse_node(LineCursor& cur, std::vector<TreeNode>& nodes) {
  std::istringstream toks(cur.next());
  std::string kind;
  toks >> kind;
  if (kind == "leaf") {
    TreeNode node;
    std::string family;
    toks >> family;
    if (family == "multinomial") {
      std::string tok;
      if (!(toks >> tok)) throw data_error(cur.where() + ": missing alpha");
      node.dist.kind = LeafDistribution::Kind::Multinomial;
      node.dist.alpha = parse_double_tok(tok, cur.where());
      while (toks >> tok) {
        node.dist.probs.push_back(parse_double_tok(tok, cur.where()));
      }
      if (node.dist.probs.empty()) {
        throw data_error(cur.where() + ": leaf with no probabilities");
      }
    } else if (family == "gaussian") {
      std::string mean, variance;
      if (!(toks >> mean >> variance)) {
        throw data_error(cur.where() + ": expected mean and variance");
      }
      node.dist.kind = LeafDistribution::Kind::Gaussian;
      node.dist.mean = parse_double_tok(mean, cur.where());
      node.dist.variance = parse_double_tok(variance, cur.where());
    } else {
      throw data_error(cur.where() + ": unknown leaf family '" + family + "'");
    }
    nodes.push_back(std::move(node));
    return static_cast<int>(nodes.size()) - 1;
  }
  if (kind != "split") {
    throw data_error(cur.where() + ": expected split or leaf");
  }
  std::string var_tok, op, value;
  if (!(toks >> var_tok >> op >> value)) {
    throw data_error(cur.where() + ": malformed split");
  }
  TreeNode node;
  node.is_leaf = false;
  node.split.variable = static_cast<int>(parse_int_tok(var_tok, cur.where()));
  if (op == "==") {
    node.split.test = VarKind::Discrete;
    node.split.state = static_cast<int>(parse_int_tok(value, cur.where()));
  } else if (op == "<") {
    node.split.test = VarKind::Continuous;
    node.split.threshold = parse_double_tok(value, cur.where());
  } else {
    throw data_error(cur.where() + ": unknown split operator '" + op + "'");
  }
  int id = static_cast<int>(nodes.size());
  nodes.push_back(std::move(node));
  int yes = parse_node(cur, nodes);
  int no = parse_node(cur, nodes);
  nodes[id].yes = yes;
  nodes[id].no = no;
  return id;
}

TreeModel parse_tree(LineCursor& cur) {
  std::istringstream toks(cur.next());
  std::string kw, target_tok, brace;
  toks >> kw >> target_tok >> brace;
  if (kw != "tree" || brace != "{") {
    throw data_error(cur.where() + ": expected 'tree <target> {'");
  }
  int target = static_cast<int>(parse_int_tok(target_tok, cur.where()));
  std::vector<TreeNode> nodes;
  parse_node(cur, nodes);
  cur.expect("}");
  return TreeModel(target, std::move(nodes));
}

}  // namespace

StagedMixture parse_model_text(const std::string& text,
                               const std::string& origin) {
  LineCursor cur(text, origin);
  if (cur.next() != kHeader) {
    throw data_error(origin + ": not a " + std::string(kHeader) + " file");
  }
  std::istringstream task_line(cur.next());
  std::string kw, task_name;
  task_line >> kw >> task_name;
  if (kw != "task" || (task_name != "density" && task_name != "classification")) {
    throw data_error(cur.where() + ": expected 'task density|classification'");
  }

  cur.expect("schema {");
  std::ostringstream schema_text;
  while (cur.peek() != "}") schema_text << cur.next() << '\n';
  cur.expect("}");
  Schema schema = parse_schema_text(schema_text.str(), origin);
  if (schema.is_classification() != (task_name == "classification")) {
    throw data_error(origin + ": task line contradicts the schema");
  }

  std::istringstream comp_line(cur.next());
  std::string n_tok;
  comp_line >> kw >> n_tok;
  if (kw != "components") {
    throw data_error(cur.where() + ": expected 'components <n>'");
  }
  long n = parse_int_tok(n_tok, cur.where());
  if (n < 1) throw data_error(cur.where() + ": need at least one component");

  std::vector<Component> components;
  std::vector<double> weights;
  for (long i = 0; i < n; ++i) {
    cur.expect("component {");
    std::istringstream weight_line(cur.next());
    std::string w_tok;
    weight_line >> kw >> w_tok;
    if (kw != "weight") throw data_error(cur.where() + ": expected 'weight w'");
    weights.push_back(parse_double_tok(w_tok, cur.where()));

    if (cur.peek() == "bayesnet {") {
      cur.next();
      std::vector<TreeModel> trees;
      while (cur.peek() != "}") trees.push_back(parse_tree(cur));
      cur.expect("}");
      components.emplace_back(BayesNetComponent(std::move(trees)));
    } else {
      components.emplace_back(parse_tree(cur));
    }
    cur.expect("}");
  }
  if (!cur.done()) {
    throw data_error(cur.where() + ": trailing content after components");
  }
  return StagedMixture(std::move(schema), std::move(components),
                       std::move(weights));
}

StagedMixture load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error(path + ": cannot open model file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model_text(buf.str(), path);
}

}  // namespace smm
