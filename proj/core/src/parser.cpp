#include "qcegar/parser.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

namespace qcegar {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_ident(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

std::string lower(std::string_view s) {
  std::string r(s);
  for (char& c : r) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return r;
}

std::vector<std::string_view> split_args(std::string_view s) {
  std::vector<std::string_view> out;
  s = trim(s);
  if (s.empty()) return out;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = s.find(',', start);
    out.push_back(trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

struct Ref {
  std::string name;
  bool neg = false;
};

enum class Op { And, Or, Xor, Ite, Exists, Forall };

struct GateDef {
  std::size_t line = 0;
  Op op = Op::And;
  std::vector<Ref> args;
  std::vector<std::string> bound;
};

Ref parse_ref(std::string_view tok, std::size_t line) {
  Ref r;
  tok = trim(tok);
  if (!tok.empty() && tok.front() == '-') {
    r.neg = true;
    tok = trim(tok.substr(1));
  }
  if (!is_ident(tok)) throw ParseError(line, "malformed literal '" + std::string(tok) + "'");
  r.name = std::string(tok);
  return r;
}

// Splits "name(args)" into name and args; throws on malformed input.
std::pair<std::string_view, std::string_view> call_syntax(std::string_view s, std::size_t line) {
  s = trim(s);
  std::size_t open = s.find('(');
  if (open == std::string_view::npos || s.back() != ')') throw ParseError(line, "expected '<op>(...)'");
  return {trim(s.substr(0, open)), s.substr(open + 1, s.size() - open - 2)};
}

class QcirReader {
 public:
  QbfProblem read(std::string_view text) {
    scan(text);
    check_definitions();
    return expand_all();
  }

 private:
  struct PrefixLine {
    Quantifier q;
    std::vector<std::string> names;
  };

  std::vector<PrefixLine> prefix_lines_;
  std::vector<std::string> free_names_;
  std::optional<Ref> output_;
  std::size_t output_line_ = 0;
  std::vector<GateDef> gates_;
  std::unordered_map<std::string, std::size_t> gate_index_;
  std::unordered_set<std::string> declared_;
  std::unordered_set<std::string> gate_bound_;

  // Expansion state.
  Formula arena_;
  std::vector<std::string> names_{""};
  std::unordered_set<std::string> used_names_;
  std::vector<Scope> prefix_;
  std::vector<bool> has_quant_;
  std::map<std::tuple<std::size_t, bool>, NodeId> memo_;

  void declare(const std::string& name, std::size_t line) {
    if (!is_ident(name)) throw ParseError(line, "malformed variable '" + name + "'");
    if (!declared_.insert(name).second) throw ParseError(line, "variable '" + name + "' is bound twice");
  }

  void scan(std::string_view text) {
    std::size_t line_no = 0;
    bool seen_gate = false;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t eol = text.find('\n', pos);
      std::string_view raw = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
      pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
      ++line_no;
      std::string_view line = trim(raw);
      if (line.empty() || line.front() == '#') continue;

      std::size_t eq = line.find('=');
      if (eq == std::string_view::npos) {
        auto [op, body] = call_syntax(line, line_no);
        std::string kw = lower(op);
        if (kw == "exists" || kw == "forall" || kw == "free") {
          if (seen_gate || output_) throw ParseError(line_no, "quantifier line after output or gates");
          std::vector<std::string> names;
          for (auto a : split_args(body)) {
            std::string n(a);
            declare(n, line_no);
            names.push_back(n);
          }
          if (kw == "free") {
            free_names_.insert(free_names_.end(), names.begin(), names.end());
          } else {
            prefix_lines_.push_back({kw == "exists" ? Quantifier::Exists : Quantifier::Forall, std::move(names)});
          }
        } else if (kw == "output") {
          if (output_) throw ParseError(line_no, "duplicate output line");
          auto args = split_args(body);
          if (args.size() != 1) throw ParseError(line_no, "output takes exactly one literal");
          output_ = parse_ref(args[0], line_no);
          output_line_ = line_no;
        } else {
          throw ParseError(line_no, "unknown statement '" + std::string(op) + "'");
        }
        continue;
      }

      seen_gate = true;
      std::string id(trim(line.substr(0, eq)));
      if (!is_ident(id)) throw ParseError(line_no, "malformed gate id '" + id + "'");
      if (declared_.count(id)) throw ParseError(line_no, "gate id '" + id + "' is a variable");
      if (gate_index_.count(id)) throw ParseError(line_no, "gate '" + id + "' defined twice");
      auto [op, body] = call_syntax(line.substr(eq + 1), line_no);
      std::string kw = lower(op);
      GateDef g;
      g.line = line_no;
      if (kw == "exists" || kw == "forall") {
        g.op = kw == "exists" ? Op::Exists : Op::Forall;
        std::size_t semi = body.find(';');
        if (semi == std::string_view::npos) throw ParseError(line_no, "quantifier gate needs ';'");
        for (auto a : split_args(body.substr(0, semi))) {
          if (!is_ident(a)) throw ParseError(line_no, "malformed variable '" + std::string(a) + "'");
          g.bound.emplace_back(a);
        }
        auto rest = split_args(body.substr(semi + 1));
        if (rest.size() != 1) throw ParseError(line_no, "quantifier gate takes one literal");
        g.args.push_back(parse_ref(rest[0], line_no));
      } else {
        if (kw == "and") g.op = Op::And;
        else if (kw == "or") g.op = Op::Or;
        else if (kw == "xor") g.op = Op::Xor;
        else if (kw == "ite") g.op = Op::Ite;
        else throw ParseError(line_no, "unknown gate type '" + std::string(op) + "'");
        for (auto a : split_args(body)) g.args.push_back(parse_ref(a, line_no));
        if (g.op == Op::Xor && g.args.size() != 2) throw ParseError(line_no, "xor takes two literals");
        if (g.op == Op::Ite && g.args.size() != 3) throw ParseError(line_no, "ite takes three literals");
      }
      gate_index_.emplace(id, gates_.size());
      gates_.push_back(std::move(g));
    }
    if (!output_) throw ParseError(line_no == 0 ? 1 : line_no, "missing output line");
  }

  bool is_var_name(const std::string& n) const { return declared_.count(n) || gate_bound_.count(n); }

  // Resolves references, detects cycles and marks gates whose expansion depends on
  // quantifier gates (these are expanded afresh at every occurrence).
  void check_definitions() {
    for (const auto& g : gates_)
      for (const auto& b : g.bound) gate_bound_.insert(b);
    for (const auto& [id, i] : gate_index_) {
      if (gate_bound_.count(id)) throw ParseError(gates_[i].line, "gate id '" + id + "' is a variable");
    }
    auto resolve = [&](const Ref& r, std::size_t line) {
      if (is_var_name(r.name)) return;
      if (!gate_index_.count(r.name)) throw ParseError(line, "undefined reference '" + r.name + "'");
    };
    for (const auto& g : gates_)
      for (const auto& a : g.args) resolve(a, g.line);
    resolve(*output_, output_line_);

    has_quant_.assign(gates_.size(), false);
    std::vector<std::uint8_t> state(gates_.size(), 0);  // 0 new, 1 on stack, 2 done
    std::vector<std::pair<std::size_t, std::size_t>> stack;
    for (std::size_t root = 0; root < gates_.size(); ++root) {
      if (state[root] != 0) continue;
      stack.push_back({root, 0});
      state[root] = 1;
      while (!stack.empty()) {
        auto& [gi, next] = stack.back();
        const GateDef& g = gates_[gi];
        if (next < g.args.size()) {
          const Ref& a = g.args[next++];
          if (is_var_name(a.name)) continue;
          std::size_t ci = gate_index_.at(a.name);
          if (state[ci] == 1) throw ParseError(gates_[ci].line, "cyclic gate definition through '" + a.name + "'");
          if (state[ci] == 0) {
            state[ci] = 1;
            stack.push_back({ci, 0});
          }
          continue;
        }
        bool q = g.op == Op::Exists || g.op == Op::Forall;
        for (const auto& a : g.args) {
          if (gate_bound_.count(a.name)) q = true;
          else if (!is_var_name(a.name) && has_quant_[gate_index_.at(a.name)]) q = true;
        }
        has_quant_[gi] = q;
        state[gi] = 2;
        stack.pop_back();
      }
    }
  }

  Var fresh_var(const std::string& base) {
    std::string name = base;
    for (std::size_t k = 1; used_names_.count(name); ++k) name = base + "_" + std::to_string(k);
    used_names_.insert(name);
    names_.push_back(name);
    return static_cast<Var>(names_.size() - 1);
  }

  using Env = std::unordered_map<std::string, Var>;

  NodeId expand_ref(const Ref& r, bool neg, const Env& env, std::size_t line) {
    bool n = r.neg != neg;
    auto v = env.find(r.name);
    if (v != env.end()) return arena_.literal(Literal(v->second, n));
    auto g = gate_index_.find(r.name);
    if (g == gate_index_.end()) throw ParseError(line, "variable '" + r.name + "' used outside its quantifier gate");
    return expand_gate(g->second, n, env);
  }

  NodeId expand_gate(std::size_t gi, bool neg, const Env& env) {
    const bool memoize = !has_quant_[gi];
    if (memoize) {
      auto it = memo_.find({gi, neg});
      if (it != memo_.end()) return it->second;
    }
    const GateDef& g = gates_[gi];
    auto sub = [&](std::size_t i, bool n) { return expand_ref(g.args[i], n, env, g.line); };
    NodeId result{};
    switch (g.op) {
      case Op::And:
      case Op::Or: {
        std::vector<NodeId> kids;
        for (std::size_t i = 0; i < g.args.size(); ++i) kids.push_back(sub(i, neg));
        bool conj = (g.op == Op::And) != neg;
        result = conj ? arena_.make_and(kids) : arena_.make_or(kids);
        break;
      }
      case Op::Xor: {
        // a xor b = (a & ~b) | (~a & b); its negation = (a & b) | (~a & ~b).
        NodeId l = arena_.make_and({sub(0, false), sub(1, !neg)});
        NodeId r = arena_.make_and({sub(0, true), sub(1, neg)});
        result = arena_.make_or({l, r});
        break;
      }
      case Op::Ite: {
        NodeId l = arena_.make_and({sub(0, false), sub(1, neg)});
        NodeId r = arena_.make_and({sub(0, true), sub(2, neg)});
        result = arena_.make_or({l, r});
        break;
      }
      case Op::Exists:
      case Op::Forall: {
        Quantifier q = g.op == Op::Exists ? Quantifier::Exists : Quantifier::Forall;
        if (neg) q = flip(q);
        Env inner = env;
        Scope s{q, {}};
        for (const auto& b : g.bound) {
          Var v = fresh_var(b);
          inner[b] = v;
          s.vars.push_back(v);
        }
        prefix_.push_back(std::move(s));
        result = expand_ref(g.args[0], neg, inner, g.line);
        break;
      }
    }
    if (memoize) memo_.emplace(std::make_tuple(gi, neg), result);
    return result;
  }

  QbfProblem expand_all() {
    Env env;
    for (const auto& pl : prefix_lines_) {
      Scope s{pl.q, {}};
      for (const auto& n : pl.names) {
        Var v = fresh_var(n);
        env[n] = v;
        s.vars.push_back(v);
      }
      prefix_.push_back(std::move(s));
    }
    for (const auto& n : free_names_) env[n] = fresh_var(n);
    NodeId root = expand_ref(*output_, false, env, output_line_);
    return QbfProblem(prefix_, arena_, root, names_);
  }
};

}  // namespace

QbfProblem parse_qcir(std::string_view text) { return QcirReader().read(text); }

std::vector<std::size_t> qcir_gate_ids(const QbfProblem& problem) {
  const Formula& f = problem.formula();
  std::vector<std::size_t> gate(f.size(), 0);
  std::size_t next = problem.num_vars() + 1;
  // Preorder numbering means children have larger ids than their parent, so a
  // reverse sweep defines every gate before its first use.
  for (std::size_t i = f.size(); i-- > 0;)
    if (f[node_id(i)].kind != NodeKind::Lit) gate[i] = next++;
  return gate;
}

std::string write_qcir(const QbfProblem& problem) {
  const Formula& f = problem.formula();
  const std::size_t nv = problem.num_vars();

  std::vector<std::string> token(nv + 1);
  std::unordered_set<std::string> taken;
  for (Var v = 1; v <= nv; ++v) {
    const std::string& n = problem.name(v);
    bool digits = !n.empty() && std::all_of(n.begin(), n.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
    bool usable = is_ident(n) && (!digits || n == std::to_string(v)) && !taken.count(n);
    token[v] = usable ? n : std::to_string(v);
    taken.insert(token[v]);
  }

  std::ostringstream os;
  os << "#QCIR-G14\n";
  for (const auto& s : problem.prefix()) {
    os << to_string(s.quantifier) << '(';
    for (std::size_t i = 0; i < s.vars.size(); ++i) os << (i ? ", " : "") << token[s.vars[i]];
    os << ")\n";
  }

  auto lit_token = [&](Literal l) { return (l.negated() ? "-" : "") + token[l.var()]; };

  const std::vector<std::size_t> gate = qcir_gate_ids(problem);
  std::size_t next = nv + 1;
  std::ostringstream body;
  for (std::size_t i = f.size(); i-- > 0;) {
    const Node& n = f[node_id(i)];
    if (n.kind == NodeKind::Lit) continue;
    next = std::max(next, gate[i] + 1);
    body << gate[i] << " = ";
    switch (n.kind) {
      case NodeKind::True: body << "and()"; break;
      case NodeKind::False: body << "or()"; break;
      default: {
        body << (n.kind == NodeKind::And ? "and(" : "or(");
        for (std::size_t k = 0; k < n.children.size(); ++k) {
          const Node& c = f[n.children[k]];
          body << (k ? ", " : "");
          if (c.kind == NodeKind::Lit) body << lit_token(c.lit);
          else body << gate[index(n.children[k])];
        }
        body << ')';
      }
    }
    body << '\n';
  }
  const Node& root = f[problem.matrix()];
  if (root.kind == NodeKind::Lit) {
    os << "output(" << next << ")\n" << body.str() << next << " = and(" << lit_token(root.lit) << ")\n";
  } else {
    os << "output(" << gate[0] << ")\n" << body.str();
  }
  return os.str();
}

QbfProblem parse_qdimacs(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  long long declared_vars = 0;
  std::vector<Scope> prefix;
  Formula f;
  std::vector<NodeId> clauses;
  bool in_prefix = true;

  auto read_ints = [&](std::istringstream& ls) {
    std::vector<long long> vals;
    std::string tok;
    while (ls >> tok) {
      try {
        std::size_t used = 0;
        long long v = std::stoll(tok, &used);
        if (used != tok.size()) throw ParseError(line_no, "malformed number '" + tok + "'");
        vals.push_back(v);
      } catch (const std::logic_error&) {
        throw ParseError(line_no, "malformed number '" + tok + "'");
      }
    }
    if (vals.empty() || vals.back() != 0) throw ParseError(line_no, "line is not terminated by 0");
    vals.pop_back();
    for (long long v : vals) {
      if (v == 0) throw ParseError(line_no, "unexpected 0 inside a line");
      if (std::llabs(v) > declared_vars) throw ParseError(line_no, "variable " + std::to_string(std::llabs(v)) + " exceeds header");
    }
    return vals;
  };

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view t = trim(line);
    if (t.empty() || t.front() == 'c') continue;
    std::istringstream ls{std::string(t)};
    if (t.front() == 'p') {
      std::string p, cnf;
      long long c = 0;
      if (header || !(ls >> p >> cnf >> declared_vars >> c) || cnf != "cnf" || declared_vars < 0 || c < 0)
        throw ParseError(line_no, "malformed header");
      std::string extra;
      if (ls >> extra) throw ParseError(line_no, "malformed header");
      header = true;
      continue;
    }
    if (!header) throw ParseError(line_no, "missing 'p cnf' header");
    if (t.front() == 'a' || t.front() == 'e') {
      if (!in_prefix) throw ParseError(line_no, "quantifier line after clauses");
      char q = 0;
      ls >> q;
      Scope s{q == 'a' ? Quantifier::Forall : Quantifier::Exists, {}};
      for (long long v : read_ints(ls)) {
        if (v < 0) throw ParseError(line_no, "negative variable in quantifier line");
        s.vars.push_back(static_cast<Var>(v));
      }
      prefix.push_back(std::move(s));
      continue;
    }
    in_prefix = false;
    std::vector<NodeId> lits;
    for (long long v : read_ints(ls)) lits.push_back(f.literal(Literal(static_cast<Var>(std::llabs(v)), v < 0)));
    clauses.push_back(f.make_or(lits));
  }
  if (!header) throw ParseError(line_no == 0 ? 1 : line_no, "missing 'p cnf' header");

  std::vector<std::string> names(static_cast<std::size_t>(declared_vars) + 1);
  for (std::size_t v = 1; v < names.size(); ++v) names[v] = std::to_string(v);
  NodeId root = f.make_and(clauses);
  try {
    return QbfProblem(std::move(prefix), f, root, std::move(names));
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(line_no, e.what());
  }
}

InputFormat detect_format(const std::string& path, std::string_view text) {
  auto ends_with = [&](std::string_view suffix) {
    return path.size() >= suffix.size() && lower(path.substr(path.size() - suffix.size())) == suffix;
  };
  if (ends_with(".qcir")) return InputFormat::Qcir;
  if (ends_with(".qdimacs") || ends_with(".cnf")) return InputFormat::Qdimacs;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view l = trim(text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos));
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    if (l.empty()) continue;
    if (l.rfind("#QCIR", 0) == 0) return InputFormat::Qcir;
    if (l.front() == 'c' && (l.size() == 1 || l[1] == ' ')) continue;
    if (l.front() == '#') continue;
    return l.rfind("p cnf", 0) == 0 ? InputFormat::Qdimacs : InputFormat::Qcir;
  }
  return InputFormat::Qcir;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

QbfProblem read_problem_file(const std::string& path) {
  std::string text = read_text_file(path);
  return detect_format(path, text) == InputFormat::Qcir ? parse_qcir(text) : parse_qdimacs(text);
}

}  // namespace qcegar
