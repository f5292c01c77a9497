#include "iac/builtin_solver.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "iac/errors.hpp"
#include "iac/formula.hpp"
#include "iac/sexpr.hpp"
#include "iac/user_constraints.hpp"

namespace iac {

namespace {

using Clock = std::chrono::steady_clock;

struct DeadlineExceeded {};

/// c + k*delta for an infinitesimal delta > 0.
struct Delta {
  Rational c = 0;
  Rational k = 0;

  friend bool operator<(const Delta& a, const Delta& b) {
    return a.c < b.c || (a.c == b.c && a.k < b.k);
  }
  friend bool operator<=(const Delta& a, const Delta& b) { return !(b < a); }
  friend bool operator==(const Delta& a, const Delta& b) { return a.c == b.c && a.k == b.k; }
  Delta operator+(const Delta& o) const { return {c + o.c, k + o.k}; }
  Delta operator-(const Delta& o) const { return {c - o.c, k - o.k}; }
  Delta scaled(const Rational& s) const { return {c * s, k * s}; }
};

struct Bound {
  Delta value;
  int reason = 0;  // assertion index, or a negative branch tag
};

/// Sum of coefficient*variable compared to a constant.
struct Atom {
  std::vector<std::pair<int, Rational>> terms;  // ascending variable index
  Relation relation = Relation::Le;
  Rational rhs = 0;
  int assertion = 0;
};

/// Bounded-variable simplex over delta-rationals with Bland's rule.
class Simplex {
 public:
  explicit Simplex(int variables)
      : lower_(variables), upper_(variables), beta_(variables), row_of_(variables, -1) {}

  /// A fresh basic variable equal to sum(row). Every variable in `row` must
  /// still be nonbasic.
  int add_row(const std::vector<std::pair<int, Rational>>& row) {
    int v = static_cast<int>(beta_.size());
    lower_.emplace_back();
    upper_.emplace_back();
    row_of_.push_back(static_cast<int>(rows_.size()));
    Delta value;
    std::map<int, Rational> r;
    for (const auto& [x, a] : row) {
      r[x] = a;
      value = value + beta_[x].scaled(a);
    }
    beta_.push_back(value);
    rows_.push_back(std::move(r));
    basic_.push_back(v);
    return v;
  }

  bool assert_upper(int v, const Delta& d, int reason) {
    if (upper_[v] && upper_[v]->value <= d) return true;
    if (lower_[v] && d < lower_[v]->value) {
      conflict_ = {lower_[v]->reason, reason};
      return false;
    }
    upper_[v] = Bound{d, reason};
    if (row_of_[v] < 0 && d < beta_[v]) update(v, d);
    return true;
  }

  bool assert_lower(int v, const Delta& d, int reason) {
    if (lower_[v] && d <= lower_[v]->value) return true;
    if (upper_[v] && upper_[v]->value < d) {
      conflict_ = {upper_[v]->reason, reason};
      return false;
    }
    lower_[v] = Bound{d, reason};
    if (row_of_[v] < 0 && beta_[v] < d) update(v, d);
    return true;
  }

  bool check(Clock::time_point deadline) {
    while (true) {
      if (Clock::now() > deadline) throw DeadlineExceeded{};
      int i = -1;
      for (int v = 0; v < static_cast<int>(beta_.size()); ++v) {
        if (row_of_[v] >= 0 && (below_lower(v) || above_upper(v))) {
          i = v;
          break;
        }
      }
      if (i < 0) return true;
      const auto& row = rows_[row_of_[i]];
      bool raise = below_lower(i);
      int entering = -1;
      for (const auto& [j, a] : row) {
        bool up = (a > 0) == raise;  // does x_j need to increase?
        if (up ? can_increase(j) : can_decrease(j)) {
          entering = j;
          break;
        }
      }
      if (entering < 0) {
        conflict_.clear();
        conflict_.insert(raise ? lower_[i]->reason : upper_[i]->reason);
        for (const auto& [j, a] : row) {
          bool up = (a > 0) == raise;
          conflict_.insert(up ? upper_[j]->reason : lower_[j]->reason);
        }
        return false;
      }
      pivot_and_update(i, entering, raise ? lower_[i]->value : upper_[i]->value);
    }
  }

  const std::set<int>& conflict() const { return conflict_; }

  /// Concrete values for a delta small enough to satisfy every bound.
  std::vector<Rational> concrete_values() const {
    Rational delta = 1;
    for (std::size_t v = 0; v < beta_.size(); ++v) {
      const auto& b = beta_[v];
      if (lower_[v]) {
        const auto& l = lower_[v]->value;
        if (l.c < b.c && l.k > b.k) delta = std::min(delta, Rational((b.c - l.c) / (l.k - b.k)));
      }
      if (upper_[v]) {
        const auto& u = upper_[v]->value;
        if (b.c < u.c && b.k > u.k) delta = std::min(delta, Rational((u.c - b.c) / (b.k - u.k)));
      }
    }
    std::vector<Rational> out;
    out.reserve(beta_.size());
    for (const auto& b : beta_) out.push_back(b.c + b.k * delta);
    return out;
  }

 private:
  bool below_lower(int v) const { return lower_[v] && beta_[v] < lower_[v]->value; }
  bool above_upper(int v) const { return upper_[v] && upper_[v]->value < beta_[v]; }
  bool can_increase(int v) const { return !upper_[v] || beta_[v] < upper_[v]->value; }
  bool can_decrease(int v) const { return !lower_[v] || lower_[v]->value < beta_[v]; }

  void update(int v, const Delta& d) {
    Delta theta = d - beta_[v];
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      auto it = rows_[r].find(v);
      if (it != rows_[r].end()) beta_[basic_[r]] = beta_[basic_[r]] + theta.scaled(it->second);
    }
    beta_[v] = d;
  }

  void pivot_and_update(int i, int j, const Delta& target) {
    int r = row_of_[i];
    Rational a = rows_[r].at(j);
    Delta theta = (target - beta_[i]).scaled(Rational(1) / a);
    beta_[i] = target;
    beta_[j] = beta_[j] + theta;
    for (std::size_t k = 0; k < rows_.size(); ++k) {
      if (static_cast<int>(k) == r) continue;
      auto it = rows_[k].find(j);
      if (it != rows_[k].end()) beta_[basic_[k]] = beta_[basic_[k]] + theta.scaled(it->second);
    }
    pivot(r, i, j);
  }

  void pivot(int r, int i, int j) {
    auto& row = rows_[r];
    Rational a = row.at(j);
    std::map<int, Rational> solved;
    solved[i] = Rational(1) / a;
    for (const auto& [k, c] : row) {
      if (k != j) solved[k] = -c / a;
    }
    row = solved;
    for (std::size_t k = 0; k < rows_.size(); ++k) {
      if (static_cast<int>(k) == r) continue;
      auto& other = rows_[k];
      auto it = other.find(j);
      if (it == other.end()) continue;
      Rational b = it->second;
      other.erase(it);
      for (const auto& [x, c] : solved) {
        auto& slot = other[x];
        slot += b * c;
        if (slot == 0) other.erase(x);
      }
    }
    basic_[r] = j;
    row_of_[j] = r;
    row_of_[i] = -1;
  }

  std::vector<std::optional<Bound>> lower_, upper_;
  std::vector<Delta> beta_;
  std::vector<int> row_of_;
  std::vector<int> basic_;
  std::vector<std::map<int, Rational>> rows_;
  std::set<int> conflict_;
};

enum class Outcome { Sat, Unsat, Unknown };

struct Result {
  Outcome outcome = Outcome::Unknown;
  std::vector<Rational> model;
  std::set<int> core;
};

struct Problem {
  std::vector<std::string> names;
  std::vector<bool> is_int;
  std::vector<Atom> atoms;
};

/// For atoms over Int variables only: integral coefficients with gcd 1 and a
/// non-strict bound. Returns false when the atom has no integer solution.
bool tighten_integer_atom(Atom& atom) {
  using boost::multiprecision::denominator;
  using boost::multiprecision::numerator;
  BigInt scale = denominator(atom.rhs);
  for (const auto& [_, a] : atom.terms) scale = boost::multiprecision::lcm(scale, BigInt(denominator(a)));
  BigInt g = 0;
  for (auto& [_, a] : atom.terms) {
    a *= Rational(scale);
    g = boost::multiprecision::gcd(g, BigInt(numerator(a)));
  }
  Rational rhs = atom.rhs * Rational(scale);
  for (auto& [_, a] : atom.terms) a /= Rational(g);
  rhs /= Rational(g);
  switch (atom.relation) {
    case Relation::Eq:
      if (!is_integer(rhs)) return false;
      break;
    case Relation::Le:
      rhs = Rational(floor_of(rhs));
      break;
    case Relation::Lt:
      rhs = Rational(ceil_of(rhs) - 1);
      atom.relation = Relation::Le;
      break;
    case Relation::Ge:
      rhs = Rational(ceil_of(rhs));
      break;
    case Relation::Gt:
      rhs = Rational(floor_of(rhs) + 1);
      atom.relation = Relation::Ge;
      break;
  }
  atom.rhs = rhs;
  return true;
}

bool constant_holds(Relation r, const Rational& rhs) {
  switch (r) {
    case Relation::Eq: return rhs == 0;
    case Relation::Le: return 0 <= rhs;
    case Relation::Lt: return 0 < rhs;
    case Relation::Ge: return 0 >= rhs;
    case Relation::Gt: return 0 > rhs;
  }
  return false;
}

Relation flipped(Relation r) {
  switch (r) {
    case Relation::Le: return Relation::Ge;
    case Relation::Lt: return Relation::Gt;
    case Relation::Ge: return Relation::Le;
    case Relation::Gt: return Relation::Lt;
    default: return r;
  }
}

bool assert_relation(Simplex& s, int v, Relation r, const Rational& value, int reason) {
  switch (r) {
    case Relation::Eq:
      return s.assert_lower(v, {value, 0}, reason) && s.assert_upper(v, {value, 0}, reason);
    case Relation::Le: return s.assert_upper(v, {value, 0}, reason);
    case Relation::Lt: return s.assert_upper(v, {value, -1}, reason);
    case Relation::Ge: return s.assert_lower(v, {value, 0}, reason);
    case Relation::Gt: return s.assert_lower(v, {value, 1}, reason);
  }
  return false;
}

class Solver {
 public:
  Solver(const Problem& p, Clock::time_point deadline) : p_(p), deadline_(deadline) {}

  /// Decides the conjunction of the atoms whose assertion is in `active`.
  Result solve(const std::set<int>& active) {
    int n = static_cast<int>(p_.names.size());
    Simplex s(n);
    std::map<std::vector<std::pair<int, Rational>>, int> slacks;
    struct Pending {
      int var;
      Relation relation;
      Rational value;
      int reason;
    };
    std::vector<Pending> bounds;

    for (const auto& atom : p_.atoms) {
      if (active.count(atom.assertion) == 0) continue;
      if (atom.terms.empty()) {
        if (!constant_holds(atom.relation, atom.rhs)) {
          return {Outcome::Unsat, {}, {atom.assertion}};
        }
        continue;
      }
      // Normalize so the leading coefficient is 1.
      Rational lead = atom.terms.front().second;
      Relation r = lead < 0 ? flipped(atom.relation) : atom.relation;
      Rational value = atom.rhs / lead;
      if (atom.terms.size() == 1) {
        bounds.push_back({atom.terms.front().first, r, value, atom.assertion});
        continue;
      }
      std::vector<std::pair<int, Rational>> row;
      for (const auto& [x, a] : atom.terms) row.emplace_back(x, a / lead);
      auto [it, fresh] = slacks.emplace(row, 0);
      if (fresh) it->second = s.add_row(row);
      bounds.push_back({it->second, r, value, atom.assertion});
    }
    for (const auto& b : bounds) {
      if (!assert_relation(s, b.var, b.relation, b.value, b.reason)) {
        return {Outcome::Unsat, {}, s.conflict()};
      }
    }
    nodes_ = 0;
    auto result = branch(s, 0);
    if (result.outcome == Outcome::Sat) result.model.resize(n);
    return result;
  }

 private:
  static constexpr int kNodeLimit = 20000;
  // Branching on an unbounded integer can run forever; give up well before
  // the recursion exhausts the stack.
  static constexpr int kDepthLimit = 400;

  Result branch(Simplex& s, int depth) {
    if (!s.check(deadline_)) return {Outcome::Unsat, {}, s.conflict()};
    auto values = s.concrete_values();
    int split = -1;
    for (std::size_t v = 0; v < p_.names.size(); ++v) {
      if (p_.is_int[v] && !is_integer(values[v])) {
        split = static_cast<int>(v);
        break;
      }
    }
    if (split < 0) return {Outcome::Sat, std::move(values), {}};
    if (++nodes_ > kNodeLimit || depth >= kDepthLimit) return {Outcome::Unknown, {}, {}};

    int tag = -(depth + 1);
    BigInt f = floor_of(values[split]);
    Result sides[2];
    for (int side = 0; side < 2; ++side) {
      Simplex copy = s;
      bool ok = side == 0 ? copy.assert_upper(split, {Rational(f), 0}, tag)
                          : copy.assert_lower(split, {Rational(f + 1), 0}, tag);
      sides[side] = ok ? branch(copy, depth + 1) : Result{Outcome::Unsat, {}, copy.conflict()};
      if (sides[side].outcome == Outcome::Sat) return std::move(sides[side]);
      // A conflict that does not use this branch refutes both sides.
      if (sides[side].outcome == Outcome::Unsat && sides[side].core.count(tag) == 0) {
        return std::move(sides[side]);
      }
    }
    if (sides[0].outcome == Outcome::Unknown || sides[1].outcome == Outcome::Unknown) {
      return {Outcome::Unknown, {}, {}};
    }
    Result merged{Outcome::Unsat, {}, {}};
    for (auto& side : sides) {
      for (int reason : side.core) {
        if (reason != tag) merged.core.insert(reason);
      }
    }
    return merged;
  }

  const Problem& p_;
  Clock::time_point deadline_;
  int nodes_ = 0;
};

/// Flattens an assertion into atoms; false when it uses connectives outside
/// conjunctions of comparisons.
bool collect_atoms(const SExpr& term, int assertion, const SymbolResolver& resolve,
                   std::vector<Atom>& out) {
  if (term.kind == SExpr::Kind::Symbol && !term.quoted) {
    if (term.text == "true") return true;
    if (term.text == "false") {
      out.push_back({{}, Relation::Le, -1, assertion});
      return true;
    }
  }
  if (!term.is_list()) return false;
  auto op = term.head();
  if (op == "and") {
    for (std::size_t i = 1; i < term.items.size(); ++i) {
      if (!collect_atoms(term.items[i], assertion, resolve, out)) return false;
    }
    return true;
  }
  bool negate = false;
  const SExpr* cmp = &term;
  if (op == "not") {
    if (term.items.size() != 2) return false;
    negate = true;
    cmp = &term.items[1];
  }
  auto head = cmp->head();
  std::optional<Relation> rel;
  if (head == "=") rel = Relation::Eq;
  if (head == "<=") rel = Relation::Le;
  if (head == "<") rel = Relation::Lt;
  if (head == ">=") rel = Relation::Ge;
  if (head == ">") rel = Relation::Gt;
  if (!rel || cmp->items.size() < 3) return false;
  if (negate) {
    if (*rel == Relation::Eq || cmp->items.size() != 3) return false;
    switch (*rel) {
      case Relation::Le: rel = Relation::Gt; break;
      case Relation::Lt: rel = Relation::Ge; break;
      case Relation::Ge: rel = Relation::Lt; break;
      case Relation::Gt: rel = Relation::Le; break;
      default: break;
    }
  }
  std::vector<LinearExpr> args;
  for (std::size_t i = 1; i < cmp->items.size(); ++i) {
    auto e = linear_of(cmp->items[i], resolve);
    if (!e) return false;
    args.push_back(std::move(*e));
  }
  for (std::size_t i = 0; i + 1 < args.size(); ++i) {
    LinearExpr diff = args[i];
    diff.add(args[i + 1], -1);
    Atom atom;
    atom.relation = *rel;
    atom.rhs = -diff.constant();
    atom.assertion = assertion;
    for (const auto& t : diff.terms()) atom.terms.emplace_back(static_cast<int>(t.var), t.coefficient);
    std::sort(atom.terms.begin(), atom.terms.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    out.push_back(std::move(atom));
  }
  return true;
}

std::string error_line(const std::string& message) {
  std::string escaped;
  for (char c : message) {
    escaped += c;
    if (c == '"') escaped += '"';
  }
  return "(error \"" + escaped + "\")\n";
}

std::string render_value(const Rational& v, bool is_int) {
  return is_int ? smtlib_int(v) : smtlib_real(v);
}

class Session {
 public:
  explicit Session(std::chrono::milliseconds timeout) : deadline_(Clock::now() + timeout) {}

  std::string run(std::string_view script) {
    std::vector<SExpr> commands;
    try {
      commands = parse_sexprs(script);
    } catch (const SmtSyntaxError& e) {
      return error_line(e.what());
    }
    for (const auto& cmd : commands) {
      auto head = cmd.head();
      if (head == "exit") break;
      try {
        execute(cmd, head);
      } catch (const SmtSyntaxError& e) {
        out_ += error_line(e.what());
      }
    }
    return out_;
  }

 private:
  void execute(const SExpr& cmd, std::string_view head) {
    if (head == "set-option" || head == "set-logic" || head == "set-info") {
      if (head == "set-option" && cmd.items.size() == 3 && cmd.items[1].text == ":produce-unsat-cores") {
        produce_cores_ = cmd.items[2].is_symbol("true");
      }
      return;
    }
    if (head == "declare-const" || head == "declare-fun") {
      std::size_t sort_at = head == "declare-const" ? 2 : 3;
      if (cmd.items.size() != sort_at + 1 || cmd.items[1].kind != SExpr::Kind::Symbol ||
          (head == "declare-fun" && !(cmd.items[2].is_list() && cmd.items[2].items.empty()))) {
        throw SmtSyntaxError("malformed " + std::string(head));
      }
      const auto& sort = cmd.items[sort_at];
      if (!sort.is_symbol("Int") && !sort.is_symbol("Real")) {
        throw SmtSyntaxError("unsupported sort " + to_string(sort));
      }
      const auto& name = cmd.items[1].text;
      if (index_.count(name) != 0) throw SmtSyntaxError("constant '" + name + "' already declared");
      index_[name] = static_cast<VarId>(problem_.names.size());
      problem_.names.push_back(name);
      problem_.is_int.push_back(sort.is_symbol("Int"));
      return;
    }
    if (head == "assert") {
      if (cmd.items.size() != 2) throw SmtSyntaxError("assert takes one term");
      const SExpr* term = &cmd.items[1];
      std::string name;
      if (term->head() == "!") {
        for (std::size_t i = 2; i + 1 < term->items.size(); i += 2) {
          if (term->items[i].text == ":named") name = term->items[i + 1].text;
        }
        term = &term->items.at(1);
      }
      check_symbols(*term);
      int index = static_cast<int>(assertion_names_.size());
      assertion_names_.push_back(name);
      SymbolResolver resolve = [&](const std::string& s) -> std::optional<VarId> {
        auto it = index_.find(s);
        if (it == index_.end()) return std::nullopt;
        return it->second;
      };
      std::vector<Atom> atoms;
      if (!collect_atoms(*term, index, resolve, atoms)) {
        unsupported_ = true;
        return;
      }
      for (auto& atom : atoms) {
        bool all_int = std::all_of(atom.terms.begin(), atom.terms.end(),
                                   [&](const auto& t) { return problem_.is_int[t.first]; });
        if (all_int && !atom.terms.empty() && !tighten_integer_atom(atom)) {
          atom.terms.clear();
          atom.relation = Relation::Le;
          atom.rhs = -1;
        }
        problem_.atoms.push_back(std::move(atom));
      }
      return;
    }
    if (head == "check-sat") {
      check_sat();
      return;
    }
    if (head == "get-model") {
      if (last_.outcome != Outcome::Sat || !checked_) throw SmtSyntaxError("model is not available");
      out_ += "(\n";
      for (std::size_t v = 0; v < problem_.names.size(); ++v) {
        bool is_int = problem_.is_int[v];
        out_ += "  (define-fun " + quote_symbol(problem_.names[v]) + " () " + (is_int ? "Int " : "Real ") +
                render_value(last_.model[v], is_int) + ")\n";
      }
      out_ += ")\n";
      return;
    }
    if (head == "get-unsat-core") {
      if (last_.outcome != Outcome::Unsat || !checked_) throw SmtSyntaxError("unsat core is not available");
      std::string line = "(";
      bool first = true;
      for (int a : last_.core) {
        if (a < 0 || assertion_names_[a].empty()) continue;
        line += (first ? "" : " ") + quote_symbol(assertion_names_[a]);
        first = false;
      }
      out_ += line + ")\n";
      return;
    }
    if (head == "maximize" || head == "minimize" || head == "get-objectives") {
      throw SmtSyntaxError(std::string(head) + " is not supported by the builtin solver");
    }
    throw SmtSyntaxError("unsupported command " + (head.empty() ? to_string(cmd) : std::string(head)));
  }

  void check_symbols(const SExpr& term) const {
    if (term.kind == SExpr::Kind::Symbol) {
      bool literal = !term.quoted && (term.text == "true" || term.text == "false");
      if (!literal && index_.count(term.text) == 0) {
        throw SmtSyntaxError("unknown constant " + quote_symbol(term.text));
      }
    }
    if (term.is_list()) {
      for (std::size_t i = 1; i < term.items.size(); ++i) check_symbols(term.items[i]);
    }
  }

  void check_sat() {
    checked_ = true;
    if (unsupported_) {
      last_ = {Outcome::Unknown, {}, {}};
      out_ += "unknown\n";
      return;
    }
    std::set<int> all;
    for (std::size_t a = 0; a < assertion_names_.size(); ++a) all.insert(static_cast<int>(a));
    Solver solver(problem_, deadline_);
    last_ = {Outcome::Unknown, {}, {}};
    try {
      last_ = solver.solve(all);
      if (last_.outcome == Outcome::Unsat && produce_cores_) minimize(solver);
    } catch (const DeadlineExceeded&) {
      // An unsat verdict stands with the core found so far.
    }
    switch (last_.outcome) {
      case Outcome::Sat: out_ += "sat\n"; break;
      case Outcome::Unsat: out_ += "unsat\n"; break;
      case Outcome::Unknown: out_ += "unknown\n"; break;
    }
  }

  /// Deletion-based core minimization; stops early at the deadline with the
  /// (still valid) core found so far.
  void minimize(Solver& solver) {
    std::set<int> core;
    for (int a : last_.core) {
      if (a >= 0) core.insert(a);
    }
    last_.core = core;
    for (int a : std::vector<int>(core.begin(), core.end())) {
      if (last_.core.count(a) == 0) continue;
      auto trial = last_.core;
      trial.erase(a);
      auto result = solver.solve(trial);
      if (result.outcome == Outcome::Unsat) {
        std::set<int> smaller;
        for (int r : result.core) {
          if (r >= 0) smaller.insert(r);
        }
        last_.core = smaller;
      }
    }
  }

  Clock::time_point deadline_;
  Problem problem_;
  std::map<std::string, VarId> index_;
  std::vector<std::string> assertion_names_;
  bool unsupported_ = false;
  bool produce_cores_ = true;
  bool checked_ = false;
  Result last_;
  std::string out_;
};

}  // namespace

std::string builtin_solve(std::string_view script, std::chrono::milliseconds timeout) {
  return Session(timeout).run(script);
}

}  // namespace iac
