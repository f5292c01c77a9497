#include "iac/smt_backend.hpp"

#include <cstdlib>

#include "iac/builtin_solver.hpp"
#include "iac/errors.hpp"
#include "iac/process.hpp"

namespace iac {

std::string_view to_string(SatStatus s) {
  switch (s) {
    case SatStatus::Sat: return "sat";
    case SatStatus::Unsat: return "unsat";
    case SatStatus::Unknown: return "unknown";
  }
  return "?";
}

std::string_view to_string(BoundValue::Kind k) {
  switch (k) {
    case BoundValue::Kind::Finite: return "finite";
    case BoundValue::Kind::Unbounded: return "unbounded";
    case BoundValue::Kind::Infeasible: return "infeasible";
    case BoundValue::Kind::Unknown: return "unknown";
  }
  return "?";
}

std::optional<Rational> parse_value(const SExpr& e) {
  if (e.kind == SExpr::Kind::Numeral || e.kind == SExpr::Kind::Decimal) return parse_rational(e.text);
  if (e.kind == SExpr::Kind::Symbol && !e.quoted) {
    // Some solvers print negative literals bare.
    if (e.text.size() > 1 && e.text.front() == '-') return parse_rational(e.text);
    return std::nullopt;
  }
  if (!e.is_list()) return std::nullopt;
  auto op = e.head();
  if (op == "-" && e.items.size() == 2) {
    auto v = parse_value(e.items[1]);
    if (!v) return std::nullopt;
    return Rational(-*v);
  }
  if (op == "/" && e.items.size() == 3) {
    auto p = parse_value(e.items[1]);
    auto q = parse_value(e.items[2]);
    if (!p || !q || *q == 0) return std::nullopt;
    return Rational(*p / *q);
  }
  return std::nullopt;
}

namespace {

/// a*oo + b + c*epsilon, the shape of optimizer objective values.
struct Extended {
  Rational infinite = 0;
  Rational finite = 0;
  Rational epsilon = 0;

  bool is_constant() const { return infinite == 0 && epsilon == 0; }
};

std::optional<Extended> parse_extended(const SExpr& e) {
  if (e.kind == SExpr::Kind::Symbol && !e.quoted) {
    if (e.text == "oo" || e.text == "+oo" || e.text == "infinity") return Extended{1, 0, 0};
    if (e.text == "-oo") return Extended{-1, 0, 0};
    if (e.text == "epsilon") return Extended{0, 0, 1};
  }
  if (auto v = parse_value(e)) return Extended{0, *v, 0};
  if (!e.is_list() || e.items.size() < 2) return std::nullopt;
  auto op = e.head();
  std::vector<Extended> args;
  for (std::size_t i = 1; i < e.items.size(); ++i) {
    auto a = parse_extended(e.items[i]);
    if (!a) return std::nullopt;
    args.push_back(*a);
  }
  auto scale = [](Extended x, const Rational& s) {
    return Extended{x.infinite * s, x.finite * s, x.epsilon * s};
  };
  auto add = [](Extended x, const Extended& y) {
    return Extended{x.infinite + y.infinite, x.finite + y.finite, x.epsilon + y.epsilon};
  };
  if (op == "+") {
    Extended sum;
    for (const auto& a : args) sum = add(sum, a);
    return sum;
  }
  if (op == "-") {
    if (args.size() == 1) return scale(args[0], -1);
    Extended diff = args[0];
    for (std::size_t i = 1; i < args.size(); ++i) diff = add(diff, scale(args[i], -1));
    return diff;
  }
  if (op == "*") {
    Extended product{0, 1, 0};
    bool varying = false;
    for (const auto& a : args) {
      if (a.is_constant()) {
        product = scale(product, a.finite);
      } else if (varying) {
        return std::nullopt;
      } else {
        varying = true;
        product = scale(a, product.finite);
      }
    }
    return product;
  }
  if (op == "/" && args.size() == 2 && args[1].is_constant() && args[1].finite != 0) {
    return scale(args[0], Rational(1) / args[1].finite);
  }
  if (op == "interval" && args.size() == 2) {
    // Only used by optimizers when nothing was bounded.
    return args[1];
  }
  return std::nullopt;
}

struct Response {
  SolverVerdict verdict;
  bool has_status = false;
  std::optional<Extended> objective;
  std::vector<std::string> errors;
};

Response interpret(std::string_view text) {
  Response r;
  for (const auto& e : parse_sexprs(text)) {
    if (e.kind == SExpr::Kind::Symbol && !r.has_status) {
      if (e.text == "sat" || e.text == "unsat" || e.text == "unknown") {
        r.has_status = true;
        r.verdict.status = e.text == "sat"     ? SatStatus::Sat
                           : e.text == "unsat" ? SatStatus::Unsat
                                               : SatStatus::Unknown;
      }
      // Stray symbols ("timeout", "success") carry no verdict.
      if (e.text == "timeout") r.verdict.reason = "solver timeout";
      continue;
    }
    if (!e.is_list()) continue;
    auto head = e.head();
    if (head == "error") {
      r.errors.push_back(e.items.size() > 1 ? e.items[1].text : "");
      continue;
    }
    if (head == "objectives") {
      if (e.items.size() >= 2 && e.items[1].is_list() && e.items[1].items.size() == 2) {
        r.objective = parse_extended(e.items[1].items[1]);
      }
      continue;
    }
    std::size_t first = head == "model" ? 1 : 0;
    bool definitions = head == "model" || (!e.items.empty() && e.items.front().head() == "define-fun");
    bool symbols = !e.items.empty();
    for (const auto& item : e.items) symbols = symbols && item.kind == SExpr::Kind::Symbol;

    if (e.items.empty()) {
      if (r.verdict.status == SatStatus::Sat) r.verdict.model.emplace();
      if (r.verdict.status == SatStatus::Unsat) r.verdict.core.emplace();
    } else if (definitions) {
      std::map<std::string, Rational> model;
      for (std::size_t i = first; i < e.items.size(); ++i) {
        const auto& def = e.items[i];
        if (def.head() != "define-fun" || def.items.size() != 5) continue;
        if (auto v = parse_value(def.items[4])) model[def.items[1].text] = *v;
      }
      r.verdict.model = std::move(model);
    } else if (symbols) {
      std::vector<std::string> core;
      for (const auto& item : e.items) core.push_back(item.text);
      r.verdict.core = std::move(core);
    }
  }
  if (r.verdict.status == SatStatus::Unknown && r.verdict.reason.empty() && !r.errors.empty()) {
    r.verdict.reason = r.errors.front();
  }
  return r;
}

struct RawRun {
  std::string out;
  std::string err;
  int exit_code = 0;
  bool timed_out = false;
};

std::string first_line(const std::string& s) {
  auto start = s.find_first_not_of(" \t\r\n");
  if (start == std::string::npos) return "";
  return s.substr(start, s.find('\n', start) - start);
}

std::string render_number(const Rational& v, bool is_int) {
  return is_int ? smtlib_int(v) : smtlib_real(v);
}

}  // namespace

SolverVerdict parse_response(std::string_view text) { return interpret(text).verdict; }

SmtBackend SmtBackend::builtin(SolverOptions options) {
  SmtBackend b;
  b.options_ = std::move(options);
  return b;
}

SmtBackend SmtBackend::external(const std::string& path, SolverMode mode, SolverOptions options) {
  auto exe = find_on_path(path);
  if (!exe) throw SolverNotFoundError("solver '" + path + "' not found or not executable");
  SmtBackend b;
  b.builtin_ = false;
  b.options_ = std::move(options);

  std::string banner;
  try {
    auto probe = run_process({*exe, "--version"}, "", std::chrono::seconds(5));
    banner = probe.out + probe.err;
  } catch (const SolverNotFoundError&) {
    throw SolverNotFoundError("solver '" + *exe + "' cannot be started");
  }
  bool is_z3 = banner.find("Z3 version") != std::string::npos;
  bool is_cvc5 = banner.find("cvc5") != std::string::npos;
  if (is_z3) {
    b.name_ = "z3";
    b.argv_ = {*exe, "-in", "-smt2"};
  } else if (is_cvc5) {
    b.name_ = "cvc5";
    b.argv_ = {*exe, "--lang=smt2"};
  } else {
    b.name_ = *exe;
    b.argv_ = {*exe};
  }
  b.name_ += " " + *exe;
  b.optimizing_ = mode == SolverMode::Optimizing || (mode == SolverMode::Auto && is_z3);
  return b;
}

SmtBackend SmtBackend::discover(const std::optional<std::string>& path, SolverMode mode,
                                SolverOptions options) {
  auto chosen = path;
  if (!chosen) {
    if (const char* env = std::getenv(kSolverEnv); env != nullptr && *env != '\0') chosen = env;
  }
  if (chosen) {
    if (*chosen == kBuiltinSolver) {
      if (mode == SolverMode::Optimizing) {
        throw SolverNotFoundError("the builtin solver has no optimizing mode");
      }
      return builtin(std::move(options));
    }
    return external(*chosen, mode, std::move(options));
  }
  for (const char* candidate : {"z3", "cvc5"}) {
    if (auto exe = find_on_path(candidate)) return external(*exe, mode, options);
  }
  if (mode == SolverMode::Optimizing) {
    throw SolverNotFoundError("no optimizing solver found (set --solver or " + std::string(kSolverEnv) + ")");
  }
  return builtin(std::move(options));
}

std::string SmtBackend::describe() const {
  if (builtin_) return "builtin (generic)";
  return name_ + (optimizing_ ? " (optimizing)" : " (generic)");
}

std::string SmtBackend::run(const std::string& script_text) const {
  if (builtin_) return builtin_solve(script_text, options_.timeout);
  return run_process(argv_, script_text, options_.timeout).out;
}

SolverVerdict SmtBackend::query(const SolverScript& script) const {
  auto text = script.text();
  RawRun raw;
  if (builtin_) {
    raw.out = builtin_solve(text, options_.timeout);
  } else {
    auto result = run_process(argv_, text, options_.timeout);
    raw = {std::move(result.out), std::move(result.err), result.exit_code, result.timed_out};
  }
  if (raw.timed_out) {
    SolverVerdict v;
    v.reason = "timeout after " + std::to_string(options_.timeout.count()) + " ms";
    return v;
  }
  Response r;
  try {
    r = interpret(raw.out);
  } catch (const SmtSyntaxError& e) {
    throw SolverCrashedError(describe() + " produced unreadable output: " + e.what());
  }
  // Solvers exit nonzero after reporting an error for the query that does
  // not apply (a model after unsat); the verdict line still stands.
  if (!r.has_status) {
    auto detail = !r.errors.empty() ? r.errors.front() : first_line(raw.err.empty() ? raw.out : raw.err);
    throw SolverCrashedError(describe() + " gave no verdict (exit " + std::to_string(raw.exit_code) +
                             (detail.empty() ? ")" : "): " + detail));
  }
  return r.verdict;
}

SolverVerdict SmtBackend::check(const SolverScript& script, const std::vector<NamedAssertion>& extra) const {
  SolverScript s = script;
  s.objective.reset();
  s.assertions.insert(s.assertions.end(), extra.begin(), extra.end());
  auto verdict = query(s);
  // A solver may stop at the first inapplicable command; ask again for the
  // missing part alone.
  if (verdict.status == SatStatus::Unsat && s.request_core && !verdict.core) {
    s.request_model = false;
    verdict.core = query(s).core;
  } else if (verdict.status == SatStatus::Sat && s.request_model && !verdict.model) {
    s.request_core = false;
    verdict.model = query(s).model;
  }
  return verdict;
}

BoundValue SmtBackend::bound(const SolverScript& script, const std::string& symbol, Direction direction) const {
  const auto* decl = script.find_declaration(symbol);
  if (decl == nullptr) throw UnknownTargetKeyError("symbol " + symbol + " is not declared");
  bool is_int = decl->sort == "Int";
  if (!optimizing_) return bound_by_search(script, symbol, direction, is_int);

  SolverScript s = script;
  s.objective = Objective{direction, symbol};
  s.request_model = false;
  s.request_core = false;
  auto text = s.text();
  auto result = run_process(argv_, text, options_.timeout);
  BoundValue b;
  if (result.timed_out) {
    b.note = "timeout after " + std::to_string(options_.timeout.count()) + " ms";
    return b;
  }
  Response r;
  try {
    r = interpret(result.out);
  } catch (const SmtSyntaxError& e) {
    throw SolverCrashedError(describe() + " produced unreadable output: " + e.what());
  }
  if (!r.has_status) {
    throw SolverCrashedError(describe() + " gave no verdict: " +
                             (r.errors.empty() ? first_line(result.err) : r.errors.front()));
  }
  if (r.verdict.status == SatStatus::Unsat) {
    b.kind = BoundValue::Kind::Infeasible;
    return b;
  }
  if (r.verdict.status == SatStatus::Unknown) {
    b.note = r.verdict.reason;
    return b;
  }
  if (!r.objective) return bound_by_search(script, symbol, direction, is_int);

  const auto& obj = *r.objective;
  Rational sign = direction == Direction::Maximize ? 1 : -1;
  if (obj.infinite * sign > 0) {
    b.kind = BoundValue::Kind::Unbounded;
    return b;
  }
  b.kind = BoundValue::Kind::Finite;
  b.value = obj.finite;
  if (obj.epsilon != 0) {
    b.attained = false;
    b.note = direction == Direction::Maximize ? "supremum, not attained" : "infimum, not attained";
  }
  return b;
}

BoundValue SmtBackend::bound_by_search(const SolverScript& script, const std::string& symbol,
                                       Direction direction, bool is_int) const {
  bool maximize = direction == Direction::Maximize;
  std::string plain = symbol.size() >= 2 && symbol.front() == '|' ? symbol.substr(1, symbol.size() - 2) : symbol;
  SolverScript base = script;
  base.objective.reset();
  base.request_core = false;

  BoundValue out;
  auto probe = [&](const std::string& op, const Rational& t) {
    return check(base, {{"probe", "(" + op + " " + symbol + " " + render_number(t, is_int) + ")"}});
  };
  auto at_least = [&](const Rational& t) { return probe(maximize ? ">=" : "<=", t); };
  auto better_than = [&](const Rational& t) { return probe(maximize ? ">" : "<", t); };
  auto value_in = [&](const SolverVerdict& v) -> std::optional<Rational> {
    if (!v.model) return std::nullopt;
    auto it = v.model->find(plain);
    if (it == v.model->end()) return std::nullopt;
    return it->second;
  };
  auto unknown = [&](const SolverVerdict& v) {
    out.kind = BoundValue::Kind::Unknown;
    out.note = v.reason.empty() ? "solver returned unknown" : v.reason;
    return out;
  };
  auto distance = [](const Rational& a, const Rational& b) { return Rational(a > b ? a - b : b - a); };

  auto start = check(base);
  if (start.status == SatStatus::Unsat) {
    out.kind = BoundValue::Kind::Infeasible;
    return out;
  }
  if (start.status == SatStatus::Unknown) return unknown(start);
  auto current = value_in(start);
  if (!current) {
    out.note = "model does not assign " + symbol;
    return out;
  }
  Rational best = *current;

  auto exact = better_than(best);
  if (exact.status == SatStatus::Unknown) return unknown(exact);
  if (exact.status == SatStatus::Unsat) {
    out.kind = BoundValue::Kind::Finite;
    out.value = best;
    return out;
  }

  // Grow geometrically until a target is infeasible.
  Rational step = std::max(Rational(1), Rational(best < 0 ? -best : best));
  Rational limit;
  while (true) {
    Rational target = maximize ? Rational(best + step) : Rational(best - step);
    if (distance(target, 0) > options_.probe_cap) {
      out.kind = BoundValue::Kind::Unbounded;
      out.capped = true;
      out.note = "no bound found below the probe cap";
      return out;
    }
    auto v = at_least(target);
    if (v.status == SatStatus::Unknown) return unknown(v);
    if (v.status == SatStatus::Unsat) {
      limit = target;
      break;
    }
    auto value = value_in(v);
    best = value ? *value : target;
    step *= 2;
  }

  // best is feasible, limit is not; narrow the gap.
  Rational gap = is_int ? Rational(1) : options_.real_tolerance;
  while (distance(limit, best) > gap) {
    Rational mid = Rational((best + limit) / 2);
    if (is_int) mid = maximize ? Rational(floor_of(mid)) : Rational(ceil_of(mid));
    if (mid == best) break;
    auto v = at_least(mid);
    if (v.status == SatStatus::Unknown) return unknown(v);
    if (v.status == SatStatus::Unsat) {
      limit = mid;
    } else {
      auto value = value_in(v);
      best = value ? *value : mid;
    }
  }

  out.kind = BoundValue::Kind::Finite;
  if (is_int) {
    out.value = best;
    return out;
  }
  auto last = better_than(best);
  if (last.status == SatStatus::Unsat) {
    out.value = best;
  } else {
    out.value = limit;
    out.attained = false;
    out.note = "not attained; located within " + to_string(options_.real_tolerance);
  }
  return out;
}

}  // namespace iac
