// Command-line front end: runs programs, queries distributions and
// expectations, verifies candidate loop fixed points, and executes the
// algebraic law suite.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "proburel/laws.hpp"
#include "proburel/parser.hpp"
#include "proburel/query.hpp"
#include "proburel/serialize.hpp"

using namespace proburel;

namespace {

struct Options {
  std::vector<std::string> params;
  std::optional<long long> tmax;
  std::string gap_tol = "1/1099511627776";  // 2^-40
  size_t max_iter = 256;
  bool max_iter_set = false;
  std::string format = "table";
  int precision = 6;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw ParseError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::map<std::string, Rational> parse_param_flags(const std::vector<std::string>& flags) {
  std::map<std::string, Rational> out;
  for (const auto& f : flags) {
    size_t eq = f.find('=');
    if (eq == std::string::npos) throw ParseError("--param expects name=a/b, got '" + f + "'");
    out[f.substr(0, eq)] = parse_rational(f.substr(eq + 1));
  }
  return out;
}

StateId parse_initial(const std::string& text, const StateSpace& sp) {
  std::vector<std::optional<long long>> vals(sp.var_count());
  size_t pos = 0;
  while (pos < text.size()) {
    size_t comma = text.find(',', pos);
    std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    pos = comma == std::string::npos ? text.size() : comma + 1;
    size_t eq = item.find('=');
    if (eq == std::string::npos) throw ParseError("--initial expects var=value pairs");
    std::string name = item.substr(0, eq);
    std::string value = item.substr(eq + 1);
    auto idx = sp.find_var(name);
    if (!idx) throw ParseError("unknown variable '" + name + "' in --initial");
    auto v = sp.domain(*idx).parse_value(value);
    if (!v) throw ParseError("value '" + value + "' not in the domain of '" + name + "'");
    vals[*idx] = *v;
  }
  std::vector<long long> full(sp.var_count());
  for (size_t v = 0; v < sp.var_count(); ++v) {
    if (!vals[v]) throw ParseError("--initial must bind every variable; missing '" + sp.var_name(v) + "'");
    full[v] = *vals[v];
  }
  return sp.encode(full);
}

// Query expressions are written over the final state with unprimed names.
detail::PredPtr promote_pred(const detail::PredPtr& p);

detail::ExprPtr promote_expr(const detail::ExprPtr& e) {
  using namespace detail;
  return std::visit(
      [&](const auto& n) -> ExprPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ExprConst> || std::is_same_v<T, ExprParam>) return e;
        else if constexpr (std::is_same_v<T, ExprVar>)
          return std::make_shared<ExprNode>(ExprNode{ExprVar{n.var, true}});
        else if constexpr (std::is_same_v<T, ExprBin>)
          return std::make_shared<ExprNode>(ExprNode{ExprBin{n.op, promote_expr(n.lhs), promote_expr(n.rhs)}});
        else if constexpr (std::is_same_v<T, ExprMinMax>)
          return std::make_shared<ExprNode>(
              ExprNode{ExprMinMax{n.is_min, promote_expr(n.lhs), promote_expr(n.rhs)}});
        else
          return std::make_shared<ExprNode>(ExprNode{ExprIverson{promote_pred(n.pred)}});
      },
      e->v);
}

detail::PredPtr promote_pred(const detail::PredPtr& p) {
  using namespace detail;
  return std::visit(
      [&](const auto& n) -> PredPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, PredConst>) return p;
        else if constexpr (std::is_same_v<T, PredCmp>)
          return std::make_shared<PredNode>(PredNode{PredCmp{n.op, promote_expr(n.lhs), promote_expr(n.rhs)}});
        else if constexpr (std::is_same_v<T, PredAnd>)
          return std::make_shared<PredNode>(PredNode{PredAnd{promote_pred(n.lhs), promote_pred(n.rhs)}});
        else if constexpr (std::is_same_v<T, PredOr>)
          return std::make_shared<PredNode>(PredNode{PredOr{promote_pred(n.lhs), promote_pred(n.rhs)}});
        else if constexpr (std::is_same_v<T, PredNot>)
          return std::make_shared<PredNode>(PredNode{PredNot{promote_pred(n.p)}});
        else
          return std::make_shared<PredNode>(PredNode{PredInSet{promote_expr(n.e), n.elems}});
      },
      p->v);
}

RelExpr promote_to_final(const RelExpr& e) { return RelExpr(promote_expr(e.node())); }

struct LoadedProgram {
  SourceProgram src;
  SpacePtr space;
  Program bound;
  bool has_window = false;
  std::vector<size_t> time_vars;
};

LoadedProgram load(const std::string& file, const Options& opt) {
  LoadedProgram lp;
  lp.src = parse_program(slurp(file));
  lp.space = lp.src.space(opt.tmax);
  auto env = resolve_params(lp.src, parse_param_flags(opt.params));
  lp.bound = bind_params(lp.src.ast, env);
  for (const auto& name : lp.src.nat_vars()) {
    lp.has_window = true;
    lp.time_vars.push_back(lp.space->var_index(name));
  }
  return lp;
}

ElabConfig elab_config(const Options& opt, const LoadedProgram& lp) {
  ElabConfig cfg;
  cfg.gap_tol = parse_rational(opt.gap_tol);
  cfg.max_iter = opt.max_iter;
  if (lp.has_window && opt.tmax) {
    if (opt.max_iter_set && static_cast<long long>(opt.max_iter) >= *opt.tmax)
      throw ParseError("--max-iter must stay below --tmax so the window is never crossed");
    if (!opt.max_iter_set)
      cfg.max_iter = std::min<size_t>(cfg.max_iter, static_cast<size_t>(*opt.tmax - 1));
  }
  return cfg;
}

bool expr_uses_time(const RelExpr& e, const std::vector<size_t>& time_vars) {
  bool found = false;
  std::function<void(const detail::ExprPtr&)> walk_e;
  std::function<void(const detail::PredPtr&)> walk_p;
  walk_e = [&](const detail::ExprPtr& n) {
    using namespace detail;
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, ExprVar>) {
            for (size_t v : time_vars)
              if (x.var == v) found = true;
          } else if constexpr (std::is_same_v<T, ExprBin> || std::is_same_v<T, ExprMinMax>) {
            walk_e(x.lhs);
            walk_e(x.rhs);
          } else if constexpr (std::is_same_v<T, ExprIverson>) {
            walk_p(x.pred);
          }
        },
        n->v);
  };
  walk_p = [&](const detail::PredPtr& n) {
    using namespace detail;
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, PredCmp>) {
            walk_e(x.lhs);
            walk_e(x.rhs);
          } else if constexpr (std::is_same_v<T, PredAnd> || std::is_same_v<T, PredOr>) {
            walk_p(x.lhs);
            walk_p(x.rhs);
          } else if constexpr (std::is_same_v<T, PredNot>) {
            walk_p(x.p);
          } else if constexpr (std::is_same_v<T, PredInSet>) {
            walk_e(x.e);
          }
        },
        n->v);
  };
  walk_e(e.node());
  return found;
}

void print_value_line(const std::string& label, const Rational& v, const Options& opt) {
  std::cout << label << format_rational(v) << "  (" << format_decimal(v, opt.precision) << ")\n";
}

// Single-initial-state query over a top-level loop, by forward mass
// propagation; exact over the window with an explicit residual.
struct ForwardQuery {
  std::map<StateId, Rational> dist;
  Rational unabsorbed;
  std::optional<Rational> ratio;
};

ForwardQuery forward_query(const LoadedProgram& lp, const Options& opt, StateId s0,
                           const Pred& guard, const Program& body_ast) {
  ElabConfig cfg = elab_config(opt, lp);
  Kernel body = elaborate(body_ast, lp.space, cfg);
  LoopSpec spec(lp.space, guard, body);
  size_t steps = lp.has_window && opt.tmax ? static_cast<size_t>(*opt.tmax) + 1 : cfg.max_iter;
  ForwardResult f = forward_run(spec, s0, steps);
  return {std::move(f.absorbed), std::move(f.unabsorbed), std::move(f.ratio)};
}

int cmd_query(const std::string& file, const Options& opt, const std::string& initial,
              const std::string& expr_text, bool as_probability) {
  LoadedProgram lp = load(file, opt);
  auto env = resolve_params(lp.src, parse_param_flags(opt.params));
  RelExpr e;
  if (as_probability) {
    auto tokens = detail::lex(expr_text);
    detail::Parser parser(std::move(tokens), &lp.src.decls, &lp.src.params);
    Pred event = parser.parse_pred();
    if (!parser.at_end()) parser.fail("unexpected trailing input in --event");
    e = promote_to_final(bind_params(rexpr::iverson(event), env));
  } else {
    e = promote_to_final(bind_params(parse_expression(expr_text, lp.src), env));
  }
  Rational max_e = max_abs_over_states(lp.space, e);
  bool uses_time = expr_uses_time(e, lp.time_vars);

  auto loop = top_level_loop(lp.bound);
  if (!initial.empty() && loop) {
    StateId s0 = parse_initial(initial, *lp.space);
    ForwardQuery q = forward_query(lp, opt, s0, loop->first, loop->second);
    Rational value = 0;
    std::vector<long long> fin;
    for (const auto& [t, w] : q.dist) {
      lp.space->decode(t, fin);
      value += w * eval_pair(e, *lp.space, fin, fin);
    }
    print_value_line("value: ", value, opt);
    if (q.unabsorbed > 0)
      print_value_line("residual: ", truncation_residual(q.unabsorbed, max_e, q.ratio, uses_time), opt);
    return 0;
  }

  Kernel k = elaborate(lp.bound, lp.space, elab_config(opt, lp));
  InitialValuedResult res = expect(k, e);
  if (!initial.empty()) {
    print_value_line("value: ", res.at(parse_initial(initial, *lp.space)), opt);
    return 0;
  }
  if (opt.format == "json") {
    Json out = Json::array();
    for (StateId s = 0; s < lp.space->state_count(); ++s) {
      Json row;
      row["initial"] = state_to_json(*lp.space, s);
      row["value"] = res.values[s] ? format_rational(*res.values[s]) : "unavailable";
      out.push_back(row);
    }
    std::cout << out.dump(2) << "\n";
  } else {
    for (StateId s = 0; s < lp.space->state_count(); ++s) {
      std::cout << lp.space->state_name(s) << ": ";
      if (res.values[s])
        std::cout << format_rational(*res.values[s]) << "  ("
                  << format_decimal(*res.values[s], opt.precision) << ")\n";
      else
        std::cout << "unavailable (window edge)\n";
    }
  }
  return 0;
}

int cmd_run(const std::string& file, const Options& opt, const std::string& initial) {
  LoadedProgram lp = load(file, opt);
  auto loop = top_level_loop(lp.bound);
  if (!initial.empty() && loop) {
    StateId s0 = parse_initial(initial, *lp.space);
    ForwardQuery q = forward_query(lp, opt, s0, loop->first, loop->second);
    if (opt.format == "json") {
      Json rows = Json::array();
      for (const auto& [t, w] : q.dist) {
        Json r;
        r["state"] = state_to_json(*lp.space, t);
        r["weight"] = format_rational(w);
        rows.push_back(r);
      }
      Json out;
      out["initial"] = state_to_json(*lp.space, s0);
      out["finals"] = rows;
      out["unabsorbed"] = format_rational(q.unabsorbed);
      std::cout << out.dump(2) << "\n";
    } else {
      for (const auto& [t, w] : q.dist)
        std::cout << lp.space->state_name(t) << ": " << format_rational(w) << "  ("
                  << format_decimal(w, opt.precision) << ")\n";
      if (q.unabsorbed > 0)
        std::cout << "unabsorbed mass: " << format_rational(q.unabsorbed) << "\n";
    }
    return 0;
  }

  Kernel k = elaborate(lp.bound, lp.space, elab_config(opt, lp));
  if (opt.format == "json") {
    std::cout << kernel_to_json(k).dump(2) << "\n";
    return 0;
  }
  if (opt.format == "csv") {
    std::cout << kernel_to_csv(k);
    return 0;
  }
  if (!initial.empty()) {
    StateId s0 = parse_initial(initial, *lp.space);
    for (const auto& entry : distribution_table(k, State(lp.space, s0)))
      std::cout << lp.space->state_name(entry.final_state) << ": " << format_rational(entry.weight)
                << "  (" << format_decimal(entry.weight, opt.precision) << ")\n";
    return 0;
  }
  for (StateId s = 0; s < lp.space->state_count(); ++s) {
    std::cout << "initial " << lp.space->state_name(s) << ":\n";
    for (const auto& entry : distribution_table(k, State(lp.space, s)))
      std::cout << "  " << lp.space->state_name(entry.final_state) << ": "
                << format_rational(entry.weight) << "  ("
                << format_decimal(entry.weight, opt.precision) << ")\n";
  }
  return 0;
}

int cmd_fixpoint_verify(const std::string& file, const Options& opt, const std::string& candidate_file,
                        size_t iters, bool ratio_check) {
  LoadedProgram lp = load(file, opt);
  auto loop = top_level_loop(lp.bound);
  if (!loop) throw ParseError("fixpoint-verify expects a program whose body is a while loop");
  auto env = resolve_params(lp.src, parse_param_flags(opt.params));
  RelExpr cand_expr = bind_params(parse_expression(slurp(candidate_file), lp.src), env);
  Kernel candidate = clamp_kernel(tabulate(lp.space, cand_expr));
  Kernel body = elaborate(loop->second, lp.space, elab_config(opt, lp));
  LoopSpec spec(lp.space, loop->first, body);
  Certificate cert = verify_unique_fp(spec, candidate, iters, ratio_check);

  if (opt.format == "json") {
    std::cout << certificate_to_json(cert, *lp.space).dump(2) << "\n";
  } else {
    std::cout << "verdict: " << to_string(cert.verdict) << "\n";
    for (const auto& c : cert.checks)
      std::cout << "  [" << (c.passed ? "ok" : "FAIL") << "] " << c.name << ": " << c.detail << "\n";
    if (cert.report.geometric_ratio)
      std::cout << "  ratio: " << format_rational(*cert.report.geometric_ratio) << "\n";
    if (!cert.boundary_rows.empty())
      std::cout << "  boundary rows: " << cert.boundary_rows.size() << "\n";
    std::cout << "  " << cert.reason << "\n";
    if (cert.verdict == Verdict::UniqueFixedPoint) {
      auto term = termination_probability(spec, candidate);
      Rational lo = term[0], hi = term[0];
      for (const Rational& p : term) {
        if (p < lo) lo = p;
        if (p > hi) hi = p;
      }
      std::cout << "termination probability: min " << format_rational(lo) << ", max "
                << format_rational(hi) << "\n";
    }
  }
  return cert.verdict == Verdict::UniqueFixedPoint ? 0 : 1;
}

int cmd_laws(size_t cases, uint64_t seed, const std::string& only) {
  if (!only.empty()) {
    auto ids = law_ids();
    if (std::find(ids.begin(), ids.end(), only) == ids.end()) throw UnknownLaw(only);
  }
  bool all_ok = true;
  for (const auto& id : law_ids()) {
    if (!only.empty() && id != only) continue;
    LawResult res = check_law(id, cases, seed);
    all_ok = all_ok && res.passed;
    std::cout << (res.passed ? "PASS" : "FAIL") << "  " << res.id << "  (" << res.cases
              << " cases)  " << res.statement;
    if (!res.passed) std::cout << "  -- " << res.counterexample;
    std::cout << "\n";
  }
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact inference for a discrete probabilistic language"};
  app.require_subcommand(1);

  Options opt;
  if (const char* env = std::getenv("PROBUREL_PRECISION")) opt.precision = std::atoi(env);

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--param", opt.params, "parameter binding name=a/b")->take_all();
    cmd->add_option("--tmax", opt.tmax, "bound for nat time windows");
    cmd->add_option("--gap-tol", opt.gap_tol, "convergence tolerance a/b");
    cmd->add_option("--max-iter", opt.max_iter, "iteration budget for loops")
        ->each([&](const std::string&) { opt.max_iter_set = true; });
    cmd->add_option("--format", opt.format, "table|json|csv")
        ->check(CLI::IsMember({"table", "json", "csv"}));
    cmd->add_option("--precision", opt.precision, "decimal places in reports");
  };

  std::string file, initial, event, expr_text, candidate;
  size_t iters = 12;
  bool ratio_check = true;
  size_t cases = 100;
  uint64_t seed = 1;
  std::string only_law;

  CLI::App* run = app.add_subcommand("run", "print the final-state distribution");
  run->add_option("file", file)->required();
  run->add_option("--initial", initial, "initial state, e.g. c=tl,t=0");
  add_common(run);

  CLI::App* prob = app.add_subcommand("prob", "probability of an event after the program");
  prob->add_option("file", file)->required();
  prob->add_option("--event", event, "final-state predicate, e.g. \"a=S\"")->required();
  prob->add_option("--initial", initial);
  add_common(prob);

  CLI::App* expect_cmd = app.add_subcommand("expect", "expected value after the program");
  expect_cmd->add_option("file", file)->required();
  expect_cmd->add_option("--expr", expr_text, "final-state expression, e.g. \"t\"")->required();
  expect_cmd->add_option("--initial", initial);
  add_common(expect_cmd);

  CLI::App* verify = app.add_subcommand("fixpoint-verify", "certify a candidate loop fixed point");
  verify->add_option("file", file)->required();
  verify->add_option("--candidate", candidate, "expression file with the candidate")->required();
  verify->add_option("--iters", iters, "iterdiff steps to test");
  verify->add_flag("--ratio-check,!--no-ratio-check", ratio_check, "geometric decay certification");
  add_common(verify);

  CLI::App* laws_cmd = app.add_subcommand("laws", "run the algebraic law catalog");
  laws_cmd->add_option("--cases", cases, "cases per law");
  laws_cmd->add_option("--seed", seed, "suite seed");
  laws_cmd->add_option("--law", only_law, "run a single law id");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return cmd_run(file, opt, initial);
    if (prob->parsed()) return cmd_query(file, opt, initial, event, true);
    if (expect_cmd->parsed()) return cmd_query(file, opt, initial, expr_text, false);
    if (verify->parsed()) return cmd_fixpoint_verify(file, opt, candidate, iters, ratio_check);
    if (laws_cmd->parsed()) return cmd_laws(cases, seed, only_law);
  } catch (const NoConvergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
