#ifndef PROBUREL_PROGRAM_HPP
#define PROBUREL_PROGRAM_HPP

#include "proburel/fixpoint.hpp"

namespace proburel {

struct NoConvergence : std::runtime_error {
  explicit NoConvergence(ConvergenceReport r)
      : std::runtime_error("loop iteration did not converge within " +
                           std::to_string(r.iterations_used) + " steps (gap " +
                           format_rational(r.sup_gap) + ")"),
        report(std::move(r)) {}
  ConvergenceReport report;
};

class Program;

namespace detail {

struct StmtSkip {};
struct StmtAssign {
  size_t var;
  RelExpr expr;
};
struct StmtUniform {
  size_t var;
  std::vector<long long> values;
};
struct StmtPChoice {
  RelExpr weight;
  std::shared_ptr<const struct StmtNode> left, right;
};
struct StmtCChoice {
  Pred guard;
  std::shared_ptr<const struct StmtNode> then_branch, else_branch;
};
struct StmtSeq {
  std::shared_ptr<const struct StmtNode> first, second;
};
struct StmtObserve {
  std::shared_ptr<const struct StmtNode> body;
  RelExpr likelihood;
};
struct StmtWhile {
  Pred guard;
  std::shared_ptr<const struct StmtNode> body;
};

struct StmtNode {
  std::variant<StmtSkip, StmtAssign, StmtUniform, StmtPChoice, StmtCChoice, StmtSeq, StmtObserve,
               StmtWhile>
      v;
};

using StmtPtr = std::shared_ptr<const StmtNode>;

}  // namespace detail

/// Program syntax tree; well-typed against one state space by construction
/// (the parser and the prog:: factories resolve variables).
class Program {
 public:
  Program() = default;
  explicit Program(detail::StmtPtr node) : node_(std::move(node)) {}
  const detail::StmtPtr& node() const { return node_; }
  bool valid() const { return node_ != nullptr; }

 private:
  detail::StmtPtr node_;
};

namespace prog {

inline Program skip() {
  return Program(std::make_shared<detail::StmtNode>(detail::StmtNode{detail::StmtSkip{}}));
}
inline Program assign(const StateSpace& sp, std::string_view var, RelExpr e) {
  return Program(std::make_shared<detail::StmtNode>(
      detail::StmtNode{detail::StmtAssign{sp.var_index(var), std::move(e)}}));
}
inline Program uniform(const StateSpace& sp, std::string_view var, std::vector<long long> values) {
  return Program(std::make_shared<detail::StmtNode>(
      detail::StmtNode{detail::StmtUniform{sp.var_index(var), std::move(values)}}));
}
inline Program pchoice(RelExpr w, Program l, Program r) {
  return Program(std::make_shared<detail::StmtNode>(
      detail::StmtNode{detail::StmtPChoice{std::move(w), l.node(), r.node()}}));
}
inline Program cchoice(Pred b, Program t, Program e) {
  return Program(std::make_shared<detail::StmtNode>(
      detail::StmtNode{detail::StmtCChoice{std::move(b), t.node(), e.node()}}));
}
inline Program seq(Program a, Program b) {
  return Program(
      std::make_shared<detail::StmtNode>(detail::StmtNode{detail::StmtSeq{a.node(), b.node()}}));
}
inline Program observe(Program body, RelExpr likelihood) {
  return Program(std::make_shared<detail::StmtNode>(
      detail::StmtNode{detail::StmtObserve{body.node(), std::move(likelihood)}}));
}
inline Program while_(Pred guard, Program body) {
  return Program(std::make_shared<detail::StmtNode>(
      detail::StmtNode{detail::StmtWhile{std::move(guard), body.node()}}));
}

}  // namespace prog

struct ElabConfig {
  size_t max_iter = 256;
  Rational gap_tol = pow_nat(Rational(1, 2), 40);
  bool require_convergence = true;
};

/// Folds the syntax tree through the construct semantics; loops go through
/// Kleene iteration from bottom (inner loops first).
inline Kernel elaborate(const Program& p, const SpacePtr& space, const ElabConfig& cfg = {});

namespace detail {

inline Kernel elaborate_node(const StmtPtr& n, const SpacePtr& space, const ElabConfig& cfg) {
  return std::visit(
      [&](const auto& s) -> Kernel {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, StmtSkip>) {
          return sem_skip(space);
        } else if constexpr (std::is_same_v<T, StmtAssign>) {
          return sem_assign(space, space->var_name(s.var), s.expr);
        } else if constexpr (std::is_same_v<T, StmtUniform>) {
          return sem_uniform(space, space->var_name(s.var), s.values);
        } else if constexpr (std::is_same_v<T, StmtPChoice>) {
          return sem_pchoice(s.weight, elaborate_node(s.left, space, cfg),
                             elaborate_node(s.right, space, cfg));
        } else if constexpr (std::is_same_v<T, StmtCChoice>) {
          return sem_cchoice(s.guard, elaborate_node(s.then_branch, space, cfg),
                             elaborate_node(s.else_branch, space, cfg));
        } else if constexpr (std::is_same_v<T, StmtSeq>) {
          return sem_seq(elaborate_node(s.first, space, cfg), elaborate_node(s.second, space, cfg));
        } else if constexpr (std::is_same_v<T, StmtObserve>) {
          return sem_parallel(elaborate_node(s.body, space, cfg).as_rvfun(),
                              tabulate(space, s.likelihood));
        } else {
          LoopSpec spec(space, s.guard, elaborate_node(s.body, space, cfg));
          auto [fp, rep] = kleene_lfp(spec, cfg.max_iter, cfg.gap_tol);
          if (cfg.require_convergence && !rep.converged) throw NoConvergence(rep);
          return fp;
        }
      },
      n->v);
}

}  // namespace detail

inline Kernel elaborate(const Program& p, const SpacePtr& space, const ElabConfig& cfg) {
  if (!p.valid()) throw TypeError("empty program");
  return detail::elaborate_node(p.node(), space, cfg);
}

/// The unique top-level loop of a program, unwrapped through sequencing,
/// for fixed-point verification. Empty when there is no loop.
inline std::optional<std::pair<Pred, Program>> top_level_loop(const Program& p) {
  using namespace detail;
  if (!p.valid()) return std::nullopt;
  if (const auto* w = std::get_if<StmtWhile>(&p.node()->v))
    return std::make_pair(w->guard, Program(w->body));
  return std::nullopt;
}

}  // namespace proburel

#endif
