#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "proburel/laws.hpp"

using namespace proburel;
using namespace proburel::test;

TEST_CASE("generators meet their stated contracts") {
  laws::Gen g(12345);
  for (int i = 0; i < 50; ++i) {
    auto sp = g.space();
    Classification d = classify(g.dist_kernel(sp));
    CHECK(d.is_final_dist);
    for (const Rational& s : d.row_sums) CHECK(s == 1);

    Classification sd = classify(g.subdist_kernel(sp));
    CHECK(sd.is_final_subdist);

    Rational w = g.rng.unit_weight();
    CHECK(w >= 0);
    CHECK(w <= 1);
  }
}

TEST_CASE("generators are deterministic per seed") {
  auto run = [](uint64_t seed) {
    laws::Gen g(seed);
    auto sp = g.space();
    Kernel k = g.dist_kernel(sp);
    std::string out;
    for (StateId s = 0; s < k.states(); ++s)
      for (const auto& [t, v] : k.row(s).w) out += std::to_string(t) + ":" + format_rational(v) + ";";
    return out;
  };
  CHECK(run(7) == run(7));
  CHECK(run(7) != run(8));
}

TEST_CASE("predicate generator covers many semantic classes") {
  // over a fixed 8-pair space, predicates are functions into 2^8 classes
  auto sp = make_space({{"x", Domain::boolean()}, {"y", Domain::boolean()}});
  std::set<std::string> classes;
  laws::Gen g(99);
  for (int i = 0; i < 300; ++i) {
    Pred p = g.predicate(sp, true);
    std::string sig;
    laws::each_pair(sp, [&](auto& ini, auto& fin) { sig += eval_pair(p, *sp, ini, fin) ? '1' : '0'; });
    classes.insert(sig);
  }
  CHECK(classes.size() >= 20);
}

TEST_CASE("the full catalog passes on one hundred seeded cases") {
  for (const auto& res : check_all_laws(100, 20240901)) {
    INFO(res.id << ": " << res.counterexample);
    CHECK(res.passed);
    CHECK(res.cases == 100);
    CHECK_FALSE(res.statement.empty());
  }
}

TEST_CASE("unknown law ids are rejected") {
  CHECK_THROWS_AS(check_law("no_such_law", 1, 0), UnknownLaw);
}

TEST_CASE("the catalog covers the advertised families") {
  auto ids = law_ids();
  auto has = [&](const char* id) { return std::find(ids.begin(), ids.end(), id) != ids.end(); };
  for (const char* id :
       {"ib_neg", "ib_conj", "ib_disj", "ib_max", "ib_min", "ib_summation", "top_bot", "pskip_id",
        "passign_final_dist", "pchoice_commute", "pchoice_quasi_assoc", "cchoice_pchoice",
        "pseq_assoc_subdist", "pseq_one", "pseq_ibracket", "uniform_uniform", "uniform_pseq",
        "pparallel_commute", "pparallel_assoc2", "normf_dist", "iterdiff_identity",
        "iter_bot_ascending", "iter_top_descending", "pwhile_false", "pwhile_true"}) {
    INFO(id);
    CHECK(has(id));
  }
  CHECK(ids.size() >= 45);
}

namespace {

// Deliberately wrong sequential composition: drops one intermediate state
// from the summation.
Kernel mutant_seq(const Kernel& P, const Kernel& Q, StateId dropped) {
  Kernel out(P.space(), KernelKind::prfun);
  for (StateId s = 0; s < P.states(); ++s) {
    std::map<StateId, Rational> acc;
    for (const auto& [v0, w] : P.row(s).w) {
      if (v0 == dropped) continue;
      for (const auto& [t, qv] : Q.row(v0).w) acc[t] += w * qv;
    }
    for (const auto& [t, v] : acc)
      if (v != 0) out.set(s, t, v);
  }
  return out;
}

}  // namespace

TEST_CASE("the mutant self-test fails as a real law check would") {
  // the suite must be able to catch a broken implementation: a seq that
  // forgets one intermediate state violates associativity against the
  // reference composition
  laws::Gen g(4242);
  bool caught = false;
  for (int attempt = 0; attempt < 20 && !caught; ++attempt) {
    auto sp = g.space();
    Kernel p = g.dist_kernel(sp), q = g.dist_kernel(sp), r = g.dist_kernel(sp);
    StateId dropped = static_cast<StateId>(g.rng.below(sp->state_count()));
    Kernel good = sem_seq(p, sem_seq(q, r));
    Kernel bad = mutant_seq(mutant_seq(p, q, dropped), r, dropped);
    caught = !kernels_equal(good, bad);
  }
  CHECK(caught);
}
