#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "proburel/parser.hpp"

using namespace proburel;
using namespace proburel::test;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::filesystem::path corpus_dir() {
  for (auto dir : {"corpus", "../corpus", "../../corpus"}) {
    if (std::filesystem::exists(std::filesystem::path(dir) / "dwta.ppl")) return dir;
  }
  FAIL("corpus directory not found; run from the repository root");
  return {};
}

}  // namespace

TEST_CASE("declarations cover all domain forms") {
  SourceProgram s = parse_program(R"(
    var b : bool;
    var e : {lo, hi};
    var x : -1..2;
    var t : nat[0..8];
    skip
  )");
  auto sp = s.space();
  CHECK(sp->state_count() == 2 * 2 * 4 * 9);
  CHECK(sp->domain(0).kind() == DomainKind::boolean);
  CHECK(sp->domain(1).value_name(1) == "hi");
  CHECK(sp->domain(2).lo() == -1);
  CHECK(sp->domain(3).hi() == 8);
}

TEST_CASE("bare nat domains need a window") {
  SourceProgram s = parse_program("var t : nat; t := t + 1");
  CHECK_THROWS_AS(s.space(), UnboundedDomain);
  CHECK_THROWS_WITH(s.space(), Catch::Matchers::ContainsSubstring("unbounded domain"));
  CHECK(s.space(16)->domain(0).hi() == 16);
  CHECK(s.nat_vars() == std::vector<std::string>{"t"});
  // --tmax also overrides a declared window
  SourceProgram b = parse_program("var t : nat[0..4]; t := t + 1");
  CHECK(b.space(9)->domain(0).hi() == 9);
  CHECK(b.space()->domain(0).hi() == 4);
}

TEST_CASE("statement grammar: precedence and sugar") {
  // pc{} binds tighter than ;
  SourceProgram s = parse_program("var x : 0..3; x := 0; x := 1 pc{1/3} x := 2; x := 3");
  const auto& seq1 = std::get<detail::StmtSeq>(s.ast.node()->v);
  const auto& seq0 = std::get<detail::StmtSeq>(seq1.first->v);
  CHECK(std::holds_alternative<detail::StmtAssign>(seq0.first->v));
  CHECK(std::holds_alternative<detail::StmtPChoice>(seq0.second->v));
  CHECK(std::holds_alternative<detail::StmtAssign>(seq1.second->v));

  // rand desugars to the uniform construct
  SourceProgram u = parse_program("var c : {hd, tl}; c := rand({hd, tl})");
  const auto& uni = std::get<detail::StmtUniform>(u.ast.node()->v);
  CHECK(uni.values == std::vector<long long>{0, 1});

  // observe binds a braced block
  SourceProgram o = parse_program("var x : 0..2; { x := rand({0..2}) } || (3*[x' = 0] + 1)");
  CHECK(std::holds_alternative<detail::StmtObserve>(o.ast.node()->v));

  // while produces a loop node
  SourceProgram w = parse_program("var c : {hd, tl}; while (c = tl) { c := hd pc{1/2} c := tl }");
  CHECK(std::holds_alternative<detail::StmtWhile>(w.ast.node()->v));
  CHECK(top_level_loop(w.ast).has_value());
}

TEST_CASE("type errors carry positions and reasons") {
  CHECK_THROWS_AS(parse_program("var x : 0..2; y := 1"), SyntaxError);
  CHECK_THROWS_AS(parse_program("var x : 0..2; x := x'"), SyntaxError);       // primed rhs
  CHECK_THROWS_AS(parse_program("var x : 0..2; while (x' = 1) { skip }"), SyntaxError);
  CHECK_THROWS_AS(parse_program("var x : 0..2; if (x = 1) { skip }"), SyntaxError);  // missing else
  CHECK_THROWS_AS(parse_program("var x : 0..2; x := hd"), SyntaxError);       // label of no domain
  CHECK_THROWS_AS(parse_program("var x : 0..2; x :="), SyntaxError);
  CHECK_THROWS_AS(parse_program("skip"), SyntaxError);                        // no declarations
  try {
    parse_program("var x : 0..2;\nx := ;");
  } catch (const SyntaxError& e) {
    CHECK(e.line == 2);
  }
}

TEST_CASE("parameters: defaults, overrides, binding") {
  SourceProgram s = parse_program("param p = 1/3; param q; var c : bool; c := true pc{p*q} c := false");
  auto env = resolve_params(s, {{"q", Rational(1, 2)}});
  CHECK(env.at("p") == Rational(1, 3));
  CHECK(env.at("q") == Rational(1, 2));
  CHECK_THROWS_AS(resolve_params(s, {}), ParseError);                       // q unbound
  CHECK_THROWS_AS(resolve_params(s, {{"zz", Rational(1)}}), ParseError);    // unknown

  Program bound = bind_params(s.ast, env);
  Kernel k = elaborate(bound, s.space());
  CHECK(classify(k).is_final_dist);
  CHECK(k.at(0, 1) == Rational(1, 6));  // P(c'=true) = p*q
}

TEST_CASE("expression files parse against the program context") {
  SourceProgram dice = parse_program(slurp(corpus_dir() / "dice.ppl"));
  RelExpr h = parse_expression(slurp(corpus_dir() / "dice_H.expr"), dice);
  auto sp = dice.space();
  Kernel k = clamp_kernel(tabulate(sp, h));
  CHECK(classify(k).is_final_dist);
  CHECK(k.at(sp->encode(std::vector<long long>{2, 2}), sp->encode(std::vector<long long>{2, 2})) == 1);
  CHECK(k.at(sp->encode(std::vector<long long>{1, 2}), sp->encode(std::vector<long long>{3, 3})) ==
        Rational(1, 6));
}

TEST_CASE("every corpus program parses, prints, and reparses identically") {
  size_t seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(corpus_dir())) {
    if (entry.path().extension() != ".ppl") continue;
    ++seen;
    INFO(entry.path().string());
    SourceProgram a = parse_program(slurp(entry.path()));
    SourceProgram b = parse_program(pretty(a));
    CHECK(structurally_equal(a.ast, b.ast));
    REQUIRE(a.decls.size() == b.decls.size());
  }
  CHECK(seen >= 13);
}

TEST_CASE("corpus programs without loops elaborate to distributions") {
  for (const char* name : {"dwta.ppl", "monty_nc.ppl", "monty_c.ppl", "forgetful_monty.ppl",
                           "robot.ppl", "covid_first.ppl", "covid_second.ppl"}) {
    INFO(name);
    SourceProgram src = parse_program(slurp(corpus_dir() / name));
    Program bound = bind_params(src.ast, resolve_params(src, {}));
    Kernel k = elaborate(bound, src.space());
    CHECK(classify(k).is_final_dist);
  }
}
