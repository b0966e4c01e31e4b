#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "proburel/state.hpp"

using namespace proburel;

namespace {
SpacePtr coin_space() { return make_space({{"c", Domain::enumeration({"hd", "tl"})}}); }
SpacePtr monty_space() {
  return make_space({{"p", Domain::int_range(0, 2)},
                     {"c", Domain::int_range(0, 2)},
                     {"m", Domain::int_range(0, 2)}});
}
}  // namespace

TEST_CASE("make_space validates declarations") {
  CHECK(coin_space()->state_count() == 2);
  CHECK(monty_space()->state_count() == 27);
  CHECK(make_space({{"x", Domain::int_range(1, 1)}})->state_count() == 1);
  CHECK_THROWS_AS(make_space({}), DomainError);
  CHECK_THROWS_AS(make_space({{"x", Domain::boolean()}, {"x", Domain::boolean()}}), DomainError);
  CHECK_THROWS_AS(Domain::int_range(3, 1), DomainError);
  CHECK_THROWS_AS(Domain::enumeration({}), DomainError);
  CHECK_THROWS_AS(Domain::enumeration({"a", "a"}), DomainError);
}

TEST_CASE("enumeration is lexicographic in declaration order") {
  auto space = coin_space();
  auto states = enumerate(space);
  REQUIRE(states.size() == 2);
  CHECK(states[0].to_string() == "c=hd");
  CHECK(states[1].to_string() == "c=tl");

  auto monty = enumerate(monty_space());
  REQUIRE(monty.size() == 27);
  CHECK(monty[0].to_string() == "p=0,c=0,m=0");
  CHECK(monty[1].to_string() == "p=0,c=0,m=1");
  CHECK(monty[26].to_string() == "p=2,c=2,m=2");
  std::set<StateId> ids;
  for (const auto& s : monty) ids.insert(s.id());
  CHECK(ids.size() == 27);  // each state exactly once
}

TEST_CASE("update changes exactly one variable") {
  auto space = monty_space();
  State s(space, std::vector<long long>{0, 1, 2});
  State t = update(s, "m", 0);
  CHECK(t.to_string() == "p=0,c=1,m=0");
  CHECK(s.to_string() == "p=0,c=1,m=2");  // original untouched
  CHECK(update(s, "m", 2) == s);          // identity when unchanged

  auto coin = coin_space();
  State tl(coin, std::vector<long long>{1});
  CHECK(update(tl, "c", 0).to_string() == "c=hd");
  CHECK_THROWS_AS(update(s, "p", 7), OutOfDomain);
}

TEST_CASE("state ids round-trip through encode/decode") {
  auto space = monty_space();
  std::vector<long long> vals;
  for (StateId id = 0; id < space->state_count(); ++id) {
    space->decode(id, vals);
    CHECK(space->encode(vals) == id);
  }
}

TEST_CASE("domain values parse and print") {
  Domain b = Domain::boolean();
  CHECK(b.parse_value("true") == 1);
  CHECK(b.parse_value("banana") == std::nullopt);
  Domain e = Domain::enumeration({"Pos", "Neg"});
  CHECK(e.parse_value("Neg") == 1);
  CHECK(e.value_name(0) == "Pos");
  Domain r = Domain::int_range(-2, 5);
  CHECK(r.parse_value("-2") == -2);
  CHECK(r.parse_value("6") == std::nullopt);
  CHECK(r.size() == 8);
}
