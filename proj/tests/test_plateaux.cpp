#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "fixtures.hpp"
#include "mhier/plateaux.hpp"
#include "mhier/verify.hpp"
#include "oracles.hpp"

using namespace mhier;
using namespace mhier::testing;

TEST_CASE("stable plateaux on W match the subset-scan oracle") {
  Landscape w = chain_w();
  auto ps = stable_plateaux(w);
  REQUIRE(ps.size() == 4);
  CHECK(ps[0].states == StateSet{0});
  CHECK(ps[1].states == StateSet{2});
  CHECK(ps[2].states == StateSet{4});
  CHECK(ps[3].states == StateSet{6});

  auto oracle = oracle_stable_plateaux(w);
  REQUIRE(oracle.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(ps[i].states == oracle[i]);
}

TEST_CASE("flat landscape is a single plateau") {
  auto flat = Landscape::build({{"", 2}, {"", 2}}, {{0, 1}});
  auto ps = stable_plateaux(flat);
  REQUIRE(ps.size() == 1);
  CHECK(ps[0].states == StateSet{0, 1});
  CHECK(ps[0].energy == 2);
  CHECK_THROWS_AS(initial_depths(flat, ps), Error);  // SingleGround downstream
}

TEST_CASE("plateau properties on random landscapes") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Landscape land = random_landscape(seed, 6 + seed % 13, 2.7, -3, 5);
    auto ps = stable_plateaux(land);
    auto oracle = oracle_stable_plateaux(land);
    REQUIRE(ps.size() == oracle.size());
    std::vector<char> claimed(land.size(), 0);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      CHECK(ps[i].states == oracle[i]);
      for (StateId s : ps[i].states) {
        CHECK(!claimed[s]);  // pairwise disjoint
        claimed[s] = 1;
      }
    }
    // the plateaux cover the ground states
    for (StateId g : bottom(land, land.all_states())) CHECK(claimed[g]);
  }
}

TEST_CASE("validate_cycle on W") {
  Landscape w = chain_w();
  Cycle c = validate_cycle(w, {2, 3, 4});
  CHECK(c.depth == 2);  // min boundary 3, min interior 1
  CHECK(c.bottom == StateSet{2, 4});

  Cycle s2 = validate_cycle(w, {2});
  CHECK(s2.depth == 1);  // neighbors s1 at 3 and s3 at 2
  CHECK(s2.bottom == StateSet{2});

  try {
    validate_cycle(w, {1, 2});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == Err::NotACycle);
  }
  try {
    validate_cycle(w, {0, 2});  // s1 between them is missing
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == Err::NotConnected);
  }
  CHECK_THROWS_AS(validate_cycle(w, {}), Error);
  CHECK_THROWS_AS(validate_cycle(w, w.all_states()), Error);
}

TEST_CASE("valleys on W") {
  Landscape w = chain_w();
  Cycle v2 = valley(w, Plateau{{2}, 1}, 1);
  CHECK(v2.states == StateSet{2});

  Cycle v0 = valley(w, Plateau{{0}, 0}, 3);
  CHECK(v0.states == StateSet{0});  // s1 at 3 is excluded by strictness

  Cycle merged = valley(w, Plateau{{2, 4}, 1}, 2);
  CHECK(merged.states == StateSet{2, 3, 4});
  CHECK(merged.bottom == StateSet{2, 4});
  CHECK(merged.depth == 2);

  // over-large gamma floods the whole landscape and fails post-validation
  CHECK_THROWS_AS(valley(w, Plateau{{2}, 1}, 3), Error);
}

TEST_CASE("initial depths on W") {
  Landscape w = chain_w();
  auto ps = stable_plateaux(w);
  auto d = initial_depths(w, ps);
  CHECK(d.depth == std::vector<Energy>{3, 1, 1, 3});
  CHECK(d.gamma_star == 1);
}

TEST_CASE("two symmetric wells have equal depths") {
  auto land = Landscape::build({{"", 0}, {"", 4}, {"", 0}}, {{0, 1}, {1, 2}});
  auto ps = stable_plateaux(land);
  auto d = initial_depths(land, ps);
  CHECK(d.depth == std::vector<Energy>{4, 4});
  CHECK(d.gamma_star == 4);
}

TEST_CASE("depths match the pairwise communication-height oracle") {
  for (std::uint64_t seed = 50; seed < 90; ++seed) {
    Landscape land = random_landscape(seed, 8 + seed % 25, 2.9, -6, 6);
    auto ps = stable_plateaux(land);
    if (ps.size() < 2) continue;
    auto d = plateau_depths(land, ps);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      StateSet rest;
      for (std::size_t j = 0; j < ps.size(); ++j)
        if (j != i) rest.insert(rest.end(), ps[j].states.begin(), ps[j].states.end());
      Energy expect = comm_height(land, ps[i].states, canonicalize(rest)) - ps[i].energy;
      REQUIRE(d.depth[i] == expect);
    }
  }
}

TEST_CASE("valleys of distinct plateaux are disjoint with the right bottoms") {
  for (std::uint64_t seed = 400; seed < 430; ++seed) {
    Landscape land = random_landscape(seed, 14 + seed % 20, 3.1, -5, 7);
    auto ps = stable_plateaux(land);
    if (ps.size() < 2) continue;
    auto d = plateau_depths(land, ps);
    std::vector<char> used(land.size(), 0);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      Cycle v = valley(land, ps[i], d.depth[i]);
      CHECK(v.bottom == ps[i].states);
      CHECK(v.depth == d.depth[i]);
      for (StateId s : v.states) {
        CHECK(!used[s]);
        used[s] = 1;
      }
    }
  }
}

TEST_CASE("cycle bottoms decompose into stable plateaux") {
  for (std::uint64_t seed = 500; seed < 520; ++seed) {
    Landscape land = random_landscape(seed, 12 + seed % 9, 2.8, -4, 6);
    auto ps = stable_plateaux(land);
    if (ps.size() < 2) continue;
    auto d = plateau_depths(land, ps);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      Cycle v = valley(land, ps[i], d.depth[i]);
      // every bottom state lies in some plateau, and the containing plateau
      // sits entirely inside the bottom
      for (StateId s : v.bottom) {
        bool found = false;
        for (const auto& p : ps)
          if (std::binary_search(p.states.begin(), p.states.end(), s)) {
            found = true;
            CHECK(std::includes(v.bottom.begin(), v.bottom.end(), p.states.begin(), p.states.end()));
          }
        CHECK(found);
      }
    }
  }
}
