#pragma once

#include "mhier/landscape.hpp"
#include "mhier/plateaux.hpp"

namespace mhier::testing {

// 7-state chain with energies (0,3,1,2,1,3,0): two deep outer wells around a
// shallow double well. Small enough to verify everything by hand.
inline Landscape chain_w() {
  std::vector<std::pair<std::string, Energy>> states = {
      {"s0", 0}, {"s1", 3}, {"s2", 1}, {"s3", 2}, {"s4", 1}, {"s5", 3}, {"s6", 0}};
  std::vector<std::pair<StateId, StateId>> edges = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}};
  return Landscape::build(std::move(states), edges);
}

// Flat two-state cycle {a,b} at energy 0 with boundary states x1 (adjacent to
// a) and x2 (adjacent to both) at energy 1; the limiting exit law is (1/3, 2/3).
// One extra state keeps x1, x2 connected away from the cycle.
inline Landscape exit_fixture() {
  std::vector<std::pair<std::string, Energy>> states = {
      {"a", 0}, {"b", 0}, {"x1", 1}, {"x2", 1}, {"top", 2}};
  std::vector<std::pair<StateId, StateId>> edges = {{0, 1}, {0, 2}, {0, 3}, {1, 3}, {2, 4}, {3, 4}};
  return Landscape::build(std::move(states), edges);
}

}  // namespace mhier::testing
