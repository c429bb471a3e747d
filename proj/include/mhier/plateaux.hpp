#pragma once

#include <vector>

#include "mhier/landscape.hpp"

namespace mhier {

// Connected equal-energy set whose entire outer boundary is strictly higher.
struct Plateau {
  StateSet states;
  Energy energy = 0;
};

// Connected set whose interior maximum lies strictly below its boundary
// minimum. depth = min boundary energy - min interior energy > 0.
struct Cycle {
  StateSet states;
  Energy depth = 0;
  StateSet bottom;
};

// The complete, disjoint list of stable plateaux, sorted by smallest member id.
std::vector<Plateau> stable_plateaux(const Landscape& land);

// Checks the cycle definition on C and computes depth and bottom.
Cycle validate_cycle(const Landscape& land, const StateSet& c);

// V = { eta : Phi(P, eta) - H(P) < gamma }, validated as a cycle whose bottom
// contains P and whose depth equals gamma. gamma is the plateau's depth at the
// caller's current hierarchy level.
Cycle valley(const Landscape& land, const Plateau& p, Energy gamma);

struct DepthResult {
  std::vector<Energy> depth;  // Gamma_i per plateau
  Energy gamma_star = 0;      // min over i
};

// Depths of a disjoint family of (possibly merged, equal-energy) plateaux:
// Gamma_i = Phi(P_i, union of the others) - H(P_i), computed by one
// sorted-by-energy union-find sweep. Needs at least two plateaux.
DepthResult plateau_depths(const Landscape& land, const std::vector<Plateau>& plateaux);

// Initial depths of the level-1 plateaux (errors with SingleGround if fewer
// than two plateaux exist).
DepthResult initial_depths(const Landscape& land, const std::vector<Plateau>& plateaux);

}  // namespace mhier
