#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mhier/errors.hpp"

namespace mhier {

// Energies are exact integers. Landscapes with rational energies must be
// pre-scaled by the caller; all tie and strict-inequality logic below relies
// on exact comparisons.
using Energy = std::int64_t;
using StateId = std::uint32_t;

// Canonical set representation: sorted, duplicate-free vector of ids. Every
// set returned by the library is in this form, so runs are reproducible.
using StateSet = std::vector<StateId>;

bool is_canonical_set(const StateSet& s);
StateSet canonicalize(StateSet s);

struct BuildWarning {
  std::string message;
};

// Finite connected energy landscape: states with integer energies plus a
// symmetric, irreflexive adjacency. Immutable after build; safe to share
// across threads.
class Landscape {
 public:
  static constexpr std::size_t kDefaultStateCap = 5'000'000;

  Landscape() = default;  // empty; fill via build()/load_json()

  static Landscape build(std::vector<std::pair<std::string, Energy>> states,
                         const std::vector<std::pair<StateId, StateId>>& edges,
                         std::vector<BuildWarning>* warnings = nullptr,
                         std::size_t state_cap = kDefaultStateCap);

  std::size_t size() const { return energies_.size(); }
  std::size_t num_edges() const { return neighbors_.size() / 2; }

  Energy energy(StateId s) const { return energies_[s]; }
  const std::string& label(StateId s) const { return labels_[s]; }
  std::span<const StateId> neighbors(StateId s) const {
    return {neighbors_.data() + offsets_[s], neighbors_.data() + offsets_[s + 1]};
  }
  bool adjacent(StateId a, StateId b) const;

  StateSet all_states() const;
  Energy min_energy() const { return min_energy_; }
  Energy max_energy() const { return max_energy_; }

  // Landscape JSON: {"states":[{"label":str,"energy":int},...],
  //                  "edges":[[i,j],...]}
  static Landscape load_json(std::istream& in, std::vector<BuildWarning>* warnings = nullptr);
  static Landscape load_json_file(const std::string& path, std::vector<BuildWarning>* warnings = nullptr);
  void save_json(std::ostream& out) const;
  void save_json_file(const std::string& path) const;

 private:
  std::vector<Energy> energies_;
  std::vector<std::string> labels_;
  std::vector<std::size_t> offsets_;  // CSR: neighbors of s at [offsets_[s], offsets_[s+1])
  std::vector<StateId> neighbors_;    // sorted within each state
  Energy min_energy_ = 0;
  Energy max_energy_ = 0;
};

// F(A): the energy minimizers of A.
StateSet bottom(const Landscape& land, const StateSet& a);

struct BoundarySets {
  StateSet boundary;      // outer boundary of A
  StateSet min_boundary;  // its energy minimizers
};

BoundarySets boundary_sets(const Landscape& land, const StateSet& a);

// Communication height between disjoint nonempty sets: the minimal over
// connecting paths of the maximal energy along the path (endpoints included).
Energy comm_height(const Landscape& land, const StateSet& a, const StateSet& b);

// Bulk minimax-height structure: a union-find sweep over states sorted by
// energy, recording the merge forest. height(a,b) answers comm_height({a},{b})
// in O(log n); height(a,a) = H(a).
class MergeTree {
 public:
  explicit MergeTree(const Landscape& land);

  Energy height(StateId a, StateId b) const;

 private:
  std::size_t n_ = 0;
  std::vector<std::int32_t> parent_;  // forest over 2n-1 nodes; -1 at the root
  std::vector<Energy> node_height_;
  std::vector<std::int32_t> depth_;
};

inline MergeTree barrier_filtration(const Landscape& land) { return MergeTree(land); }

struct OmegaBar {
  Energy phi_bar = 0;
  Landscape restricted;
  std::vector<StateId> original_ids;  // restricted id -> id in the input landscape
  StateSet ground;                    // ground states, in restricted ids
};

// Validates ground == F(Omega), computes Phi-bar = max over ground pairs of
// the communication height, and restricts to the connected component of the
// <= Phi-bar sublevel graph containing the ground states.
OmegaBar restrict_to_omega_bar(const Landscape& land, const StateSet& ground);

// States reachable from A by a path whose every state has energy <= cap
// (strictly < cap when strict), avoiding `forbidden` entirely.
StateSet allowed_neighborhood(const Landscape& land, const StateSet& a, const StateSet& forbidden,
                              Energy cap, bool strict);

}  // namespace mhier
