#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mhier/landscape.hpp"
#include "mhier/plateaux.hpp"

namespace mhier {

// All chain rates are exact rationals; energies are integers, so every rate
// produced by the construction is rational and equality assertions are exact.
using Rational = mpq_class;

std::string rational_string(const Rational& q);  // "p/q", denominator always written

// Markov chain on the landscape with the given disjoint cycles contracted to
// single nodes identified with their bottoms. Rates:
//   1 for downhill-or-level jumps between non-contracted states,
//   the contact count for jumps from a boundary state into a cycle,
//   contact count / |bottom| for exits from a cycle of depth <= Gamma* to a
//   minimal boundary state (deeper cycles are absorbing).
struct InducedChain {
  Energy gamma_star = 0;
  std::vector<Cycle> cycles;
  std::vector<StateId> delta;  // states outside all cycles, sorted

  // node indexing: [0, delta.size()) are delta states, then one node per cycle
  struct Edge {
    std::uint32_t to;
    Rational rate;
  };
  std::vector<std::vector<Edge>> out;
  std::vector<Rational> cycle_out_rate;  // per cycle, total outgoing rate
  std::vector<Energy> kappa;             // per node: state energy / cycle exit level

  std::uint32_t num_nodes() const { return static_cast<std::uint32_t>(delta.size() + cycles.size()); }
  std::uint32_t cycle_node(std::size_t c) const { return static_cast<std::uint32_t>(delta.size() + c); }
  bool is_cycle_node(std::uint32_t v) const { return v >= delta.size(); }
};

InducedChain induced_chain(const Landscape& land, std::vector<Cycle> cycles, Energy gamma_star);

// The induced chain watched on the bottoms of the deep (depth >= Gamma*)
// cycles. rate(i,j) includes the diagonal return weight; rows of cycles
// deeper than Gamma* are zero. Row sums equal the induced chain's total
// outgoing rate (checked exactly).
struct LimitChain {
  std::vector<std::size_t> star;   // indices into the induced chain's cycle list
  std::vector<StateSet> plateaux;  // bottoms of the star cycles
  std::vector<std::vector<std::pair<std::uint32_t, Rational>>> rates;  // sorted by target
  std::vector<Rational> out_rate;

  std::size_t size() const { return star.size(); }
  Rational rate(std::size_t i, std::size_t j) const;
};

struct TraceOptions {
  // Absorption probabilities are solved with exact rationals by default. The
  // floating fallback exists for very large transient blocks; it checks the
  // residual of every solved column against this bound.
  bool float_fallback = false;
  double residual_bound = 1e-10;
};

LimitChain trace_chain(const InducedChain& ic, const TraceOptions& opts = {});

// Closed communicating classes (recurrent components) and transient elements
// of a limit chain; components ordered by the smallest state id they contain.
struct Classification {
  std::vector<std::vector<std::uint32_t>> components;
  std::vector<std::uint32_t> transient;
};

Classification classify_chain(const LimitChain& lc);

struct Level {
  int h = 0;
  std::vector<Plateau> plateaux;  // P^{*,h}
  std::vector<Energy> depths;     // Gamma_i^h
  Energy gamma_star = 0;          // Gamma^{*,h}
  std::vector<Cycle> valleys;     // V_i^h, same order as plateaux
  std::vector<Cycle> carried;     // shallower cycles carried from earlier levels
  InducedChain induced;
  LimitChain limit;
  Classification classes;

  std::size_t nu() const { return classes.components.size(); }
};

Level first_level(const Landscape& land, const TraceOptions& opts = {});
Level advance_level(const Landscape& land, const Level& prev, const TraceOptions& opts = {});

// Per-level verification of the classification trichotomy, ground-state
// recurrence, the rate-sum identity, and the mixing-scale diagnostic
// Gamma~(V_i^h) = Gamma^{*,h-1}. Throws ClassificationViolation with the
// offending plateau if any check fails.
struct LevelDiagnostics {
  std::vector<Energy> gamma_tilde;          // per valley
  std::vector<std::uint32_t> kind;          // per plateau: 0 singleton, 1 multi, 2 transient
};

LevelDiagnostics check_classification(const Landscape& land, const Level& level, Energy gamma_star_prev);

struct HierarchyReport {
  Energy phi_bar = 0;
  Landscape omega_bar;                // analysis substrate (restriction of the input)
  std::vector<StateId> original_ids;  // omega_bar id -> input landscape id
  StateSet ground;                    // in omega_bar ids
  std::vector<Level> levels;          // 1..m
  std::vector<LevelDiagnostics> diagnostics;

  std::size_t terminal_level() const { return levels.size(); }
};

// Runs the full iteration on the Omega-bar restriction of the input until a
// single irreducible class remains, asserting every per-level invariant.
HierarchyReport full_hierarchy(const Landscape& land, const TraceOptions& opts = {});

// Report JSON; state ids refer to the input landscape.
void report_to_json(const HierarchyReport& report, std::ostream& out,
                    const std::string& tool_version = {}, const std::string& config_echo = {});

}  // namespace mhier
