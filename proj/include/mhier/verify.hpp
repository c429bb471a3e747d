#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "mhier/hierarchy.hpp"
#include "mhier/landscape.hpp"
#include "mhier/plateaux.hpp"
#include "mhier/rng.hpp"

namespace mhier {

// Metropolis rates r(eta,xi) = exp(-beta * max(H(xi)-H(eta), 0)). All log-domain
// quantities are derived from integer energies, so detailed balance holds as an
// exact identity, which the constructor asserts edge by edge.
class RateSystem {
 public:
  RateSystem(const Landscape& land, double beta);

  const Landscape& landscape() const { return *land_; }
  double beta() const { return beta_; }

  double log_rate(StateId s, StateId t) const;  // adjacent states only
  double rate(StateId s, StateId t) const;
  double log_weight(StateId s) const { return -beta_ * static_cast<double>(land_->energy(s)); }
  double log_z() const { return log_z_; }
  double log_gibbs(StateId s) const { return log_weight(s) - log_z_; }

 private:
  const Landscape* land_;
  double beta_;
  double log_z_;
};

// Limiting exit law from a cycle: mass at each minimal-boundary state
// proportional to its contact count with the cycle.
struct ExitLimit {
  StateSet support;             // the minimal boundary
  std::vector<Rational> prob;   // contact / total contacts
};

ExitLimit exit_distribution_limit(const Landscape& land, const Cycle& cycle);

// Finite-beta exit law on the full boundary, solved on the embedded jump chain
// with the boundary absorbing, in >= 50-digit floating arithmetic. The start
// distribution defaults to uniform over the cycle's bottom.
struct ExitExact {
  StateSet support;           // the whole outer boundary
  std::vector<double> prob;
};

ExitExact exit_distribution_exact(const Landscape& land, const Cycle& cycle, double beta,
                                  const StateSet& start = {});

// Deviation between the microscopic resolvent solution accelerated at the
// level's time scale and the macroscopic one on the level's limit chain:
// sup over each valley of |F - f(P_i)|, one entry per valley, one vector per g.
class ResolventChecker {
 public:
  ResolventChecker(const Landscape& land, const Level& level, double lambda, double beta);

  std::vector<double> deviations(std::span<const double> g) const;

 private:
  const Landscape* land_;
  const Level* level_;
  double lambda_, beta_;
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

std::vector<double> resolvent_deviation(const Landscape& land, const Level& level, double lambda,
                                        std::span<const double> g, double beta);

// Continuous-time Metropolis trajectory with exponential holding times.
struct Trajectory {
  struct Visit {
    StateId state;
    double holding;  // time spent in `state` (the last visit may be truncated)
  };
  std::vector<Visit> visits;
  double total_time = 0;
  enum class Stop { HitSet, TimeBudget, JumpCap } stop = Stop::TimeBudget;
};

struct StopRule {
  StateSet hit;                     // stop on entering this set (empty: never)
  double time_budget = -1;          // stop after this much time (negative: none)
  std::uint64_t max_jumps = 100'000'000;
};

Trajectory simulate(const Landscape& land, double beta, StateId start, const StopRule& stop,
                    Rng rng);

// Fraction of trajectory time spent outside the given set.
double occupation_fraction_outside(const Trajectory& t, const StateSet& inside);

// Connected random landscape with integer energies, deterministic per seed.
Landscape random_landscape(std::uint64_t seed, std::size_t n_states, double avg_degree,
                           Energy energy_min, Energy energy_max);

}  // namespace mhier
