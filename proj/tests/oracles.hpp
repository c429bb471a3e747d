#pragma once

// Independent brute-force oracles. Everything here recomputes results from
// first principles with no shared code paths into the library, so agreement is
// meaningful evidence. Exponential-cost routines are for small fixtures only.

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <vector>

#include "mhier/hierarchy.hpp"
#include "mhier/landscape.hpp"
#include "mhier/solver.hpp"

namespace mhier::testing {

// Minimal path height between a and b by exhaustive simple-path enumeration.
inline Energy oracle_comm_height(const Landscape& land, StateId a, StateId b) {
  Energy best = std::numeric_limits<Energy>::max();
  std::vector<char> on_path(land.size(), 0);
  auto dfs = [&](auto&& self, StateId u, Energy h) -> void {
    h = std::max(h, land.energy(u));
    if (h >= best) return;
    if (u == b) {
      best = h;
      return;
    }
    on_path[u] = 1;
    for (StateId v : land.neighbors(u))
      if (!on_path[v]) self(self, v, h);
    on_path[u] = 0;
  };
  dfs(dfs, a, std::numeric_limits<Energy>::min());
  return best;
}

inline Energy oracle_comm_height_sets(const Landscape& land, const StateSet& a, const StateSet& b) {
  Energy best = std::numeric_limits<Energy>::max();
  for (StateId x : a)
    for (StateId y : b) best = std::min(best, oracle_comm_height(land, x, y));
  return best;
}

// All states reachable from `from` through states within the cap.
inline StateSet oracle_capped_reach(const Landscape& land, const StateSet& from, Energy cap,
                                    bool strict, const StateSet& forbidden = {}) {
  auto ok = [&](StateId s) {
    if (std::binary_search(forbidden.begin(), forbidden.end(), s)) return false;
    return strict ? land.energy(s) < cap : land.energy(s) <= cap;
  };
  std::set<StateId> seen;
  std::vector<StateId> stack;
  for (StateId s : from)
    if (ok(s)) {
      seen.insert(s);
      stack.push_back(s);
    }
  while (!stack.empty()) {
    StateId u = stack.back();
    stack.pop_back();
    for (StateId v : land.neighbors(u))
      if (ok(v) && seen.insert(v).second) stack.push_back(v);
  }
  return StateSet(seen.begin(), seen.end());
}

// Stable plateaux by scanning every subset of states (<= 20 states): connected,
// equal energy, boundary strictly higher.
inline std::vector<StateSet> oracle_stable_plateaux(const Landscape& land) {
  const std::size_t n = land.size();
  std::vector<StateSet> out;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    StateSet members;
    for (std::size_t s = 0; s < n; ++s)
      if (mask & (1u << s)) members.push_back(static_cast<StateId>(s));
    const Energy e = land.energy(members.front());
    bool flat = true;
    for (StateId s : members) flat = flat && land.energy(s) == e;
    if (!flat) continue;
    // connected?
    std::set<StateId> seen{members.front()};
    std::vector<StateId> stack{members.front()};
    while (!stack.empty()) {
      StateId u = stack.back();
      stack.pop_back();
      for (StateId v : land.neighbors(u))
        if ((mask & (1u << v)) && seen.insert(v).second) stack.push_back(v);
    }
    if (seen.size() != members.size()) continue;
    bool higher = true;
    for (StateId s : members)
      for (StateId v : land.neighbors(s))
        if (!(mask & (1u << v)) && land.energy(v) <= e) higher = false;
    if (higher) out.push_back(members);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Absorption probabilities of the induced chain, solved globally by dense
// exact elimination over the whole transient block, with no level-by-level
// decomposition. Returns, for each node, the distribution over star cycles.
inline std::vector<std::vector<Rational>> oracle_absorption(const InducedChain& ic) {
  std::vector<std::size_t> star;
  for (std::size_t c = 0; c < ic.cycles.size(); ++c)
    if (ic.cycles[c].depth >= ic.gamma_star) star.push_back(c);

  const std::uint32_t n = ic.num_nodes();
  std::vector<std::int32_t> star_of(ic.cycles.size(), -1);
  for (std::size_t i = 0; i < star.size(); ++i) star_of[star[i]] = static_cast<std::int32_t>(i);

  std::vector<std::uint32_t> transient;
  std::vector<std::int32_t> tpos(n, -1);
  for (std::uint32_t v = 0; v < n; ++v) {
    bool absorbing = ic.is_cycle_node(v) && star_of[v - ic.delta.size()] >= 0;
    if (!absorbing) {
      tpos[v] = static_cast<std::int32_t>(transient.size());
      transient.push_back(v);
    }
  }
  const std::size_t k = transient.size();
  std::vector<std::vector<Rational>> a(k, std::vector<Rational>(k, Rational(0)));
  std::vector<std::vector<Rational>> rhs(star.size(), std::vector<Rational>(k, Rational(0)));
  for (std::size_t i = 0; i < k; ++i) {
    const std::uint32_t v = transient[i];
    Rational total(0);
    for (const auto& e : ic.out[v]) total += e.rate;
    a[i][i] = total;
    for (const auto& e : ic.out[v]) {
      if (tpos[e.to] >= 0)
        a[i][tpos[e.to]] -= e.rate;
      else
        rhs[star_of[e.to - ic.delta.size()]][i] += e.rate;
    }
  }
  std::vector<std::vector<Rational>> sol = dense_solve(std::move(a), std::move(rhs));
  std::vector<std::vector<Rational>> out(n, std::vector<Rational>(star.size(), Rational(0)));
  for (std::uint32_t v = 0; v < n; ++v) {
    if (tpos[v] >= 0) {
      for (std::size_t t = 0; t < star.size(); ++t) out[v][t] = sol[t][tpos[v]];
    } else {
      out[v][star_of[v - ic.delta.size()]] = 1;
    }
  }
  return out;
}

// Trace rates from the oracle absorption probabilities.
inline std::vector<std::vector<Rational>> oracle_trace_rates(const InducedChain& ic) {
  std::vector<std::size_t> star;
  for (std::size_t c = 0; c < ic.cycles.size(); ++c)
    if (ic.cycles[c].depth >= ic.gamma_star) star.push_back(c);
  auto abs = oracle_absorption(ic);
  std::vector<std::vector<Rational>> rates(star.size(),
                                           std::vector<Rational>(star.size(), Rational(0)));
  for (std::size_t i = 0; i < star.size(); ++i) {
    if (ic.cycles[star[i]].depth > ic.gamma_star) continue;
    for (const auto& e : ic.out[ic.cycle_node(star[i])])
      for (std::size_t j = 0; j < star.size(); ++j) rates[i][j] += e.rate * abs[e.to][j];
  }
  return rates;
}

}  // namespace mhier::testing
