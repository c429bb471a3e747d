#include "mhier/hierarchy.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <ostream>
#include <queue>

#include "json.hpp"
#include "mhier/solver.hpp"

namespace mhier {

std::string rational_string(const Rational& q) {
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

Rational LimitChain::rate(std::size_t i, std::size_t j) const {
  const auto& row = rates[i];
  auto it = std::lower_bound(row.begin(), row.end(), j,
                             [](const auto& e, std::size_t v) { return e.first < v; });
  if (it != row.end() && it->first == j) return it->second;
  return Rational(0);
}

InducedChain induced_chain(const Landscape& land, std::vector<Cycle> cycles, Energy gamma_star) {
  require(cycles.size() >= 2, Err::BadInput, "induced chain needs at least two cycles");
  const std::size_t n = land.size();

  std::vector<std::int32_t> owner(n, -1);
  for (std::size_t c = 0; c < cycles.size(); ++c) {
    // re-validate: connected, boundary strictly above interior
    Cycle checked = validate_cycle(land, cycles[c].states);
    require(checked.depth == cycles[c].depth && checked.bottom == cycles[c].bottom, Err::BadInput,
            "cycle " + std::to_string(c) + " carries inconsistent depth or bottom");
    for (StateId s : cycles[c].states) {
      require(owner[s] < 0, Err::OverlappingCycles,
              "cycles overlap at state " + std::to_string(s));
      owner[s] = static_cast<std::int32_t>(c);
    }
  }

  InducedChain ic;
  ic.gamma_star = gamma_star;
  ic.cycles = std::move(cycles);
  std::vector<std::uint32_t> delta_index(n, UINT32_MAX);
  for (StateId s = 0; s < n; ++s)
    if (owner[s] < 0) {
      delta_index[s] = static_cast<std::uint32_t>(ic.delta.size());
      ic.delta.push_back(s);
    }

  ic.out.assign(ic.num_nodes(), {});
  ic.kappa.assign(ic.num_nodes(), 0);
  ic.cycle_out_rate.assign(ic.cycles.size(), Rational(0));

  for (std::size_t i = 0; i < ic.delta.size(); ++i) {
    const StateId s = ic.delta[i];
    ic.kappa[i] = land.energy(s);
    std::map<std::int32_t, long> contacts;
    for (StateId t : land.neighbors(s)) {
      if (owner[t] >= 0) {
        ++contacts[owner[t]];
      } else if (land.energy(t) <= land.energy(s)) {
        ic.out[i].push_back({delta_index[t], Rational(1)});
      }
    }
    for (auto [c, k] : contacts) ic.out[i].push_back({ic.cycle_node(c), Rational(k)});
    std::sort(ic.out[i].begin(), ic.out[i].end(),
              [](const auto& a, const auto& b) { return a.to < b.to; });
  }

  for (std::size_t c = 0; c < ic.cycles.size(); ++c) {
    const Cycle& cyc = ic.cycles[c];
    const Energy exit_level = land.energy(cyc.bottom.front()) + cyc.depth;
    ic.kappa[ic.cycle_node(c)] = exit_level;
    if (cyc.depth > gamma_star) continue;  // absorbing
    // contact counts on the minimal boundary
    std::map<StateId, long> contacts;
    for (StateId s : cyc.states)
      for (StateId t : land.neighbors(s))
        if (owner[t] != static_cast<std::int32_t>(c) && land.energy(t) == exit_level) {
          // t is on the boundary at the minimal level; cycle states cannot sit there
          require(owner[t] < 0, Err::InvalidCycleCollection,
                  "minimal boundary of cycle " + std::to_string(c) + " lies inside another cycle");
          ++contacts[t];
        }
    require(!contacts.empty(), Err::InvalidCycleCollection,
            "cycle " + std::to_string(c) + " has no minimal boundary at its exit level");
    const Rational inv_bottom(1, static_cast<long>(cyc.bottom.size()));
    auto& row = ic.out[ic.cycle_node(c)];
    for (auto [t, k] : contacts) {
      Rational r = inv_bottom * k;
      row.push_back({delta_index[t], r});
      ic.cycle_out_rate[c] += r;
    }
  }
  return ic;
}

namespace {

// One flat block of the absorption solve: nodes of equal kappa joined by
// level transitions, solved together once everything below is known.
template <class S>
struct AbsorptionSolve {
  using Dist = std::vector<std::pair<std::uint32_t, S>>;  // sorted by star index

  const InducedChain& ic;
  std::vector<std::int32_t> star_of_cycle;  // cycle -> star index or -1
  std::vector<Dist> dist;                   // per node; empty for absorbing/unvisited
  std::vector<char> absorbing;

  explicit AbsorptionSolve(const InducedChain& chain, const std::vector<std::size_t>& star)
      : ic(chain) {
    star_of_cycle.assign(ic.cycles.size(), -1);
    for (std::size_t i = 0; i < star.size(); ++i)
      star_of_cycle[star[i]] = static_cast<std::int32_t>(i);
    dist.assign(ic.num_nodes(), {});
    absorbing.assign(ic.num_nodes(), 0);
    for (std::size_t c = 0; c < ic.cycles.size(); ++c)
      if (star_of_cycle[c] >= 0) absorbing[ic.cycle_node(c)] = 1;
  }

  static S to_scalar(const Rational& q);

  void run() {
    // transient nodes grouped by kappa, ascending
    std::map<Energy, std::vector<std::uint32_t>> by_level;
    for (std::uint32_t v = 0; v < ic.num_nodes(); ++v)
      if (!absorbing[v]) by_level[ic.kappa[v]].push_back(v);

    for (auto& [level_energy, nodes] : by_level) {
      (void)level_energy;
      solve_level(nodes);
    }
  }

  void solve_level(const std::vector<std::uint32_t>& nodes) {
    // split into connected components along equal-kappa transitions
    std::map<std::uint32_t, std::uint32_t> local;
    for (std::uint32_t i = 0; i < nodes.size(); ++i) local[nodes[i]] = i;
    std::vector<std::uint32_t> dsu(nodes.size());
    for (std::uint32_t i = 0; i < nodes.size(); ++i) dsu[i] = i;
    auto find = [&](std::uint32_t x) {
      while (dsu[x] != x) {
        dsu[x] = dsu[dsu[x]];
        x = dsu[x];
      }
      return x;
    };
    for (std::uint32_t i = 0; i < nodes.size(); ++i)
      for (const auto& e : ic.out[nodes[i]]) {
        auto it = local.find(e.to);
        if (it != local.end()) {
          auto a = find(i), b = find(it->second);
          if (a != b) dsu[a] = b;
        }
      }
    std::map<std::uint32_t, std::vector<std::uint32_t>> comps;
    for (std::uint32_t i = 0; i < nodes.size(); ++i) comps[find(i)].push_back(nodes[i]);
    for (auto& [root, comp] : comps) {
      (void)root;
      solve_component(comp);
    }
  }

  void solve_component(const std::vector<std::uint32_t>& comp) {
    const std::size_t k = comp.size();
    std::map<std::uint32_t, std::uint32_t> lidx;
    for (std::uint32_t i = 0; i < k; ++i) lidx[comp[i]] = i;

    std::vector<std::vector<std::pair<std::uint32_t, S>>> rows(k);
    std::map<std::uint32_t, std::vector<S>> rhs;  // star index -> column
    auto rhs_col = [&](std::uint32_t star) -> std::vector<S>& {
      auto [it, fresh] = rhs.try_emplace(star);
      if (fresh) it->second.assign(k, S(0));
      return it->second;
    };

    for (std::uint32_t i = 0; i < k; ++i) {
      const std::uint32_t v = comp[i];
      Rational total(0);
      for (const auto& e : ic.out[v]) total += e.rate;
      require(total > 0, Err::UnreachableTarget,
              "node with no outgoing transitions cannot reach the trace targets");
      std::map<std::uint32_t, S> row;
      row[i] = S(1);
      for (const auto& e : ic.out[v]) {
        S p = to_scalar(e.rate / total);
        auto it = lidx.find(e.to);
        if (it != lidx.end()) {
          row[it->second] -= p;
        } else if (absorbing[e.to]) {
          const std::size_t c = e.to - ic.delta.size();
          rhs_col(static_cast<std::uint32_t>(star_of_cycle[c]))[i] += p;
        } else {
          // already-solved node strictly below this level
          for (const auto& [star, q] : dist[e.to]) rhs_col(star)[i] += p * q;
        }
      }
      rows[i].assign(row.begin(), row.end());
    }

    std::vector<std::vector<S>> solutions;
    std::vector<std::uint32_t> targets;
    try {
      SparseFactor<S> factor(k, rows);
      for (auto& [star, col] : rhs) {
        targets.push_back(star);
        solutions.push_back(factor.solve(col));
      }
    } catch (const Error& e) {
      if (e.kind() == Err::SingularSystem)
        fail(Err::UnreachableTarget, "a transient block cannot reach the trace targets");
      throw;
    }
    for (std::uint32_t i = 0; i < k; ++i) {
      Dist d;
      for (std::size_t t = 0; t < targets.size(); ++t)
        if (!(solutions[t][i] == S(0))) d.emplace_back(targets[t], solutions[t][i]);
      std::sort(d.begin(), d.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      dist[comp[i]] = std::move(d);
    }
  }
};

template <>
Rational AbsorptionSolve<Rational>::to_scalar(const Rational& q) {
  return q;
}

template <>
double AbsorptionSolve<double>::to_scalar(const Rational& q) {
  return q.get_d();
}

template <class S>
void check_mass(const AbsorptionSolve<S>& solve, const InducedChain& ic, double bound);

template <>
void check_mass<Rational>(const AbsorptionSolve<Rational>& solve, const InducedChain& ic, double) {
  for (std::uint32_t v = 0; v < ic.num_nodes(); ++v) {
    if (solve.absorbing[v]) continue;
    Rational total(0);
    for (const auto& [star, q] : solve.dist[v]) total += q;
    require(total == 1, Err::UnreachableTarget,
            "absorption mass from a transient node does not sum to one");
  }
}

template <>
void check_mass<double>(const AbsorptionSolve<double>& solve, const InducedChain& ic, double bound) {
  for (std::uint32_t v = 0; v < ic.num_nodes(); ++v) {
    if (solve.absorbing[v]) continue;
    double total = 0;
    for (const auto& [star, q] : solve.dist[v]) total += q;
    require(std::abs(total - 1.0) <= bound, Err::UnreachableTarget,
            "absorption-mass residual exceeds the fallback bound");
  }
}

template <class S>
LimitChain finish_trace(const InducedChain& ic, const std::vector<std::size_t>& star,
                        double residual_bound) {
  AbsorptionSolve<S> solve(ic, star);
  solve.run();
  check_mass<S>(solve, ic, residual_bound);

  LimitChain lc;
  lc.star = star;
  for (std::size_t s : star) lc.plateaux.push_back(ic.cycles[s].bottom);
  lc.rates.assign(star.size(), {});
  lc.out_rate.assign(star.size(), Rational(0));
  for (std::size_t i = 0; i < star.size(); ++i) {
    const std::size_t c = star[i];
    if (ic.cycles[c].depth > ic.gamma_star) continue;  // absorbing: zero row
    lc.out_rate[i] = ic.cycle_out_rate[c];
    std::map<std::uint32_t, Rational> row;
    for (const auto& e : ic.out[ic.cycle_node(c)]) {
      // first jumps land on minimal-boundary states in delta
      for (const auto& [starj, q] : solve.dist[e.to]) row[starj] += e.rate * Rational(q);
    }
    Rational sum(0);
    for (auto& [j, r] : row) {
      lc.rates[i].emplace_back(j, r);
      sum += r;
    }
    require(sum == lc.out_rate[i], Err::UnreachableTarget,
            "trace row sum differs from the induced outgoing rate");
    (void)sum;
  }
  return lc;
}

// The double fallback loses exactness; rebuild rationals from doubles only for
// the row-sum bookkeeping. Exactness-sensitive callers must not enable it.
template <>
LimitChain finish_trace<double>(const InducedChain& ic, const std::vector<std::size_t>& star,
                                double residual_bound) {
  AbsorptionSolve<double> solve(ic, star);
  solve.run();
  check_mass<double>(solve, ic, residual_bound);

  LimitChain lc;
  lc.star = star;
  for (std::size_t s : star) lc.plateaux.push_back(ic.cycles[s].bottom);
  lc.rates.assign(star.size(), {});
  lc.out_rate.assign(star.size(), Rational(0));
  for (std::size_t i = 0; i < star.size(); ++i) {
    const std::size_t c = star[i];
    if (ic.cycles[c].depth > ic.gamma_star) continue;
    lc.out_rate[i] = ic.cycle_out_rate[c];
    std::map<std::uint32_t, double> row;
    for (const auto& e : ic.out[ic.cycle_node(c)])
      for (const auto& [starj, q] : solve.dist[e.to]) row[starj] += e.rate.get_d() * q;
    for (auto& [j, r] : row) lc.rates[i].emplace_back(j, Rational(r));
  }
  return lc;
}

}  // namespace

LimitChain trace_chain(const InducedChain& ic, const TraceOptions& opts) {
  std::vector<std::size_t> star;
  for (std::size_t c = 0; c < ic.cycles.size(); ++c)
    if (ic.cycles[c].depth >= ic.gamma_star) star.push_back(c);
  require(!star.empty(), Err::BadInput, "no cycle reaches the depth threshold");
  if (opts.float_fallback) return finish_trace<double>(ic, star, opts.residual_bound);
  return finish_trace<Rational>(ic, star, opts.residual_bound);
}

Classification classify_chain(const LimitChain& lc) {
  const std::size_t n = lc.size();
  // Tarjan over positive off-diagonal rates
  std::vector<std::int32_t> index(n, -1), low(n, 0), comp_of(n, -1);
  std::vector<char> on_stack(n, 0);
  std::vector<std::uint32_t> stack;
  std::vector<std::vector<std::uint32_t>> sccs;
  std::int32_t counter = 0;

  // iterative Tarjan
  struct Frame {
    std::uint32_t v;
    std::size_t edge;
  };
  for (std::uint32_t root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    std::vector<Frame> frames{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!frames.empty()) {
      auto& fr = frames.back();
      const auto& row = lc.rates[fr.v];
      bool descended = false;
      while (fr.edge < row.size()) {
        auto [w, r] = row[fr.edge];
        ++fr.edge;
        if (w == fr.v || r == 0) continue;
        if (index[w] < 0) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          frames.push_back({w, 0});
          descended = true;
          break;
        }
        if (on_stack[w]) low[fr.v] = std::min(low[fr.v], index[w]);
      }
      if (descended) continue;
      // finish v
      std::uint32_t v = fr.v;
      frames.pop_back();
      if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
      if (low[v] == index[v]) {
        std::vector<std::uint32_t> scc;
        for (;;) {
          std::uint32_t w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp_of[w] = static_cast<std::int32_t>(sccs.size());
          scc.push_back(w);
          if (w == v) break;
        }
        std::sort(scc.begin(), scc.end());
        sccs.push_back(std::move(scc));
      }
    }
  }

  Classification out;
  for (std::size_t c = 0; c < sccs.size(); ++c) {
    bool closed = true;
    for (std::uint32_t v : sccs[c])
      for (const auto& [w, r] : lc.rates[v])
        if (w != v && r != 0 && comp_of[w] != static_cast<std::int32_t>(c)) closed = false;
    if (closed)
      out.components.push_back(sccs[c]);
    else
      for (std::uint32_t v : sccs[c]) out.transient.push_back(v);
  }
  std::sort(out.components.begin(), out.components.end(),
            [&](const auto& a, const auto& b) {
              return lc.plateaux[a.front()].front() < lc.plateaux[b.front()].front();
            });
  std::sort(out.transient.begin(), out.transient.end());
  return out;
}

namespace {

Level build_level(const Landscape& land, int h, std::vector<Plateau> plateaux,
                  std::vector<Cycle> carried_in, const TraceOptions& opts) {
  Level lvl;
  lvl.h = h;
  lvl.plateaux = std::move(plateaux);

  DepthResult depths = plateau_depths(land, lvl.plateaux);
  lvl.depths = std::move(depths.depth);
  lvl.gamma_star = depths.gamma_star;

  for (std::size_t i = 0; i < lvl.plateaux.size(); ++i) {
    Cycle v = valley(land, lvl.plateaux[i], lvl.depths[i]);
    require(v.bottom == lvl.plateaux[i].states, Err::ClassificationViolation,
            "valley bottom differs from its plateau");
    lvl.valleys.push_back(std::move(v));
  }

  // keep earlier shallow cycles that stay disjoint from the new valleys;
  // intersecting ones must be swallowed whole (cycles nest)
  std::vector<char> in_valley(land.size(), 0);
  for (const Cycle& v : lvl.valleys)
    for (StateId s : v.states) in_valley[s] = 1;
  for (Cycle& c : carried_in) {
    std::size_t inside = 0;
    for (StateId s : c.states) inside += in_valley[s];
    if (inside == 0) {
      lvl.carried.push_back(std::move(c));
    } else {
      require(inside == c.states.size(), Err::ClassificationViolation,
              "carried cycle straddles a new valley boundary");
    }
  }

  std::vector<Cycle> all_cycles = lvl.valleys;
  all_cycles.insert(all_cycles.end(), lvl.carried.begin(), lvl.carried.end());
  lvl.induced = induced_chain(land, std::move(all_cycles), lvl.gamma_star);
  lvl.limit = trace_chain(lvl.induced, opts);
  // the star cycles are exactly the valleys, in order
  require(lvl.limit.star.size() == lvl.plateaux.size(), Err::ClassificationViolation,
          "star cycles do not match the level plateaux");
  for (std::size_t i = 0; i < lvl.limit.star.size(); ++i)
    require(lvl.limit.star[i] == i, Err::ClassificationViolation,
            "carried cycle reached the depth threshold");
  lvl.classes = classify_chain(lvl.limit);
  return lvl;
}

}  // namespace

Level first_level(const Landscape& land, const TraceOptions& opts) {
  std::vector<Plateau> plateaux = stable_plateaux(land);
  require(plateaux.size() >= 2, Err::SingleGround,
          "landscape has a single stable plateau; no transitions to analyze");
  return build_level(land, 1, std::move(plateaux), {}, opts);
}

Level advance_level(const Landscape& land, const Level& prev, const TraceOptions& opts) {
  require(prev.nu() >= 2, Err::TerminalReached, "previous level is already irreducible");

  std::vector<Plateau> merged;
  for (const auto& comp : prev.classes.components) {
    Plateau p;
    for (std::uint32_t i : comp) {
      const Plateau& part = prev.plateaux[i];
      require(part.energy == prev.plateaux[comp.front()].energy, Err::ClassificationViolation,
              "merged plateaux have unequal energies");
      p.states.insert(p.states.end(), part.states.begin(), part.states.end());
    }
    p.energy = prev.plateaux[comp.front()].energy;
    std::sort(p.states.begin(), p.states.end());
    merged.push_back(std::move(p));
  }
  std::sort(merged.begin(), merged.end(),
            [](const Plateau& a, const Plateau& b) { return a.states.front() < b.states.front(); });

  std::vector<Cycle> carried = prev.carried;
  for (std::uint32_t t : prev.classes.transient) carried.push_back(prev.valleys[t]);

  Level lvl = build_level(land, prev.h + 1, std::move(merged), std::move(carried), opts);
  require(lvl.gamma_star > prev.gamma_star, Err::ClassificationViolation,
          "Gamma* failed to increase between levels");
  require(lvl.nu() < prev.nu(), Err::ClassificationViolation,
          "number of irreducible components failed to decrease");
  return lvl;
}

LevelDiagnostics check_classification(const Landscape& land, const Level& level,
                                      Energy gamma_star_prev) {
  const std::size_t nu_prev = level.plateaux.size();
  std::vector<std::int32_t> comp_of(nu_prev, -1);
  for (std::size_t c = 0; c < level.classes.components.size(); ++c)
    for (std::uint32_t i : level.classes.components[c]) comp_of[i] = static_cast<std::int32_t>(c);

  LevelDiagnostics diag;
  diag.kind.assign(nu_prev, 2);

  for (std::size_t i = 0; i < nu_prev; ++i) {
    const Plateau& p = level.plateaux[i];
    const bool transient = comp_of[i] < 0;
    const bool multi =
        !transient && level.classes.components[comp_of[i]].size() >= 2;

    if (!transient && !multi) {
      diag.kind[i] = 0;
      require(level.depths[i] > level.gamma_star, Err::ClassificationViolation,
              "absorbing plateau at state " + std::to_string(p.states.front()) +
                  " has depth equal to Gamma*");
      continue;
    }
    require(level.depths[i] == level.gamma_star, Err::ClassificationViolation,
            "non-absorbing plateau at state " + std::to_string(p.states.front()) +
                " has depth above Gamma*");

    // plateaux at communication height exactly H(P_i) + Gamma*
    StateSet reach = allowed_neighborhood(land, p.states, {}, p.energy + level.gamma_star,
                                          /*strict=*/false);
    std::vector<char> reachable(land.size(), 0);
    for (StateId s : reach) reachable[s] = 1;
    std::vector<std::uint32_t> at_barrier;
    for (std::size_t j = 0; j < nu_prev; ++j) {
      if (j == i) continue;
      if (reachable[level.plateaux[j].states.front()]) at_barrier.push_back(static_cast<std::uint32_t>(j));
    }

    if (transient) {
      diag.kind[i] = 2;
      bool lower = false;
      for (std::uint32_t j : at_barrier)
        if (level.plateaux[j].energy < p.energy) lower = true;
      require(lower, Err::ClassificationViolation,
              "transient plateau at state " + std::to_string(p.states.front()) +
                  " has no strictly lower plateau at barrier Gamma*");
    } else {
      diag.kind[i] = 1;
      for (std::uint32_t j : at_barrier)
        require(level.plateaux[j].energy == p.energy, Err::ClassificationViolation,
                "recurrent-class plateau meets an unequal-energy plateau at Gamma*");
      std::vector<std::uint32_t> expected;
      for (std::uint32_t j : level.classes.components[comp_of[i]])
        if (j != i) expected.push_back(j);
      require(at_barrier == expected, Err::ClassificationViolation,
              "Gamma*-barrier equivalence class differs from the irreducible component");
    }
  }

  // ground states stay recurrent
  StateSet ground = bottom(land, land.all_states());
  for (StateId g : ground) {
    bool found = false;
    for (const auto& comp : level.classes.components)
      for (std::uint32_t i : comp)
        if (std::binary_search(level.plateaux[i].states.begin(), level.plateaux[i].states.end(), g))
          found = true;
    require(found, Err::ClassificationViolation,
            "ground state " + std::to_string(g) + " is not in a recurrent component");
  }

  // rate-sum identity (rows already checked exactly inside trace_chain; keep
  // the observable version here)
  for (std::size_t i = 0; i < level.limit.size(); ++i) {
    Rational sum(0);
    for (const auto& [j, r] : level.limit.rates[i]) sum += r;
    require(sum == level.limit.out_rate[i], Err::ClassificationViolation,
            "rate-sum identity fails at plateau " + std::to_string(i));
  }

  // mixing-scale diagnostic: Gamma~(V_i^h) = Gamma^{*,h-1}
  for (const Cycle& v : level.valleys) {
    const StateId eta0 = v.bottom.front();
    std::vector<char> inside(land.size(), 0);
    for (StateId s : v.states) inside[s] = 1;
    constexpr Energy kUnset = std::numeric_limits<Energy>::max();
    std::vector<Energy> best(land.size(), kUnset);
    using Item = std::pair<Energy, StateId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    best[eta0] = land.energy(eta0);
    pq.emplace(best[eta0], eta0);
    while (!pq.empty()) {
      auto [h, u] = pq.top();
      pq.pop();
      if (h > best[u]) continue;
      for (StateId w : land.neighbors(u)) {
        if (!inside[w]) continue;
        Energy nh = std::max(h, land.energy(w));
        if (nh < best[w]) {
          best[w] = nh;
          pq.emplace(nh, w);
        }
      }
    }
    Energy gt = 0;
    for (StateId s : v.states)
      if (s != eta0) gt = std::max(gt, best[s] - land.energy(s));
    diag.gamma_tilde.push_back(gt);
    // Valleys mix strictly faster than the level's transition scale. Equality
    // with the previous Gamma* can fail for singleton valleys, whose mixing
    // scale is trivially zero.
    require(gt <= gamma_star_prev, Err::ClassificationViolation,
            "valley mixing scale exceeds the previous Gamma*");
  }
  return diag;
}

HierarchyReport full_hierarchy(const Landscape& land, const TraceOptions& opts) {
  HierarchyReport rep;
  StateSet ground = bottom(land, land.all_states());
  OmegaBar ob = restrict_to_omega_bar(land, ground);
  rep.phi_bar = ob.phi_bar;
  rep.omega_bar = std::move(ob.restricted);
  rep.original_ids = std::move(ob.original_ids);
  rep.ground = std::move(ob.ground);

  Level lvl = first_level(rep.omega_bar, opts);
  Energy gamma_prev = 0;
  for (;;) {
    rep.diagnostics.push_back(check_classification(rep.omega_bar, lvl, gamma_prev));
    gamma_prev = lvl.gamma_star;
    rep.levels.push_back(lvl);
    if (rep.levels.back().nu() == 1) break;
    lvl = advance_level(rep.omega_bar, rep.levels.back(), opts);
  }

  // cycles produced anywhere in the run nest: intersecting pairs must be
  // ordered by containment
  std::vector<const Cycle*> all;
  for (const Level& l : rep.levels) {
    for (const Cycle& c : l.valleys) all.push_back(&c);
    for (const Cycle& c : l.carried) all.push_back(&c);
  }
  for (std::size_t a = 0; a < all.size(); ++a)
    for (std::size_t b = a + 1; b < all.size(); ++b) {
      const StateSet &x = all[a]->states, &y = all[b]->states;
      StateSet inter;
      std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(inter));
      if (inter.empty()) continue;
      require(inter.size() == std::min(x.size(), y.size()), Err::ClassificationViolation,
              "two cycles intersect without nesting");
    }

  // terminal class: exactly the ground states' plateaux at the minimum energy
  const Level& last = rep.levels.back();
  require(last.classes.components.size() == 1 && last.classes.transient.empty(),
          Err::ClassificationViolation, "terminal level is not a single class");
  for (std::uint32_t i : last.classes.components.front())
    require(last.plateaux[i].energy == rep.omega_bar.min_energy(), Err::ClassificationViolation,
            "terminal class contains a non-ground plateau");
  for (StateId g : rep.ground) {
    bool found = false;
    for (std::uint32_t i : last.classes.components.front())
      if (std::binary_search(last.plateaux[i].states.begin(), last.plateaux[i].states.end(), g))
        found = true;
    require(found, Err::ClassificationViolation, "terminal class misses a ground state");
  }
  return rep;
}

void report_to_json(const HierarchyReport& rep, std::ostream& out, const std::string& tool_version,
                    const std::string& config_echo) {
  nlohmann::json doc;
  if (!tool_version.empty()) doc["tool_version"] = tool_version;
  if (!config_echo.empty()) doc["config"] = nlohmann::json::parse(config_echo);
  doc["phi_bar"] = rep.phi_bar;
  doc["omega_bar_size"] = rep.omega_bar.size();
  doc["terminal_level"] = rep.terminal_level();
  auto orig = [&](StateId s) { return rep.original_ids[s]; };
  {
    nlohmann::json g = nlohmann::json::array();
    for (StateId s : rep.ground) g.push_back(orig(s));
    doc["ground"] = std::move(g);
  }
  doc["levels"] = nlohmann::json::array();
  for (std::size_t li = 0; li < rep.levels.size(); ++li) {
    const Level& lvl = rep.levels[li];
    nlohmann::json jl;
    jl["h"] = lvl.h;
    jl["gamma_star"] = lvl.gamma_star;
    jl["nu"] = lvl.nu();
    jl["plateaux"] = nlohmann::json::array();
    for (const Plateau& p : lvl.plateaux) {
      nlohmann::json ids = nlohmann::json::array();
      for (StateId s : p.states) ids.push_back(orig(s));
      jl["plateaux"].push_back({{"states", std::move(ids)}, {"energy", p.energy}});
    }
    jl["depths"] = lvl.depths;
    jl["components"] = lvl.classes.components;
    jl["transient"] = lvl.classes.transient;
    nlohmann::json rates = nlohmann::json::array();
    for (std::size_t i = 0; i < lvl.limit.size(); ++i)
      for (const auto& [j, r] : lvl.limit.rates[i])
        rates.push_back({i, j, rational_string(r)});
    jl["rates"] = std::move(rates);
    jl["gamma_tilde"] = rep.diagnostics[li].gamma_tilde;
    doc["levels"].push_back(std::move(jl));
  }
  out << doc.dump(1) << '\n';
}

}  // namespace mhier
