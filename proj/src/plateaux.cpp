#include "mhier/plateaux.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <queue>

namespace mhier {

std::vector<Plateau> stable_plateaux(const Landscape& land) {
  const std::size_t n = land.size();
  std::vector<char> visited(n, 0);
  std::vector<Plateau> out;
  for (StateId s = 0; s < n; ++s) {
    if (visited[s]) continue;
    const Energy e = land.energy(s);
    // connected component of s within its energy level
    StateSet comp{s};
    visited[s] = 1;
    std::queue<StateId> q;
    q.push(s);
    bool stable = true;
    while (!q.empty()) {
      StateId u = q.front();
      q.pop();
      for (StateId v : land.neighbors(u)) {
        if (land.energy(v) == e) {
          if (!visited[v]) {
            visited[v] = 1;
            comp.push_back(v);
            q.push(v);
          }
        } else if (land.energy(v) < e) {
          stable = false;  // boundary dips below the level
        }
      }
    }
    if (stable) {
      std::sort(comp.begin(), comp.end());
      out.push_back(Plateau{std::move(comp), e});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const Plateau& a, const Plateau& b) { return a.states.front() < b.states.front(); });
  return out;
}

Cycle validate_cycle(const Landscape& land, const StateSet& c) {
  require(!c.empty(), Err::EmptySet, "cycle candidate is empty");
  require(is_canonical_set(c), Err::BadInput, "cycle candidate must be sorted and duplicate-free");
  require(c.size() < land.size(), Err::NotACycle, "the full state space has no boundary");

  std::vector<char> in_c(land.size(), 0);
  for (StateId s : c) in_c[s] = 1;
  // connectivity inside C
  std::queue<StateId> q;
  q.push(c.front());
  std::vector<char> seen(land.size(), 0);
  seen[c.front()] = 1;
  std::size_t reached = 1;
  while (!q.empty()) {
    StateId u = q.front();
    q.pop();
    for (StateId v : land.neighbors(u))
      if (in_c[v] && !seen[v]) {
        seen[v] = 1;
        ++reached;
        q.push(v);
      }
  }
  require(reached == c.size(), Err::NotConnected, "cycle candidate is not connected");

  Energy interior_max = std::numeric_limits<Energy>::min();
  Energy interior_min = std::numeric_limits<Energy>::max();
  for (StateId s : c) {
    interior_max = std::max(interior_max, land.energy(s));
    interior_min = std::min(interior_min, land.energy(s));
  }
  Energy boundary_min = std::numeric_limits<Energy>::max();
  for (StateId s : c)
    for (StateId v : land.neighbors(s))
      if (!in_c[v]) boundary_min = std::min(boundary_min, land.energy(v));
  require(boundary_min != std::numeric_limits<Energy>::max(), Err::NotACycle,
          "cycle candidate has no outer boundary");
  require(interior_max < boundary_min, Err::NotACycle,
          "interior max " + std::to_string(interior_max) + " not below boundary min " +
              std::to_string(boundary_min));

  Cycle cyc;
  cyc.states = c;
  cyc.depth = boundary_min - interior_min;
  cyc.bottom = bottom(land, c);
  return cyc;
}

Cycle valley(const Landscape& land, const Plateau& p, Energy gamma) {
  require(gamma > 0, Err::BadInput, "valley needs a positive depth");
  StateSet v = allowed_neighborhood(land, p.states, {}, p.energy + gamma, /*strict=*/true);
  Cycle cyc = validate_cycle(land, v);
  require(std::includes(cyc.bottom.begin(), cyc.bottom.end(), p.states.begin(), p.states.end()),
          Err::NotACycle, "valley bottom does not contain the plateau");
  require(cyc.depth == gamma, Err::NotACycle,
          "valley depth " + std::to_string(cyc.depth) + " differs from requested " + std::to_string(gamma));
  return cyc;
}

DepthResult plateau_depths(const Landscape& land, const std::vector<Plateau>& plateaux) {
  require(plateaux.size() >= 2, Err::SingleGround, "depths need at least two plateaux");
  const std::size_t n = land.size();

  std::vector<std::int32_t> owner(n, -1);
  for (std::size_t i = 0; i < plateaux.size(); ++i)
    for (StateId s : plateaux[i].states) {
      require(owner[s] < 0, Err::OverlappingCycles, "plateaux overlap at state " + std::to_string(s));
      owner[s] = static_cast<std::int32_t>(i);
    }

  std::vector<StateId> order(n);
  for (std::size_t s = 0; s < n; ++s) order[s] = static_cast<StateId>(s);
  std::sort(order.begin(), order.end(), [&](StateId x, StateId y) {
    return std::make_pair(land.energy(x), x) < std::make_pair(land.energy(y), y);
  });

  std::vector<StateId> dsu(n);
  for (std::size_t s = 0; s < n; ++s) dsu[s] = static_cast<StateId>(s);
  auto find = [&](StateId x) {
    while (dsu[x] != x) {
      dsu[x] = dsu[dsu[x]];
      x = dsu[x];
    }
    return x;
  };

  // Per component: -1 no plateau, -2 two or more distinct plateaux (all of
  // whose depths are already set), otherwise the single distinct plateau id
  // whose depth is pending.
  std::vector<std::int32_t> tag(n, -1);
  std::vector<Energy> depth(plateaux.size(), std::numeric_limits<Energy>::min());
  std::size_t unmet = plateaux.size();

  auto settle = [&](std::int32_t pi, Energy e) {
    if (depth[pi] == std::numeric_limits<Energy>::min()) {
      depth[pi] = e - plateaux[pi].energy;
      --unmet;
    }
  };
  auto join_tags = [&](std::int32_t ta, std::int32_t tb, Energy e) -> std::int32_t {
    if (ta == -1) return tb;
    if (tb == -1) return ta;
    if (ta == tb) return ta;  // covers -2/-2 and equal plateau ids
    if (ta >= 0) settle(ta, e);
    if (tb >= 0) settle(tb, e);
    return -2;
  };

  std::vector<char> active(n, 0);
  for (StateId s : order) {
    active[s] = 1;
    const Energy e = land.energy(s);
    if (owner[s] >= 0) {
      StateId r = find(s);
      tag[r] = join_tags(tag[r], owner[s], e);
    }
    for (StateId t : land.neighbors(s)) {
      if (!active[t]) continue;
      StateId rs = find(s), rt = find(t);
      if (rs == rt) continue;
      std::int32_t merged = join_tags(tag[rs], tag[rt], e);
      dsu[rt] = rs;
      tag[rs] = merged;
    }
    if (unmet == 0) break;
  }
  require(unmet == 0, Err::DisconnectedGraph, "some plateau never meets another");

  DepthResult out;
  out.depth = std::move(depth);
  out.gamma_star = *std::min_element(out.depth.begin(), out.depth.end());
  require(out.gamma_star > 0, Err::BadInput, "nonpositive plateau depth; input sets are not plateaux");
  return out;
}

DepthResult initial_depths(const Landscape& land, const std::vector<Plateau>& plateaux) {
  require(plateaux.size() >= 2, Err::SingleGround,
          "landscape has a single stable plateau; no transitions to analyze");
  return plateau_depths(land, plateaux);
}

}  // namespace mhier
