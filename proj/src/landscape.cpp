#include "mhier/landscape.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>

#include "json.hpp"

namespace mhier {

const char* err_name(Err kind) {
  switch (kind) {
    case Err::EmptyInput: return "EmptyInput";
    case Err::BadInput: return "BadInput";
    case Err::SelfLoop: return "SelfLoop";
    case Err::DisconnectedGraph: return "DisconnectedGraph";
    case Err::EmptySet: return "EmptySet";
    case Err::FullSet: return "FullSet";
    case Err::Overlap: return "Overlap";
    case Err::GroundMismatch: return "GroundMismatch";
    case Err::SingleGround: return "SingleGround";
    case Err::CapExcludesSource: return "CapExcludesSource";
    case Err::NotConnected: return "NotConnected";
    case Err::NotACycle: return "NotACycle";
    case Err::OverlappingCycles: return "OverlappingCycles";
    case Err::InvalidCycleCollection: return "InvalidCycleCollection";
    case Err::UnreachableTarget: return "UnreachableTarget";
    case Err::TerminalReached: return "TerminalReached";
    case Err::ClassificationViolation: return "ClassificationViolation";
    case Err::WrongParticleCount: return "WrongParticleCount";
    case Err::IndexOutOfRange: return "IndexOutOfRange";
    case Err::CapExceeded: return "CapExceeded";
    case Err::SingularSystem: return "SingularSystem";
  }
  return "Unknown";
}

bool is_canonical_set(const StateSet& s) {
  return std::is_sorted(s.begin(), s.end()) && std::adjacent_find(s.begin(), s.end()) == s.end();
}

StateSet canonicalize(StateSet s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

Landscape Landscape::build(std::vector<std::pair<std::string, Energy>> states,
                           const std::vector<std::pair<StateId, StateId>>& edges,
                           std::vector<BuildWarning>* warnings, std::size_t state_cap) {
  require(!states.empty(), Err::EmptyInput, "landscape needs at least one state");
  require(states.size() <= state_cap, Err::CapExceeded,
          "state count " + std::to_string(states.size()) + " exceeds cap " + std::to_string(state_cap));

  const std::size_t n = states.size();
  std::vector<std::pair<StateId, StateId>> normalized;
  normalized.reserve(edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k) {
    auto [i, j] = edges[k];
    require(i < n && j < n, Err::BadInput,
            "edges[" + std::to_string(k) + "] endpoint out of range");
    require(i != j, Err::SelfLoop, "edges[" + std::to_string(k) + "] is a self-loop on state " + std::to_string(i));
    if (i > j) std::swap(i, j);
    normalized.emplace_back(i, j);
  }
  std::sort(normalized.begin(), normalized.end());
  auto last = std::unique(normalized.begin(), normalized.end());
  if (last != normalized.end()) {
    if (warnings) {
      warnings->push_back({"deduplicated " + std::to_string(normalized.end() - last) +
                           " duplicate edge(s); multiplicity carries no meaning here"});
    }
    normalized.erase(last, normalized.end());
  }

  Landscape land;
  land.energies_.reserve(n);
  land.labels_.reserve(n);
  for (auto& [label, e] : states) {
    land.labels_.push_back(std::move(label));
    land.energies_.push_back(e);
  }

  std::vector<std::size_t> degree(n, 0);
  for (auto [i, j] : normalized) {
    ++degree[i];
    ++degree[j];
  }
  land.offsets_.assign(n + 1, 0);
  for (std::size_t s = 0; s < n; ++s) land.offsets_[s + 1] = land.offsets_[s] + degree[s];
  land.neighbors_.resize(2 * normalized.size());
  std::vector<std::size_t> cursor(land.offsets_.begin(), land.offsets_.end() - 1);
  for (auto [i, j] : normalized) {
    land.neighbors_[cursor[i]++] = j;
    land.neighbors_[cursor[j]++] = i;
  }
  for (std::size_t s = 0; s < n; ++s)
    std::sort(land.neighbors_.begin() + land.offsets_[s], land.neighbors_.begin() + land.offsets_[s + 1]);

  // connectivity
  std::vector<char> seen(n, 0);
  std::queue<StateId> q;
  q.push(0);
  seen[0] = 1;
  std::size_t reached = 1;
  while (!q.empty()) {
    StateId u = q.front();
    q.pop();
    for (StateId v : land.neighbors(u)) {
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        q.push(v);
      }
    }
  }
  require(reached == n, Err::DisconnectedGraph,
          "graph has " + std::to_string(n - reached) + " state(s) unreachable from state 0");

  auto [mn, mx] = std::minmax_element(land.energies_.begin(), land.energies_.end());
  land.min_energy_ = *mn;
  land.max_energy_ = *mx;
  return land;
}

bool Landscape::adjacent(StateId a, StateId b) const {
  auto nb = neighbors(a);
  return std::binary_search(nb.begin(), nb.end(), b);
}

StateSet Landscape::all_states() const {
  StateSet s(size());
  for (std::size_t i = 0; i < size(); ++i) s[i] = static_cast<StateId>(i);
  return s;
}

namespace {

// Translate a byte offset from the JSON parser into line/column for error
// messages on hand-edited files.
std::string line_of_offset(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

Landscape Landscape::load_json(std::istream& in, std::vector<BuildWarning>* warnings) {
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(Err::BadInput, std::string("JSON parse error at ") + line_of_offset(text, e.byte) + ": " + e.what());
  }

  require(doc.is_object() && doc.contains("states") && doc.contains("edges"), Err::BadInput,
          "landscape JSON must be an object with \"states\" and \"edges\"");
  require(doc["states"].is_array(), Err::BadInput, "\"states\" must be an array");
  require(doc["edges"].is_array(), Err::BadInput, "\"edges\" must be an array");

  std::vector<std::pair<std::string, Energy>> states;
  states.reserve(doc["states"].size());
  std::size_t idx = 0;
  for (const auto& st : doc["states"]) {
    require(st.is_object() && st.contains("energy") && st["energy"].is_number_integer(), Err::BadInput,
            "states[" + std::to_string(idx) + "] needs an integer \"energy\"");
    std::string label = st.value("label", std::string{});
    states.emplace_back(std::move(label), st["energy"].get<Energy>());
    ++idx;
  }

  std::vector<std::pair<StateId, StateId>> edges;
  edges.reserve(doc["edges"].size());
  idx = 0;
  for (const auto& ed : doc["edges"]) {
    require(ed.is_array() && ed.size() == 2 && ed[0].is_number_integer() && ed[1].is_number_integer(),
            Err::BadInput, "edges[" + std::to_string(idx) + "] must be a pair [i,j]");
    auto i = ed[0].get<std::int64_t>();
    auto j = ed[1].get<std::int64_t>();
    require(i >= 0 && j >= 0, Err::BadInput, "edges[" + std::to_string(idx) + "] has a negative endpoint");
    edges.emplace_back(static_cast<StateId>(i), static_cast<StateId>(j));
    ++idx;
  }
  return build(std::move(states), edges, warnings);
}

Landscape Landscape::load_json_file(const std::string& path, std::vector<BuildWarning>* warnings) {
  std::ifstream in(path);
  require(in.good(), Err::BadInput, "cannot open " + path);
  return load_json(in, warnings);
}

void Landscape::save_json(std::ostream& out) const {
  nlohmann::json doc;
  doc["states"] = nlohmann::json::array();
  for (std::size_t s = 0; s < size(); ++s)
    doc["states"].push_back({{"label", labels_[s]}, {"energy", energies_[s]}});
  doc["edges"] = nlohmann::json::array();
  for (std::size_t s = 0; s < size(); ++s)
    for (StateId t : neighbors(static_cast<StateId>(s)))
      if (t > s) doc["edges"].push_back({s, t});
  out << doc.dump(1) << '\n';
}

void Landscape::save_json_file(const std::string& path) const {
  std::ofstream out(path);
  require(out.good(), Err::BadInput, "cannot open " + path + " for writing");
  save_json(out);
}

StateSet bottom(const Landscape& land, const StateSet& a) {
  require(!a.empty(), Err::EmptySet, "bottom of an empty set");
  Energy best = land.energy(a.front());
  for (StateId s : a) best = std::min(best, land.energy(s));
  StateSet out;
  for (StateId s : a)
    if (land.energy(s) == best) out.push_back(s);
  return out;
}

BoundarySets boundary_sets(const Landscape& land, const StateSet& a) {
  require(!a.empty(), Err::EmptySet, "boundary of an empty set");
  require(a.size() < land.size(), Err::FullSet, "boundary of the full state space is undefined");
  std::vector<char> in_a(land.size(), 0);
  for (StateId s : a) in_a[s] = 1;
  std::vector<char> marked(land.size(), 0);
  StateSet boundary;
  for (StateId s : a)
    for (StateId t : land.neighbors(s))
      if (!in_a[t] && !marked[t]) {
        marked[t] = 1;
        boundary.push_back(t);
      }
  std::sort(boundary.begin(), boundary.end());
  BoundarySets out;
  out.min_boundary = boundary.empty() ? StateSet{} : bottom(land, boundary);
  out.boundary = std::move(boundary);
  return out;
}

Energy comm_height(const Landscape& land, const StateSet& a, const StateSet& b) {
  require(!a.empty() && !b.empty(), Err::EmptySet, "communication height of an empty set");
  std::vector<char> in_b(land.size(), 0);
  for (StateId s : b) in_b[s] = 1;
  for (StateId s : a)
    require(!in_b[s], Err::Overlap, "sets overlap at state " + std::to_string(s));

  // minimax Dijkstra: settle states in increasing order of the best path height
  constexpr Energy kUnset = std::numeric_limits<Energy>::max();
  std::vector<Energy> best(land.size(), kUnset);
  using Item = std::pair<Energy, StateId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  for (StateId s : a) {
    best[s] = land.energy(s);
    pq.emplace(best[s], s);
  }
  while (!pq.empty()) {
    auto [h, u] = pq.top();
    pq.pop();
    if (h > best[u]) continue;
    if (in_b[u]) return h;
    for (StateId v : land.neighbors(u)) {
      Energy nh = std::max(h, land.energy(v));
      if (nh < best[v]) {
        best[v] = nh;
        pq.emplace(nh, v);
      }
    }
  }
  fail(Err::DisconnectedGraph, "no path between the given sets");  // unreachable on valid landscapes
}

MergeTree::MergeTree(const Landscape& land) {
  n_ = land.size();
  const std::size_t max_nodes = 2 * n_ - 1;
  parent_.assign(max_nodes, -1);
  node_height_.assign(max_nodes, 0);
  for (std::size_t s = 0; s < n_; ++s) node_height_[s] = land.energy(static_cast<StateId>(s));

  std::vector<StateId> order(n_);
  for (std::size_t s = 0; s < n_; ++s) order[s] = static_cast<StateId>(s);
  std::sort(order.begin(), order.end(), [&](StateId x, StateId y) {
    return std::make_pair(land.energy(x), x) < std::make_pair(land.energy(y), y);
  });

  // DSU over states; each class points at its current node in the forest.
  std::vector<StateId> dsu(n_);
  std::vector<std::int32_t> class_node(n_);
  for (std::size_t s = 0; s < n_; ++s) {
    dsu[s] = static_cast<StateId>(s);
    class_node[s] = static_cast<std::int32_t>(s);
  }
  auto find = [&](StateId x) {
    while (dsu[x] != x) {
      dsu[x] = dsu[dsu[x]];
      x = dsu[x];
    }
    return x;
  };

  std::vector<char> active(n_, 0);
  std::int32_t next_node = static_cast<std::int32_t>(n_);
  for (StateId s : order) {
    active[s] = 1;
    const Energy e = land.energy(s);
    for (StateId t : land.neighbors(s)) {
      if (!active[t]) continue;
      StateId rs = find(s), rt = find(t);
      if (rs == rt) continue;
      // merge at the energy of the later-activated endpoint
      std::int32_t node = next_node++;
      node_height_[node] = e;
      parent_[class_node[rs]] = node;
      parent_[class_node[rt]] = node;
      dsu[rt] = rs;
      class_node[rs] = node;
    }
  }

  depth_.assign(max_nodes, 0);
  // roots first, then children; nodes were created bottom-up so a reverse pass works
  for (std::int32_t v = static_cast<std::int32_t>(max_nodes) - 1; v >= 0; --v)
    if (parent_[v] >= 0) depth_[v] = depth_[parent_[v]] + 1;
}

Energy MergeTree::height(StateId a, StateId b) const {
  if (a == b) return node_height_[a];
  // walk the deeper side up until the two meet
  std::int32_t x = static_cast<std::int32_t>(a), y = static_cast<std::int32_t>(b);
  while (x != y) {
    if (depth_[x] >= depth_[y]) {
      require(parent_[x] >= 0, Err::DisconnectedGraph, "states never merge");
      x = parent_[x];
    } else {
      require(parent_[y] >= 0, Err::DisconnectedGraph, "states never merge");
      y = parent_[y];
    }
  }
  return node_height_[x];
}

OmegaBar restrict_to_omega_bar(const Landscape& land, const StateSet& ground) {
  require(is_canonical_set(ground), Err::BadInput, "ground set must be sorted and duplicate-free");
  StateSet expected = bottom(land, land.all_states());
  require(ground == expected, Err::GroundMismatch,
          "ground set is not the set of global minimizers of the landscape");

  // Ground states, partitioned into connected components at the minimum
  // energy, are exactly the ground plateaux. A single plateau means there is
  // nothing to tunnel between.
  std::vector<char> is_ground(land.size(), 0);
  for (StateId s : ground) is_ground[s] = 1;
  std::vector<std::int32_t> comp(land.size(), -1);
  std::int32_t ncomp = 0;
  for (StateId s : ground) {
    if (comp[s] >= 0) continue;
    std::queue<StateId> q;
    q.push(s);
    comp[s] = ncomp;
    while (!q.empty()) {
      StateId u = q.front();
      q.pop();
      for (StateId v : land.neighbors(u))
        if (is_ground[v] && comp[v] < 0) {
          comp[v] = ncomp;
          q.push(v);
        }
    }
    ++ncomp;
  }
  require(ncomp >= 2, Err::SingleGround,
          "all ground states form a single plateau; no tunneling structure exists");

  // Phi-bar: the energy at which all ground components join in the merge
  // sweep (equals the max over ground pairs of the communication height).
  MergeTree tree(land);
  Energy phi_bar = land.min_energy();
  for (std::size_t i = 1; i < ground.size(); ++i)
    phi_bar = std::max(phi_bar, tree.height(ground[0], ground[i]));

  StateSet member = allowed_neighborhood(land, ground, {}, phi_bar, /*strict=*/false);

  OmegaBar out;
  out.phi_bar = phi_bar;
  out.original_ids.assign(member.begin(), member.end());
  std::vector<StateId> remap(land.size(), 0);
  for (std::size_t i = 0; i < member.size(); ++i) remap[member[i]] = static_cast<StateId>(i);
  std::vector<char> keep(land.size(), 0);
  for (StateId s : member) keep[s] = 1;

  std::vector<std::pair<std::string, Energy>> states;
  states.reserve(member.size());
  for (StateId s : member) states.emplace_back(land.label(s), land.energy(s));
  std::vector<std::pair<StateId, StateId>> edges;
  for (StateId s : member)
    for (StateId t : land.neighbors(s))
      if (t > s && keep[t]) edges.emplace_back(remap[s], remap[t]);
  out.restricted = Landscape::build(std::move(states), edges);
  for (StateId g : ground) out.ground.push_back(remap[g]);
  return out;
}

StateSet allowed_neighborhood(const Landscape& land, const StateSet& a, const StateSet& forbidden,
                              Energy cap, bool strict) {
  require(!a.empty(), Err::EmptySet, "allowed neighborhood of an empty set");
  std::vector<char> blocked(land.size(), 0);
  for (StateId s : forbidden) blocked[s] = 1;
  auto ok = [&](StateId s) {
    Energy e = land.energy(s);
    return strict ? e < cap : e <= cap;
  };
  for (StateId s : a) {
    require(!blocked[s], Err::Overlap, "source state " + std::to_string(s) + " is forbidden");
    require(ok(s), Err::CapExcludesSource, "source state " + std::to_string(s) + " violates the cap");
  }
  std::vector<char> seen(land.size(), 0);
  std::queue<StateId> q;
  for (StateId s : a) {
    seen[s] = 1;
    q.push(s);
  }
  while (!q.empty()) {
    StateId u = q.front();
    q.pop();
    for (StateId v : land.neighbors(u))
      if (!seen[v] && !blocked[v] && ok(v)) {
        seen[v] = 1;
        q.push(v);
      }
  }
  StateSet out;
  for (std::size_t s = 0; s < land.size(); ++s)
    if (seen[s]) out.push_back(static_cast<StateId>(s));
  return out;
}

}  // namespace mhier
