#include "mhier/kawasaki.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <unordered_map>

namespace mhier {

KawasakiParams KawasakiParams::make(int cols, int rows, int strip_width) {
  require(cols >= 1 && rows >= 1 && strip_width >= 1, Err::BadInput,
          "lattice dimensions must be positive");
  require(cols > rows, Err::BadInput, "the torus must be wider than tall (K > L)");
  require(4 * strip_width > rows && 2 * strip_width < cols, Err::BadInput,
          "strip width must satisfy L/4 < N0 < K/2");
  require(cols * rows <= 64, Err::CapExceeded,
          "lattices beyond 64 sites exceed the enumeration budget");
  KawasakiParams p;
  p.cols = cols;
  p.rows = rows;
  p.strip_width = strip_width;
  return p;
}

KawasakiModel::KawasakiModel(KawasakiParams params) : params_(params) {
  for (int x = 0; x < params_.cols; ++x)
    for (int y = 0; y < params_.rows; ++y) {
      bonds_.emplace_back(site(x, y), site(x + 1, y));
      bonds_.emplace_back(site(x, y), site(x, y + 1));
    }
}

int KawasakiModel::site(int x, int y) const {
  const int K = params_.cols, L = params_.rows;
  x %= K;
  if (x < 0) x += K;
  y %= L;
  if (y < 0) y += L;
  return y * K + x;  // row-major
}

bool KawasakiModel::occupied(const LatticeConfig& c, int x, int y) const {
  return (c.bits >> site(x, y)) & 1;
}

void KawasakiModel::check_config(const LatticeConfig& c) const {
  require(std::popcount(c.bits) == params_.particles(), Err::WrongParticleCount,
          "configuration has " + std::to_string(std::popcount(c.bits)) + " particles, expected " +
              std::to_string(params_.particles()));
  if (params_.sites() < 64)
    require((c.bits >> params_.sites()) == 0, Err::BadInput, "bits set beyond the lattice");
}

Energy KawasakiModel::hamiltonian(const LatticeConfig& c) const {
  check_config(c);
  Energy h = 0;
  for (auto [a, b] : bonds_)
    if (((c.bits >> a) & 1) && ((c.bits >> b) & 1)) --h;
  return h;
}

int KawasakiModel::interface_count(const LatticeConfig& c) const {
  check_config(c);
  int count = 0;
  for (auto [a, b] : bonds_)
    if (((c.bits >> a) & 1) != ((c.bits >> b) & 1)) ++count;
  return count;
}

std::vector<LatticeConfig> KawasakiModel::neighbors(const LatticeConfig& c) const {
  check_config(c);
  std::vector<LatticeConfig> out;
  out.reserve(bonds_.size() / 2);
  for (auto [a, b] : bonds_)
    if (((c.bits >> a) & 1) != ((c.bits >> b) & 1))
      out.push_back({c.bits ^ (1ull << a) ^ (1ull << b)});
  std::sort(out.begin(), out.end());
  return out;
}

LatticeConfig KawasakiModel::ground_state(int k) const {
  require(k >= 0 && k < params_.cols, Err::IndexOutOfRange,
          "column index " + std::to_string(k) + " outside the torus");
  LatticeConfig c;
  for (int dx = 0; dx < params_.strip_width; ++dx)
    for (int y = 0; y < params_.rows; ++y) c.bits |= 1ull << site(k + dx, y);
  return c;
}

LatticeConfig KawasakiModel::shallow_bottom(int k, int m, int l, int lp) const {
  const int L = params_.rows;
  require(k >= 0 && k < params_.cols, Err::IndexOutOfRange,
          "column index " + std::to_string(k) + " outside the torus");
  require(m >= 1 && m <= L - 1, Err::IndexOutOfRange,
          "stick length " + std::to_string(m) + " outside [1, L-1]");
  require(l >= 0 && l < L && lp >= 0 && lp < L, Err::IndexOutOfRange,
          "row index outside the torus");
  LatticeConfig c;
  for (int dx = 1; dx < params_.strip_width; ++dx)
    for (int y = 0; y < L; ++y) c.bits |= 1ull << site(k + dx, y);
  for (int dy = 0; dy < L - m; ++dy) c.bits |= 1ull << site(k, l + dy);
  for (int dy = 0; dy < m; ++dy) c.bits |= 1ull << site(k + params_.strip_width, lp + dy);
  return c;
}

LatticeConfig KawasakiModel::translate(const LatticeConfig& c, int dx, int dy) const {
  LatticeConfig t;
  for (int x = 0; x < params_.cols; ++x)
    for (int y = 0; y < params_.rows; ++y)
      if (occupied(c, x, y)) t.bits |= 1ull << site(x + dx, y + dy);
  return t;
}

KawasakiModel::Enumeration KawasakiModel::enumerate_omega_bar(std::size_t state_cap) const {
  const Energy cap = params_.ground_energy() + 4;
  std::unordered_map<std::uint64_t, Energy> seen;
  std::deque<LatticeConfig> frontier;
  for (int k = 0; k < params_.cols; ++k) {
    LatticeConfig g = ground_state(k);
    seen.emplace(g.bits, hamiltonian(g));
    frontier.push_back(g);
  }
  while (!frontier.empty()) {
    LatticeConfig c = frontier.front();
    frontier.pop_front();
    for (const LatticeConfig& nb : neighbors(c)) {
      if (seen.count(nb.bits)) continue;
      Energy h = hamiltonian(nb);
      if (h > cap) continue;
      require(seen.size() < state_cap, Err::CapExceeded,
              "sublevel enumeration exceeded " + std::to_string(state_cap) + " states");
      seen.emplace(nb.bits, h);
      frontier.push_back(nb);
    }
  }

  Enumeration out;
  out.configs.reserve(seen.size());
  for (const auto& [bits, h] : seen) out.configs.push_back({bits});
  std::sort(out.configs.begin(), out.configs.end());

  std::unordered_map<std::uint64_t, StateId> index;
  index.reserve(out.configs.size());
  std::vector<std::pair<std::string, Energy>> states;
  states.reserve(out.configs.size());
  for (StateId i = 0; i < out.configs.size(); ++i) {
    index.emplace(out.configs[i].bits, i);
    states.emplace_back(hex_label(out.configs[i]), seen.at(out.configs[i].bits));
  }
  std::vector<std::pair<StateId, StateId>> edges;
  for (StateId i = 0; i < out.configs.size(); ++i)
    for (const LatticeConfig& nb : neighbors(out.configs[i])) {
      auto it = index.find(nb.bits);
      if (it != index.end() && it->second > i) edges.emplace_back(i, it->second);
    }
  out.landscape = Landscape::build(std::move(states), edges, nullptr, state_cap);
  return out;
}

std::vector<LatticeConfig> KawasakiModel::reference_path(int k) const {
  require(k >= 0 && k < params_.cols, Err::IndexOutOfRange,
          "column index " + std::to_string(k) + " outside the torus");
  const int N0 = params_.strip_width, L = params_.rows;
  std::vector<LatticeConfig> path{ground_state(k)};
  for (int q = 0; q < L; ++q)
    for (int p = 0; p < N0; ++p) {
      LatticeConfig c = path.back();
      const int from = site(k + N0 - p - 1, q);
      const int to = site(k + N0 - p, q);
      c.bits ^= (1ull << from) ^ (1ull << to);
      path.push_back(c);
    }
  return path;
}

std::string KawasakiModel::hex_label(const LatticeConfig& c) const {
  const int digits = (params_.sites() + 3) / 4;
  std::string s(digits, '0');
  static const char* hex = "0123456789abcdef";
  for (int d = 0; d < digits; ++d) s[digits - 1 - d] = hex[(c.bits >> (4 * d)) & 0xf];
  return s;
}

}  // namespace mhier
