#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mhier/landscape.hpp"

namespace mhier {

// Occupancy bit-sequence on the K x L torus in row-major order (site (x,y) is
// bit y*K + x). Particle count is fixed at L*N0.
struct LatticeConfig {
  std::uint64_t bits = 0;

  friend bool operator==(const LatticeConfig&, const LatticeConfig&) = default;
  friend auto operator<=>(const LatticeConfig&, const LatticeConfig&) = default;
};

struct KawasakiParams {
  int cols = 0;        // K
  int rows = 0;        // L
  int strip_width = 0; // N0, particles = rows * strip_width

  // Validates K > L, L/4 < N0 < K/2, and a representable lattice.
  static KawasakiParams make(int cols, int rows, int strip_width);

  int sites() const { return cols * rows; }
  int particles() const { return rows * strip_width; }
  Energy ground_energy() const {  // H0 = -2*L*N0 + L
    return -2 * static_cast<Energy>(rows) * strip_width + rows;
  }
};

// Kawasaki exchange dynamics on the torus: the Hamiltonian counts occupied
// nearest-neighbor bonds negatively, moves exchange an occupied site with an
// adjacent vacant one.
class KawasakiModel {
 public:
  explicit KawasakiModel(KawasakiParams params);

  const KawasakiParams& params() const { return params_; }

  int site(int x, int y) const;
  bool occupied(const LatticeConfig& c, int x, int y) const;

  Energy hamiltonian(const LatticeConfig& c) const;
  int interface_count(const LatticeConfig& c) const;  // H = -2*L*N0 + I/2

  // All configurations one occupied/vacant exchange away; sorted by bit value.
  std::vector<LatticeConfig> neighbors(const LatticeConfig& c) const;

  LatticeConfig ground_state(int k) const;  // strip on columns k..k+N0-1
  // Bulk columns full, an (L-m)-stick in column k at row l, an m-stick in
  // column k+N0 at row l'; energy H0+2.
  LatticeConfig shallow_bottom(int k, int m, int l, int lp) const;

  LatticeConfig translate(const LatticeConfig& c, int dx, int dy) const;

  struct Enumeration {
    Landscape landscape;
    std::vector<LatticeConfig> configs;  // configs[i] corresponds to state i
  };

  // Connected component, containing all ground states, of the sublevel graph
  // at H <= H0 + 4. Explores only sublevel states; never the full space.
  Enumeration enumerate_omega_bar(std::size_t state_cap = 10'000'000) const;

  // The explicit L*N0-step path from sigma^k to sigma^{k+1} that vacates the
  // strip's left column rightward row by row; height H0 + 4.
  std::vector<LatticeConfig> reference_path(int k) const;

  std::string hex_label(const LatticeConfig& c) const;

 private:
  void check_config(const LatticeConfig& c) const;

  KawasakiParams params_;
  std::vector<std::pair<int, int>> bonds_;  // site index pairs, each bond once
};

}  // namespace mhier
