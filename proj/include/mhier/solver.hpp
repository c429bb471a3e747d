#pragma once

#include <cstdint>
#include <map>
#include <queue>
#include <utility>
#include <vector>

#include "mhier/errors.hpp"

namespace mhier {

// Sparse Gaussian elimination for the structurally symmetric, diagonally
// dominant systems this project produces (absorbing jump chains, discrete
// resolvents). Pivots are taken on the diagonal -- safe for these matrices and
// breakdown here exactly identifies a singular (closed) block -- while the
// elimination ORDER is greedy minimum degree to keep fill small. The
// factorization records its row operations so it can be replayed on many
// right-hand sides. Works for exact (mpq_class) and floating scalars alike.
template <class S>
class SparseFactor {
 public:
  // rows[i]: sparse row i of the square matrix, as (column, value) pairs.
  SparseFactor(std::size_t n, const std::vector<std::vector<std::pair<std::uint32_t, S>>>& rows)
      : n_(n) {
    std::vector<std::map<std::uint32_t, S>> work(n);
    std::vector<std::vector<std::uint32_t>> colrows(n);  // may hold stale ids
    for (std::size_t i = 0; i < n; ++i)
      for (const auto& [c, v] : rows[i])
        if (!(v == S(0))) {
          work[i][c] = v;
          colrows[c].push_back(static_cast<std::uint32_t>(i));
        }

    std::vector<char> eliminated(n, 0);
    using Item = std::pair<std::size_t, std::uint32_t>;  // (row size, column)
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    for (std::uint32_t c = 0; c < n; ++c) heap.emplace(work[c].size(), c);

    pivots_.reserve(n);
    while (!heap.empty()) {
      auto [deg, c] = heap.top();
      heap.pop();
      if (eliminated[c]) continue;
      if (deg != work[c].size()) {
        heap.emplace(work[c].size(), c);  // stale degree; reinsert
        continue;
      }
      eliminated[c] = 1;

      auto& prow = work[c];
      auto dit = prow.find(c);
      require(dit != prow.end() && !(dit->second == S(0)), Err::SingularSystem,
              "zero diagonal pivot at column " + std::to_string(c));
      const S pdiag = dit->second;

      for (std::uint32_t ri : colrows[c]) {
        if (ri == c || eliminated[ri]) continue;
        auto itc = work[ri].find(c);
        if (itc == work[ri].end() || itc->second == S(0)) continue;  // stale entry
        S f = itc->second / pdiag;
        work[ri].erase(itc);
        ops_.push_back({ri, c, f});
        for (const auto& [cc, vv] : prow) {
          if (cc == c || vv == S(0)) continue;
          auto [it2, fresh] = work[ri].try_emplace(cc, S(0));
          it2->second -= f * vv;
          if (fresh) colrows[cc].push_back(ri);
        }
      }
      colrows[c].clear();
      colrows[c].shrink_to_fit();

      Pivot p;
      p.col = c;
      p.diag = pdiag;
      for (const auto& [cc, vv] : prow)
        if (cc != c && !(vv == S(0))) p.entries.emplace_back(cc, vv);
      pivots_.push_back(std::move(p));
      prow.clear();
    }
  }

  std::size_t size() const { return n_; }

  // Solves A x = b for the matrix captured at construction.
  std::vector<S> solve(std::vector<S> b) const {
    for (const auto& op : ops_) b[op.row] -= op.factor * b[op.piv_col];
    std::vector<S> x(n_, S(0));
    for (auto it = pivots_.rbegin(); it != pivots_.rend(); ++it) {
      S acc = std::move(b[it->col]);
      for (const auto& [cc, vv] : it->entries) acc -= vv * x[cc];
      x[it->col] = acc / it->diag;
    }
    return x;
  }

 private:
  struct Op {
    std::uint32_t row, piv_col;
    S factor;
  };
  struct Pivot {
    std::uint32_t col = 0;
    S diag;
    std::vector<std::pair<std::uint32_t, S>> entries;
  };

  std::size_t n_ = 0;
  std::vector<Op> ops_;
  std::vector<Pivot> pivots_;
};

// Dense Gaussian elimination with partial pivoting (by magnitude, so floating
// scalars stay stable; harmless for exact ones). Solves for several
// right-hand sides. Throws SingularSystem on a zero pivot column.
template <class S>
std::vector<std::vector<S>> dense_solve(std::vector<std::vector<S>> a,
                                        std::vector<std::vector<S>> rhs) {
  const std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col; r < n; ++r) {
      using std::abs;
      if (abs(a[r][col]) > abs(a[piv][col])) piv = r;
    }
    require(!(a[piv][col] == S(0)), Err::SingularSystem, "zero pivot in dense solve");
    std::swap(a[col], a[piv]);
    for (auto& b : rhs) std::swap(b[col], b[piv]);
    const S d = a[col][col];
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      if (a[r][col] == S(0)) continue;
      S f = a[r][col] / d;
      a[r][col] = S(0);
      for (std::size_t cc = col + 1; cc < n; ++cc) a[r][cc] -= f * a[col][cc];
      for (auto& b : rhs) b[r] -= f * b[col];
    }
  }
  for (std::size_t col = 0; col < n; ++col)
    for (auto& b : rhs) b[col] /= a[col][col];
  return rhs;
}

}  // namespace mhier
