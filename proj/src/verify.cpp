#include "mhier/verify.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <set>

#include "mhier/solver.hpp"

namespace mhier {

namespace {

constexpr int kHighPrecBits = 256;  // ~77 significant digits

// exp(x) at kHighPrecBits via MPFR; GMP floats have no exp of their own.
mpf_class hp_exp(double x) {
  mpfr_t t;
  mpfr_init2(t, kHighPrecBits);
  mpfr_set_d(t, x, MPFR_RNDN);
  mpfr_exp(t, t, MPFR_RNDN);
  mpf_t out;
  mpf_init2(out, kHighPrecBits);
  mpfr_get_f(out, t, MPFR_RNDN);
  mpf_class r(out);
  mpf_clear(out);
  mpfr_clear(t);
  return r;
}

mpf_class hp_pow(const mpf_class& base, Energy e) {
  mpf_class acc(1, kHighPrecBits), b = base;
  Energy k = e;
  while (k > 0) {
    if (k & 1) acc *= b;
    b *= b;
    k >>= 1;
  }
  return acc;
}

}  // namespace

RateSystem::RateSystem(const Landscape& land, double beta) : land_(&land), beta_(beta) {
  require(beta > 0, Err::BadInput, "inverse temperature must be positive");
  // detailed balance, exactly in the log domain: both routes to
  // -beta * max(H(s), H(t)) must agree as integers before scaling
  for (StateId s = 0; s < land.size(); ++s)
    for (StateId t : land.neighbors(s)) {
      if (t < s) continue;
      const Energy hs = land.energy(s), ht = land.energy(t);
      const Energy lhs = hs + std::max<Energy>(ht - hs, 0);
      const Energy rhs = ht + std::max<Energy>(hs - ht, 0);
      require(lhs == rhs && lhs == std::max(hs, ht), Err::BadInput,
              "detailed balance identity violated (integer overflow?)");
    }
  // log Z by shifted logsumexp over -beta*H
  double mx = -beta * static_cast<double>(land.min_energy());
  double acc = 0;
  for (StateId s = 0; s < land.size(); ++s)
    acc += std::exp(-beta * static_cast<double>(land.energy(s)) - mx);
  log_z_ = mx + std::log(acc);
}

double RateSystem::log_rate(StateId s, StateId t) const {
  const Energy up = std::max<Energy>(land_->energy(t) - land_->energy(s), 0);
  return -beta_ * static_cast<double>(up);
}

double RateSystem::rate(StateId s, StateId t) const { return std::exp(log_rate(s, t)); }

ExitLimit exit_distribution_limit(const Landscape& land, const Cycle& cycle) {
  BoundarySets bd = boundary_sets(land, cycle.states);
  std::vector<char> in_c(land.size(), 0);
  for (StateId s : cycle.states) in_c[s] = 1;
  ExitLimit out;
  out.support = bd.min_boundary;
  long total = 0;
  std::vector<long> contact(out.support.size(), 0);
  for (std::size_t i = 0; i < out.support.size(); ++i) {
    for (StateId nb : land.neighbors(out.support[i]))
      if (in_c[nb]) ++contact[i];
    total += contact[i];
  }
  for (std::size_t i = 0; i < out.support.size(); ++i)
    out.prob.emplace_back(contact[i], total);
  return out;
}

ExitExact exit_distribution_exact(const Landscape& land, const Cycle& cycle, double beta,
                                  const StateSet& start) {
  require(beta > 0, Err::BadInput, "inverse temperature must be positive");
  BoundarySets bd = boundary_sets(land, cycle.states);
  const StateSet& boundary = bd.boundary;

  std::vector<std::int32_t> pos(land.size(), -1);  // index within the cycle
  for (std::size_t i = 0; i < cycle.states.size(); ++i) pos[cycle.states[i]] = static_cast<std::int32_t>(i);
  std::vector<std::int32_t> bpos(land.size(), -1);
  for (std::size_t i = 0; i < boundary.size(); ++i) bpos[boundary[i]] = static_cast<std::int32_t>(i);

  const std::size_t k = cycle.states.size();
  const mpf_class t = hp_exp(-beta);

  // jump chain inside the cycle; boundary states absorb
  std::vector<std::vector<mpf_class>> a(k, std::vector<mpf_class>(k, mpf_class(0, kHighPrecBits)));
  std::vector<std::vector<mpf_class>> rhs(boundary.size(),
                                          std::vector<mpf_class>(k, mpf_class(0, kHighPrecBits)));
  for (std::size_t i = 0; i < k; ++i) {
    const StateId s = cycle.states[i];
    mpf_class total(0, kHighPrecBits);
    std::vector<std::pair<StateId, mpf_class>> rates;
    for (StateId nb : land.neighbors(s)) {
      const Energy up = std::max<Energy>(land.energy(nb) - land.energy(s), 0);
      mpf_class r = hp_pow(t, up);
      total += r;
      rates.emplace_back(nb, std::move(r));
    }
    a[i][i] = total;
    for (auto& [nb, r] : rates) {
      if (pos[nb] >= 0)
        a[i][pos[nb]] -= r;
      else
        rhs[bpos[nb]][i] += r;
    }
  }
  std::vector<std::vector<mpf_class>> sol = dense_solve(std::move(a), std::move(rhs));

  // average over the start distribution (uniform over the bottom by default)
  StateSet from = start.empty() ? cycle.bottom : start;
  for (StateId s : from)
    require(pos[s] >= 0, Err::BadInput, "start state " + std::to_string(s) + " lies outside the cycle");

  ExitExact out;
  out.support = boundary;
  mpf_class inv(1, kHighPrecBits);
  inv /= static_cast<unsigned long>(from.size());
  for (std::size_t b = 0; b < boundary.size(); ++b) {
    mpf_class p(0, kHighPrecBits);
    for (StateId s : from) p += sol[b][pos[s]];
    p *= inv;
    out.prob.push_back(p.get_d());
  }
  return out;
}

struct ResolventChecker::Impl {
  SparseFactor<double>* micro = nullptr;
  std::unique_ptr<SparseFactor<double>> micro_holder;
  std::vector<std::vector<double>> macro_inverse_rows;  // dense (lambda - L)^{-1}
  std::vector<std::vector<std::pair<std::uint32_t, double>>> micro_rows;  // for residual checks
  double theta = 0;
};

ResolventChecker::ResolventChecker(const Landscape& land, const Level& level, double lambda,
                                   double beta)
    : land_(&land), level_(&level), lambda_(lambda), beta_(beta) {
  require(lambda > 0, Err::BadInput, "lambda must be positive");
  require(beta > 0, Err::BadInput, "inverse temperature must be positive");
  auto impl = std::make_shared<Impl>();
  const std::size_t n = land.size();
  impl->theta = std::exp(beta * static_cast<double>(level.gamma_star));

  std::vector<std::vector<std::pair<std::uint32_t, double>>> rows(n);
  for (StateId s = 0; s < n; ++s) {
    double diag = lambda_;
    for (StateId v : land.neighbors(s)) {
      const Energy up = std::max<Energy>(land.energy(v) - land.energy(s), 0);
      const double r = impl->theta * std::exp(-beta * static_cast<double>(up));
      rows[s].push_back({v, -r});
      diag += r;
    }
    rows[s].push_back({s, diag});
    std::sort(rows[s].begin(), rows[s].end());
  }
  impl->micro_rows = rows;
  impl->micro_holder = std::make_unique<SparseFactor<double>>(n, rows);
  impl->micro = impl->micro_holder.get();

  // macroscopic operator of the limit chain (diagonal self-rates drop out)
  const std::size_t nu = level.limit.size();
  std::vector<std::vector<double>> m(nu, std::vector<double>(nu, 0.0));
  for (std::size_t i = 0; i < nu; ++i) {
    m[i][i] = lambda_;
    for (const auto& [j, r] : level.limit.rates[i]) {
      if (j == i) continue;
      const double rj = r.get_d();
      m[i][j] -= rj;
      m[i][i] += rj;
    }
  }
  std::vector<std::vector<double>> eye(nu, std::vector<double>(nu, 0.0));
  for (std::size_t i = 0; i < nu; ++i) eye[i][i] = 1.0;
  impl->macro_inverse_rows = dense_solve(std::move(m), std::move(eye));
  impl_ = std::move(impl);
}

std::vector<double> ResolventChecker::deviations(std::span<const double> g) const {
  const std::size_t nu = level_->limit.size();
  require(g.size() == nu, Err::BadInput, "g must assign one value per plateau");
  const std::size_t n = land_->size();

  // lift of g: g(Psi(eta)) on the union of valleys, zero outside
  std::vector<double> big_g(n, 0.0);
  for (std::size_t i = 0; i < nu; ++i)
    for (StateId s : level_->valleys[i].states) big_g[s] = g[i];

  std::vector<double> f_micro = impl_->micro->solve(big_g);
  // one step of iterative refinement plus a residual guarantee
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<double> resid(n, 0.0);
    double worst = 0;
    for (StateId s = 0; s < n; ++s) {
      long double acc = -static_cast<long double>(big_g[s]);
      for (const auto& [t, v] : impl_->micro_rows[s])
        acc += static_cast<long double>(v) * f_micro[t];
      resid[s] = static_cast<double>(-acc);
      worst = std::max(worst, std::abs(resid[s]));
    }
    if (worst <= 1e-10 * std::max(1.0, lambda_)) break;
    require(pass == 0, Err::SingularSystem, "microscopic resolvent residual failed to converge");
    std::vector<double> corr = impl_->micro->solve(resid);
    for (StateId s = 0; s < n; ++s) f_micro[s] += corr[s];
  }

  std::vector<double> f_macro(nu, 0.0);
  for (std::size_t i = 0; i < nu; ++i) {
    double acc = 0;
    for (std::size_t j = 0; j < nu; ++j) acc += impl_->macro_inverse_rows[j][i] * g[j];
    f_macro[i] = acc;
  }

  std::vector<double> dev(nu, 0.0);
  for (std::size_t i = 0; i < nu; ++i)
    for (StateId s : level_->valleys[i].states)
      dev[i] = std::max(dev[i], std::abs(f_micro[s] - f_macro[i]));
  return dev;
}

std::vector<double> resolvent_deviation(const Landscape& land, const Level& level, double lambda,
                                        std::span<const double> g, double beta) {
  return ResolventChecker(land, level, lambda, beta).deviations(g);
}

Trajectory simulate(const Landscape& land, double beta, StateId start, const StopRule& stop,
                    Rng rng) {
  require(start < land.size(), Err::IndexOutOfRange, "start state out of range");
  std::vector<char> hit(land.size(), 0);
  for (StateId s : stop.hit) hit[s] = 1;

  Trajectory traj;
  StateId cur = start;
  const bool budgeted = stop.time_budget >= 0;
  double remaining = stop.time_budget;

  if (budgeted && stop.time_budget == 0) {
    traj.visits.push_back({cur, 0.0});
    traj.stop = Trajectory::Stop::TimeBudget;
    return traj;
  }
  for (std::uint64_t jumps = 0;; ++jumps) {
    if (hit[cur]) {
      traj.visits.push_back({cur, 0.0});
      traj.stop = Trajectory::Stop::HitSet;
      return traj;
    }
    if (jumps >= stop.max_jumps) {
      traj.visits.push_back({cur, 0.0});
      traj.stop = Trajectory::Stop::JumpCap;
      return traj;
    }
    double total = 0;
    auto nbrs = land.neighbors(cur);
    std::vector<double> rates(nbrs.size());
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      const Energy up = std::max<Energy>(land.energy(nbrs[i]) - land.energy(cur), 0);
      rates[i] = std::exp(-beta * static_cast<double>(up));
      total += rates[i];
    }
    double hold = rng.exponential(total);
    if (budgeted && hold >= remaining) {
      traj.visits.push_back({cur, remaining});
      traj.total_time += remaining;
      traj.stop = Trajectory::Stop::TimeBudget;
      return traj;
    }
    traj.visits.push_back({cur, hold});
    traj.total_time += hold;
    if (budgeted) remaining -= hold;
    double u = rng.uniform01() * total;
    std::size_t pick = 0;
    for (; pick + 1 < nbrs.size(); ++pick) {
      if (u < rates[pick]) break;
      u -= rates[pick];
    }
    cur = nbrs[pick];
  }
}

double occupation_fraction_outside(const Trajectory& t, const StateSet& inside) {
  if (t.total_time <= 0) return 0;
  double out = 0;
  for (const auto& v : t.visits)
    if (!std::binary_search(inside.begin(), inside.end(), v.state)) out += v.holding;
  return out / t.total_time;
}

Landscape random_landscape(std::uint64_t seed, std::size_t n_states, double avg_degree,
                           Energy energy_min, Energy energy_max) {
  require(n_states >= 2, Err::BadInput, "random landscape needs at least two states");
  require(energy_min <= energy_max, Err::BadInput, "empty energy range");
  Rng rng = Rng::stream(seed, 0x9a5cb5);

  std::vector<std::pair<std::string, Energy>> states;
  states.reserve(n_states);
  for (std::size_t i = 0; i < n_states; ++i)
    states.emplace_back("", rng.uniform_int(energy_min, energy_max));

  std::set<std::pair<StateId, StateId>> edge_set;
  for (std::size_t i = 1; i < n_states; ++i) {
    StateId j = static_cast<StateId>(rng.uniform_below(i));
    edge_set.emplace(j, static_cast<StateId>(i));
  }
  const std::size_t want = std::max<std::size_t>(
      n_states - 1, static_cast<std::size_t>(avg_degree * static_cast<double>(n_states) / 2.0));
  for (std::size_t attempts = 0; edge_set.size() < want && attempts < 20 * want; ++attempts) {
    StateId a = static_cast<StateId>(rng.uniform_below(n_states));
    StateId b = static_cast<StateId>(rng.uniform_below(n_states));
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    edge_set.emplace(a, b);
  }
  std::vector<std::pair<StateId, StateId>> edges(edge_set.begin(), edge_set.end());
  return Landscape::build(std::move(states), edges);
}

}  // namespace mhier
