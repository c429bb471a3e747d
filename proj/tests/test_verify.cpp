#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "mhier/verify.hpp"
#include "oracles.hpp"

using namespace mhier;
using namespace mhier::testing;

TEST_CASE("rate system: Metropolis rates and Gibbs weights") {
  Landscape w = chain_w();
  RateSystem rs(w, 2.0);
  CHECK(rs.rate(2, 3) == doctest::Approx(std::exp(-2.0)));  // uphill by 1
  CHECK(rs.rate(3, 2) == 1.0);                              // downhill
  CHECK(rs.rate(0, 1) == doctest::Approx(std::exp(-6.0)));  // uphill by 3

  auto flat = Landscape::build({{"", 4}, {"", 4}}, {{0, 1}});
  RateSystem frs(flat, 1.5);
  CHECK(frs.rate(0, 1) == 1.0);
  CHECK(frs.rate(1, 0) == 1.0);

  // Gibbs weights peak on the ground states
  for (StateId s = 1; s < 6; ++s) CHECK(rs.log_gibbs(0) >= rs.log_gibbs(s));
  CHECK(rs.log_gibbs(0) == rs.log_gibbs(6));

  // detailed balance in the log domain at several betas
  for (double beta : {0.5, 1.0, 4.0, 20.0}) {
    RateSystem r(w, beta);
    for (StateId s = 0; s < w.size(); ++s)
      for (StateId t : w.neighbors(s)) {
        double lhs = r.log_weight(s) + r.log_rate(s, t);
        double rhs = r.log_weight(t) + r.log_rate(t, s);
        CHECK(lhs == rhs);  // exact: both reduce to -beta * max(H(s), H(t))
      }
  }
}

TEST_CASE("exit distribution: limit formula") {
  Landscape land = exit_fixture();
  Cycle c = validate_cycle(land, {0, 1});
  ExitLimit lim = exit_distribution_limit(land, c);
  REQUIRE(lim.support == StateSet{2, 3});
  CHECK(lim.prob[0] == Rational(1, 3));
  CHECK(lim.prob[1] == Rational(2, 3));

  // symmetric cycle: two boundary minima with one contact each
  auto sym = Landscape::build({{"", 0}, {"", 1}, {"", 1}, {"", 2}}, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
  Cycle cs = validate_cycle(sym, {0});
  ExitLimit ls = exit_distribution_limit(sym, cs);
  CHECK(ls.prob[0] == Rational(1, 2));
  CHECK(ls.prob[1] == Rational(1, 2));

  Landscape w = chain_w();
  Cycle cw = validate_cycle(w, {2, 3, 4});
  ExitLimit lw = exit_distribution_limit(w, cw);
  REQUIRE(lw.support == StateSet{1, 5});
  CHECK(lw.prob[0] == Rational(1, 2));
  CHECK(lw.prob[1] == Rational(1, 2));
}

TEST_CASE("exit distribution: exact beta-solve converges to the limit") {
  Landscape land = exit_fixture();
  Cycle c = validate_cycle(land, {0, 1});

  double prev_gap = 1.0;
  for (double beta : {5.0, 10.0, 20.0}) {
    ExitExact ex = exit_distribution_exact(land, c, beta);
    REQUIRE(ex.support == StateSet{2, 3});
    double gap = std::max(std::abs(ex.prob[0] - 1.0 / 3), std::abs(ex.prob[1] - 2.0 / 3));
    CHECK(gap < prev_gap);  // convergence is monotone on this fixture
    prev_gap = gap;
  }
  CHECK(prev_gap <= 1e-3);  // beta = 20

  // symmetric fixture is exactly (1/2,1/2) at every beta
  Landscape w = chain_w();
  Cycle cw = validate_cycle(w, {2, 3, 4});
  for (double beta : {1.0, 3.0, 8.0}) {
    ExitExact ex = exit_distribution_exact(w, cw, beta);
    REQUIRE(ex.support == StateSet{1, 5});
    CHECK(ex.prob[0] == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("exit distribution: non-minimal boundary mass decays like exp(-beta)") {
  // cycle {a,b} at 0 with minimal boundary at 1 and one higher exit at 2
  auto land = Landscape::build({{"a", 0}, {"b", 0}, {"low", 1}, {"high", 2}, {"top", 3}},
                               {{0, 1}, {0, 2}, {1, 3}, {2, 4}, {3, 4}});
  Cycle c = validate_cycle(land, {0, 1});
  REQUIRE(boundary_sets(land, c.states).boundary == StateSet{2, 3});
  double prev = 1.0;
  for (double beta : {5.0, 10.0, 20.0}) {
    ExitExact ex = exit_distribution_exact(land, c, beta);
    double high_mass = ex.prob[1];
    CHECK(high_mass <= 2.0 * std::exp(-beta));
    CHECK(high_mass < prev);
    prev = high_mass;
  }
}

TEST_CASE("Monte Carlo exit frequencies match the exact solve within 3 sigma") {
  Landscape land = exit_fixture();
  Cycle c = validate_cycle(land, {0, 1});
  const double beta = 8.0;
  ExitExact ex = exit_distribution_exact(land, c, beta);

  const int trials = 100'000;
  StopRule stop;
  stop.hit = {2, 3};
  int hits_x1 = 0;
  for (int i = 0; i < trials; ++i) {
    StateId start = (i % 2 == 0) ? 0 : 1;  // uniform over the bottom
    Trajectory t = simulate(land, beta, start, stop, Rng::stream(42, i));
    if (t.visits.back().state == 2) ++hits_x1;
  }
  double p = ex.prob[0];
  double sigma = std::sqrt(p * (1 - p) / trials);
  CHECK(std::abs(static_cast<double>(hits_x1) / trials - p) <= 3 * sigma);
}

TEST_CASE("simulate: basics and determinism") {
  Landscape w = chain_w();
  StopRule zero;
  zero.time_budget = 0;
  Trajectory t0 = simulate(w, 2.0, 2, zero, Rng::stream(1, 0));
  CHECK(t0.visits.size() == 1);
  CHECK(t0.total_time == 0);
  CHECK(t0.stop == Trajectory::Stop::TimeBudget);

  StopRule budget;
  budget.time_budget = 50.0;
  Trajectory a = simulate(w, 2.0, 2, budget, Rng::stream(3, 7));
  Trajectory b = simulate(w, 2.0, 2, budget, Rng::stream(3, 7));
  REQUIRE(a.visits.size() == b.visits.size());
  for (std::size_t i = 0; i < a.visits.size(); ++i) {
    CHECK(a.visits[i].state == b.visits[i].state);
    CHECK(a.visits[i].holding == b.visits[i].holding);
  }
  CHECK(a.total_time == doctest::Approx(50.0));
  for (std::size_t i = 0; i + 1 < a.visits.size(); ++i) {
    CHECK(w.adjacent(a.visits[i].state, a.visits[i + 1].state));
    CHECK(a.visits[i].holding > 0);
  }

  StopRule hit;
  hit.hit = {4};
  Trajectory h = simulate(w, 2.0, 4, hit, Rng::stream(4, 0));
  CHECK(h.stop == Trajectory::Stop::HitSet);
  CHECK(h.visits.size() == 1);
}

TEST_CASE("first-hit split at large beta matches the level-1 absorption law") {
  // the coupling behind the limit chain: started from the saddle state s3,
  // the dynamics enters the valley of P_{s2} or of P_{s4} first with
  // probability 1/2 each, which is the absorption law the trace rate
  // R*(P_{s2}, P_{s4}) = 1/2 is built from
  Landscape w = chain_w();
  const double beta = 8.0;
  const int trials = 20'000;
  StopRule stop;
  stop.hit = {0, 2, 4, 6};  // union of the level-1 valleys
  int hit_s4 = 0;
  for (int i = 0; i < trials; ++i) {
    Trajectory t = simulate(w, beta, 3, stop, Rng::stream(99, i));
    if (t.visits.back().state == 4) ++hit_s4;
  }
  double sigma = std::sqrt(0.25 / trials);
  CHECK(std::abs(static_cast<double>(hit_s4) / trials - 0.5) <= 3 * sigma + 2 * std::exp(-beta));
}

TEST_CASE("first-hit split among level-2 valleys matches the absorption law") {
  // from the saddle s1 the level-2 chain absorbs into V({s0}) or V({s2,s4})
  // with probability 1/2 each
  Landscape w = chain_w();
  const double beta = 8.0;
  const int trials = 20'000;
  StopRule stop;
  stop.hit = {0, 2, 3, 4, 6};  // union of the level-2 valleys
  int hit_left = 0;
  for (int i = 0; i < trials; ++i) {
    Trajectory t = simulate(w, beta, 1, stop, Rng::stream(555, i));
    if (t.visits.back().state == 0) ++hit_left;
  }
  double sigma = std::sqrt(0.25 / trials);
  CHECK(std::abs(static_cast<double>(hit_left) / trials - 0.5) <= 3 * sigma + 2 * std::exp(-beta));
}

TEST_CASE("occupation fraction outside the level-1 valleys is tiny") {
  Landscape w = chain_w();
  const double beta = 8.0;
  StateSet valleys{0, 2, 4, 6};
  StopRule stop;
  stop.time_budget = std::exp(beta);  // horizon e^{Gamma*[1] * beta}
  double total_out = 0, total = 0;
  const int trials = 2'000;
  for (int i = 0; i < trials; ++i) {
    Trajectory t = simulate(w, beta, 2, stop, Rng::stream(1234, i));
    total_out += occupation_fraction_outside(t, valleys) * t.total_time;
    total += t.total_time;
  }
  CHECK(total_out / total <= 0.05);
}

TEST_CASE("resolvent deviations on W decrease in beta") {
  Landscape w = chain_w();
  HierarchyReport rep = full_hierarchy(w);
  const Level& l1 = rep.levels[0];

  // constant g: the macroscopic solution is exactly c/lambda and the
  // microscopic one approaches it on the valleys as beta grows
  {
    std::vector<double> g(l1.limit.size(), 3.0);
    auto d6 = resolvent_deviation(rep.omega_bar, l1, 1.0, g, 6.0);
    auto d10 = resolvent_deviation(rep.omega_bar, l1, 1.0, g, 10.0);
    for (std::size_t i = 0; i < d6.size(); ++i) CHECK(d10[i] < d6[i]);
    for (double d : d10) CHECK(d <= 1e-3);
  }
  // zero g: exactly zero
  {
    std::vector<double> g(l1.limit.size(), 0.0);
    auto dev = resolvent_deviation(rep.omega_bar, l1, 1.0, g, 6.0);
    for (double d : dev) CHECK(d == 0.0);
  }
  // indicator g's: strict decrease over beta in {4,6,8}, small at beta=8
  for (std::size_t gi = 0; gi < l1.limit.size(); ++gi) {
    std::vector<double> g(l1.limit.size(), 0.0);
    g[gi] = 1.0;
    std::vector<double> prev;
    for (double beta : {4.0, 6.0, 8.0}) {
      auto dev = resolvent_deviation(rep.omega_bar, l1, 1.0, g, beta);
      if (!prev.empty())
        for (std::size_t i = 0; i < dev.size(); ++i) CHECK(dev[i] < prev[i]);
      prev = dev;
    }
    for (double d : prev) CHECK(d <= 0.05);
  }
}

TEST_CASE("random landscapes are connected and reproducible") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Landscape a = random_landscape(seed, 10 + seed, 3.0, -5, 5);
    Landscape b = random_landscape(seed, 10 + seed, 3.0, -5, 5);
    CHECK(a.size() == 10 + seed);  // construction succeeded => connected
    REQUIRE(a.size() == b.size());
    REQUIRE(a.num_edges() == b.num_edges());
    for (StateId s = 0; s < a.size(); ++s) CHECK(a.energy(s) == b.energy(s));
  }
  // degenerate width-zero energy range: flat landscape, single plateau
  Landscape flat = random_landscape(5, 12, 3.0, 2, 2);
  auto ps = stable_plateaux(flat);
  CHECK(ps.size() == 1);
}
