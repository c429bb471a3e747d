// Command-line front end: load or generate landscapes, run the hierarchy,
// run the verification suites, emit JSON reports.
//
// Exit codes: 0 success, 1 verification-check failure, 2 input/usage error.

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "mhier/hierarchy.hpp"
#include "mhier/kawasaki.hpp"
#include "mhier/verify.hpp"

namespace {

constexpr const char* kVersion = "mhier 0.1.0";

using nlohmann::json;
using namespace mhier;

struct CheckRow {
  std::string check;
  json parameters;
  json expected;
  json observed;
  json tolerance;
  bool pass = true;
};

json rows_to_json(const std::vector<CheckRow>& rows, const json& config) {
  json doc;
  doc["tool_version"] = kVersion;
  doc["config"] = config;
  doc["checks"] = json::array();
  for (const auto& r : rows)
    doc["checks"].push_back({{"check", r.check},
                             {"parameters", r.parameters},
                             {"expected", r.expected},
                             {"observed", r.observed},
                             {"tolerance", r.tolerance},
                             {"pass", r.pass}});
  return doc;
}

void write_report(const std::string& path, const json& doc) {
  std::ofstream out(path);
  require(out.good(), Err::BadInput, "cannot open " + path + " for writing");
  out << doc.dump(1) << '\n';
}

std::vector<double> parse_grid(const std::string& grid) {
  std::vector<double> out;
  std::stringstream ss(grid);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  require(!out.empty(), Err::BadInput, "empty beta grid");
  return out;
}

void print_hierarchy_summary(const HierarchyReport& rep) {
  std::cout << "phi_bar = " << rep.phi_bar << ", |omega_bar| = " << rep.omega_bar.size()
            << ", terminal level m = " << rep.terminal_level() << "\n";
  for (const Level& lvl : rep.levels) {
    std::cout << "  level " << lvl.h << ": gamma* = " << lvl.gamma_star
              << ", plateaux = " << lvl.plateaux.size() << ", nu = " << lvl.nu()
              << ", transient = " << lvl.classes.transient.size() << "\n";
  }
}

int run_analyze(const std::string& input, const std::string& report_path) {
  Landscape land = Landscape::load_json_file(input);
  HierarchyReport rep = full_hierarchy(land);
  print_hierarchy_summary(rep);
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    require(out.good(), Err::BadInput, "cannot open " + report_path + " for writing");
    json config{{"command", "analyze"}, {"input", input}};
    report_to_json(rep, out, kVersion, config.dump());
  }
  return 0;
}

int run_kawasaki(int K, int L, int N0, std::size_t cap, const std::string& emit, bool analyze,
                 const std::string& report_path) {
  KawasakiModel model(KawasakiParams::make(K, L, N0));
  auto en = model.enumerate_omega_bar(cap);
  std::cout << "enumerated " << en.landscape.size() << " states at H <= "
            << model.params().ground_energy() + 4 << "\n";
  if (!emit.empty()) en.landscape.save_json_file(emit);
  if (analyze) {
    HierarchyReport rep = full_hierarchy(en.landscape);
    print_hierarchy_summary(rep);
    if (!report_path.empty()) {
      std::ofstream out(report_path);
      require(out.good(), Err::BadInput, "cannot open " + report_path + " for writing");
      json config{{"command", "kawasaki"}, {"K", K}, {"L", L}, {"N0", N0}};
      report_to_json(rep, out, kVersion, config.dump());
    }
  }
  return 0;
}

int run_verify_exit(const std::string& input, const std::vector<std::uint32_t>& cycle_ids,
                    const std::string& grid, long mc, double mc_beta, std::uint64_t seed,
                    unsigned jobs, const std::string& report_path) {
  Landscape land = Landscape::load_json_file(input);
  Cycle cycle = validate_cycle(land, canonicalize(StateSet(cycle_ids.begin(), cycle_ids.end())));
  std::vector<double> betas = parse_grid(grid);
  std::sort(betas.begin(), betas.end());

  ExitLimit limit = exit_distribution_limit(land, cycle);
  std::vector<CheckRow> rows;
  json params{{"cycle", cycle.states}, {"bottom", cycle.bottom}};

  json limit_json = json::array();
  for (std::size_t i = 0; i < limit.support.size(); ++i)
    limit_json.push_back({{"state", limit.support[i]}, {"prob", rational_string(limit.prob[i])}});
  std::cout << "limit law on the minimal boundary: " << limit_json.dump() << "\n";

  double prev_gap = std::numeric_limits<double>::infinity();
  bool monotone = true;
  double last_gap = 0;
  for (double beta : betas) {
    ExitExact exact = exit_distribution_exact(land, cycle, beta);
    double gap = 0;
    for (std::size_t i = 0; i < exact.support.size(); ++i) {
      auto it = std::find(limit.support.begin(), limit.support.end(), exact.support[i]);
      double lim = 0;
      if (it != limit.support.end()) lim = limit.prob[it - limit.support.begin()].get_d();
      gap = std::max(gap, std::abs(exact.prob[i] - lim));
    }
    monotone = monotone && gap <= prev_gap;
    prev_gap = gap;
    last_gap = gap;
    std::cout << "beta " << beta << ": max |exact - limit| = " << gap << "\n";
  }
  rows.push_back({"exit_exact_vs_limit", params, "gap <= 1e-3 at the largest beta", last_gap, 1e-3,
                  last_gap <= 1e-3 && monotone});

  if (mc > 0) {
    // the MC cross-check runs at a moderate beta of its own: the jump count
    // per trajectory grows like e^{beta * depth}
    const double beta = mc_beta;
    ExitExact exact = exit_distribution_exact(land, cycle, beta);
    StopRule stop;
    stop.hit = exact.support;
    const unsigned workers = std::max(1u, jobs);
    std::vector<std::vector<long>> partial(workers, std::vector<long>(exact.support.size(), 0));
    std::vector<std::thread> pool;
    for (unsigned wkr = 0; wkr < workers; ++wkr)
      pool.emplace_back([&, wkr] {
        for (long i = wkr; i < mc; i += workers) {
          StateId start = cycle.bottom[static_cast<std::size_t>(i) % cycle.bottom.size()];
          Trajectory t = simulate(land, beta, start, stop, Rng::stream(seed, i));
          auto it = std::find(exact.support.begin(), exact.support.end(), t.visits.back().state);
          ++partial[wkr][it - exact.support.begin()];
        }
      });
    for (auto& th : pool) th.join();
    std::vector<long> counts(exact.support.size(), 0);
    for (const auto& p : partial)
      for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += p[i];

    bool ok = true;
    double worst_z = 0;
    for (std::size_t i = 0; i < exact.support.size(); ++i) {
      double p = exact.prob[i];
      double sigma = std::sqrt(std::max(p * (1 - p), 1e-12) / static_cast<double>(mc));
      double z = std::abs(static_cast<double>(counts[i]) / static_cast<double>(mc) - p) / sigma;
      worst_z = std::max(worst_z, z);
      if (z > 3) ok = false;
    }
    std::cout << "MC (" << mc << " trajectories, beta " << beta << "): worst z = " << worst_z
              << "\n";
    rows.push_back(
        {"exit_mc_vs_exact", params, "within 3 binomial standard errors", worst_z, 3.0, ok});
  }

  if (!report_path.empty()) {
    json config{{"command", "verify-exit"}, {"input", input}, {"cycle", cycle_ids},
                {"beta_grid", betas},       {"mc", mc},       {"mc_beta", mc_beta},
                {"seed", seed}};
    write_report(report_path, rows_to_json(rows, config));
  }
  bool all = true;
  for (const auto& r : rows) all = all && r.pass;
  std::cout << (all ? "PASS" : "FAIL") << "\n";
  return all ? 0 : 1;
}

int run_verify_resolvent(const std::string& input, int level_index, double lambda,
                         const std::string& grid, double threshold,
                         const std::string& report_path) {
  Landscape land = Landscape::load_json_file(input);
  HierarchyReport rep = full_hierarchy(land);
  require(level_index >= 1 && level_index <= static_cast<int>(rep.terminal_level()),
          Err::IndexOutOfRange,
          "level out of range; hierarchy has " + std::to_string(rep.terminal_level()) +
              " level(s)");
  const Level& lvl = rep.levels[level_index - 1];
  std::vector<double> betas = parse_grid(grid);
  std::sort(betas.begin(), betas.end());

  std::vector<ResolventChecker> checkers;
  for (double beta : betas) checkers.emplace_back(rep.omega_bar, lvl, lambda, beta);

  const std::size_t nu = lvl.limit.size();
  bool decreasing = true, small_at_last = true;
  double worst_last = 0;
  for (std::size_t gi = 0; gi < nu; ++gi) {
    std::vector<double> g(nu, 0.0);
    g[gi] = 1.0;
    std::vector<double> prev;
    for (std::size_t bi = 0; bi < betas.size(); ++bi) {
      std::vector<double> dev = checkers[bi].deviations(g);
      if (!prev.empty())
        for (std::size_t i = 0; i < dev.size(); ++i)
          if (!(dev[i] < prev[i])) decreasing = false;
      prev = dev;
    }
    for (double d : prev) {
      worst_last = std::max(worst_last, d);
      if (d > threshold) small_at_last = false;
    }
  }
  std::cout << "indicator basis of " << nu << " g's, beta grid ";
  for (double b : betas) std::cout << b << " ";
  std::cout << "\nper-valley deviations strictly decreasing: " << (decreasing ? "yes" : "no")
            << "\nworst deviation at the largest beta: " << worst_last << "\n";

  std::vector<CheckRow> rows;
  json params{{"level", level_index}, {"lambda", lambda}, {"beta_grid", betas}};
  rows.push_back({"resolvent_deviation_decreasing", params, "strictly decreasing in beta",
                  decreasing, nullptr, decreasing});
  rows.push_back({"resolvent_deviation_small", params, "<= threshold at the largest beta",
                  worst_last, threshold, small_at_last});
  if (!report_path.empty()) {
    json config{{"command", "verify-resolvent"},
                {"input", input},
                {"level", level_index},
                {"lambda", lambda},
                {"beta_grid", betas},
                {"threshold", threshold}};
    write_report(report_path, rows_to_json(rows, config));
  }
  bool all = decreasing && small_at_last;
  std::cout << (all ? "PASS" : "FAIL") << "\n";
  return all ? 0 : 1;
}

int run_simulate(const std::string& input, double beta, std::uint32_t start,
                 const std::vector<std::uint32_t>& hit, double time_budget, long traj,
                 std::uint64_t seed, unsigned jobs, const std::string& report_path) {
  Landscape land = Landscape::load_json_file(input);
  StopRule stop;
  stop.hit = canonicalize(StateSet(hit.begin(), hit.end()));
  stop.time_budget = time_budget;

  json result;
  result["tool_version"] = kVersion;
  result["config"] = {{"command", "simulate"}, {"input", input},  {"beta", beta},
                      {"start", start},        {"hit", stop.hit}, {"time", time_budget},
                      {"traj", traj},          {"seed", seed}};

  if (traj <= 1) {
    Trajectory t = simulate(land, beta, start, stop, Rng::stream(seed, 0));
    json visits = json::array();
    for (const auto& v : t.visits) visits.push_back({{"state", v.state}, {"holding", v.holding}});
    result["trajectory"] = {{"visits", visits},
                            {"total_time", t.total_time},
                            {"stop", t.stop == Trajectory::Stop::HitSet       ? "hit"
                                     : t.stop == Trajectory::Stop::TimeBudget ? "time"
                                                                              : "jump_cap"}};
    std::cout << "1 trajectory, " << t.visits.size() << " visits, total time " << t.total_time
              << "\n";
  } else {
    // Aggregation must not depend on the worker partition, or reports would
    // differ across --jobs settings: trajectories are grouped into fixed
    // blocks, each block is reduced in index order, and blocks are summed
    // sequentially at the end.
    const unsigned workers = std::max(1u, jobs);
    const long block_size = 1024;
    const long blocks = (traj + block_size - 1) / block_size;
    std::vector<std::vector<double>> occupancy(blocks);
    std::vector<std::map<StateId, long>> hits(blocks);
    std::vector<std::thread> pool;
    for (unsigned wkr = 0; wkr < workers; ++wkr)
      pool.emplace_back([&, wkr] {
        for (long b = wkr; b < blocks; b += workers) {
          occupancy[b].assign(land.size(), 0.0);
          for (long i = b * block_size; i < std::min(traj, (b + 1) * block_size); ++i) {
            Trajectory t = simulate(land, beta, start, stop, Rng::stream(seed, i));
            for (const auto& v : t.visits) occupancy[b][v.state] += v.holding;
            if (t.stop == Trajectory::Stop::HitSet) ++hits[b][t.visits.back().state];
          }
        }
      });
    for (auto& th : pool) th.join();
    std::vector<double> occ(land.size(), 0.0);
    std::map<StateId, long> hit_counts;
    for (long b = 0; b < blocks; ++b) {
      for (StateId s = 0; s < land.size(); ++s) occ[s] += occupancy[b][s];
      for (auto [s, c] : hits[b]) hit_counts[s] += c;
    }
    result["occupation_time"] = occ;
    result["first_hit_counts"] = json::object();
    for (auto [s, c] : hit_counts) result["first_hit_counts"][std::to_string(s)] = c;
    std::cout << traj << " trajectories simulated\n";
  }
  if (!report_path.empty()) write_report(report_path, result);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Metastable hierarchy analysis for finite energy landscapes"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--jobs", jobs, "worker-thread bound for Monte Carlo runs");

  std::string input, report, emit;
  auto* analyze = app.add_subcommand("analyze", "full hierarchy of a landscape JSON file");
  analyze->add_option("input", input, "landscape JSON")->required();
  analyze->add_option("--report", report, "write the hierarchy report here");

  int K = 5, L = 4, N0 = 2;
  std::size_t cap = 10'000'000;
  bool do_analyze = false;
  auto* kaw = app.add_subcommand("kawasaki", "generate (and analyze) a Kawasaki lattice gas");
  kaw->add_option("--K", K, "torus width")->required();
  kaw->add_option("--L", L, "torus height")->required();
  kaw->add_option("--N0", N0, "strip width (particles = L*N0)")->required();
  kaw->add_option("--cap", cap, "enumeration state cap");
  kaw->add_option("--emit-landscape", emit, "write the enumerated landscape JSON here");
  kaw->add_flag("--analyze", do_analyze, "run the full hierarchy on the enumeration");
  kaw->add_option("--report", report, "write the hierarchy report here");

  std::vector<std::uint32_t> cycle_ids;
  std::string beta_grid = "5,10,20";
  long mc = 0;
  std::uint64_t seed = 1;
  auto* vexit = app.add_subcommand("verify-exit", "exit-distribution checks for a cycle");
  vexit->add_option("input", input, "landscape JSON")->required();
  vexit->add_option("--cycle", cycle_ids, "cycle state ids")->required()->delimiter(',');
  vexit->add_option("--beta-grid", beta_grid, "comma-separated betas");
  double mc_beta = 8.0;
  vexit->add_option("--mc", mc, "Monte Carlo trajectory count");
  vexit->add_option("--mc-beta", mc_beta, "inverse temperature for the MC cross-check");
  vexit->add_option("--seed", seed, "master seed");
  vexit->add_option("--report", report, "write the verification report here");

  int level_index = 1;
  double lambda = 1.0, threshold = 0.05;
  std::string rgrid = "4,6,8";
  auto* vres = app.add_subcommand("verify-resolvent", "resolvent-condition checks at a level");
  vres->add_option("input", input, "landscape JSON")->required();
  vres->add_option("--level", level_index, "hierarchy level (1-based)")->required();
  vres->add_option("--lambda", lambda, "resolvent parameter");
  vres->add_option("--beta-grid", rgrid, "comma-separated betas");
  vres->add_option("--threshold", threshold, "deviation bound at the largest beta");
  vres->add_option("--report", report, "write the verification report here");

  double beta = 1.0, time_budget = -1;
  std::uint32_t start = 0;
  std::vector<std::uint32_t> hit;
  long traj = 1;
  auto* sim = app.add_subcommand("simulate", "seeded Metropolis trajectories");
  sim->add_option("input", input, "landscape JSON")->required();
  sim->add_option("--beta", beta, "inverse temperature")->required();
  sim->add_option("--start", start, "start state")->required();
  sim->add_option("--hit", hit, "stop on entering these states")->delimiter(',');
  sim->add_option("--time", time_budget, "time budget");
  sim->add_option("--traj", traj, "number of trajectories");
  sim->add_option("--seed", seed, "master seed");
  sim->add_option("--report", report, "write the result JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(analyze)) return run_analyze(input, report);
    if (app.got_subcommand(kaw)) return run_kawasaki(K, L, N0, cap, emit, do_analyze, report);
    if (app.got_subcommand(vexit))
      return run_verify_exit(input, cycle_ids, beta_grid, mc, mc_beta, seed, jobs, report);
    if (app.got_subcommand(vres))
      return run_verify_resolvent(input, level_index, lambda, rgrid, threshold, report);
    if (app.got_subcommand(sim))
      return run_simulate(input, beta, start, hit, time_budget, traj, seed, jobs, report);
  } catch (const mhier::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
