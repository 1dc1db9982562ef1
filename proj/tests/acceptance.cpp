// Acceptance run: every criterion at its stated tolerance, one PASS/FAIL line each.
// Exit status is non-zero when any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fixtures.hpp"
#include "random_networks.hpp"
#include "fixflex/decisions.hpp"
#include "fixflex/engine.hpp"
#include "fixflex/fixed_service.hpp"
#include "fixflex/kpi.hpp"
#include "fixflex/learning.hpp"
#include "fixflex/output.hpp"

using namespace fixflex;
using namespace fixflex::testing;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int n, bool pass, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", n, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

struct Loaded {
  ScenarioConfig cfg;
  World world;
  explicit Loaded(const std::string& file) : cfg(parse_scenario(scenario_path(file))), world(build_world(cfg)) {}
};

ScenarioResult run_checked(const Loaded& s, int& invariant_failures, std::string& invariant_note) {
  RunOptions o;
  o.days = s.cfg.run.days;
  o.replications = s.cfg.run.replications;
  o.seed = s.cfg.run.seed;
  o.parallel = workers();
  o.check_invariants = true;
  try {
    return run_scenario(s.world, o);
  } catch (const InvariantViolation& e) {
    ++invariant_failures;
    invariant_note += s.cfg.name + ": " + e.what() + "; ";
  }
  return {};
}

// Totals of a type's experience sums over a day range and all replications.
struct TypeTotals {
  double ivt = 0.0;
  int completed = 0;
  [[nodiscard]] double mean() const { return completed > 0 ? ivt / completed : NAN; }
};

TypeTotals totals(const ScenarioResult& r, const std::string& cat, bool flex_including, int from, int to) {
  TypeTotals t;
  for (const ReplicationResult& rep : r.replications)
    for (const DaySummary& d : rep.days) {
      if (d.day < from || d.day > to) continue;
      const auto c = d.by_category.find(cat);
      if (c == d.by_category.end()) continue;
      for (const auto& [type, s] : c->second) {
        const bool has_flex = type.find("FLEX") != std::string::npos;
        if (type == "INCOMPLETE" || type == "WALK") continue;
        if (has_flex != flex_including) continue;
        t.ivt += s.experienced[1];
        t.completed += s.completed;
      }
    }
  return t;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main() {
  int invariant_failures = 0;
  std::string invariant_note;
  int invariant_runs = 0;

  // 1: day-1 split on the toy network
  {
    const auto t0 = std::chrono::steady_clock::now();
    const Loaded toy("toy_flex1.yaml");
    const ExperienceLedger ledger(toy.world.priors);
    const UtilityContext ctx{toy.world.paths, toy.cfg.network, ledger, toy.cfg.behavior.vot, toy.cfg.behavior.walk,
                             GroupIdx{0}};
    const StopIdx a = *toy.cfg.network.find_stop("A");
    const StopIdx b = *toy.cfg.network.find_stop("B");
    double v_fix = 0.0;
    double v_flex = 0.0;
    for (PathIdx p : toy.world.paths.alternatives(a, b))
      (toy.world.paths.path(p).type() == "FIX" ? v_fix : v_flex) =
          path_utility(toy.world.paths.path(p), 0, a, false, ctx);
    const double analytic = mnl_probabilities(std::vector<double>{v_flex, v_fix})[0];

    RunOptions o;
    o.days = 1;
    o.replications = 20;
    o.seed = toy.cfg.run.seed;
    const ScenarioResult r = run_scenario(toy.world, o);
    int flex = 0;
    int total = 0;
    for (const ReplicationResult& rep : r.replications)
      for (const auto& [type, s] : rep.days[0].by_category.at("ALL")) {
        total += s.travelers;
        if (type == "FLEX") flex += s.travelers;
      }
    const double empirical = static_cast<double>(flex) / total;
    report(1, std::abs(analytic - 0.72) <= 0.01 && std::abs(empirical - 0.72) <= 0.03 && total == 2000,
           fmt("analytic FLEX %.4f (0.72 +/- 0.01), empirical %.4f over %d travelers (0.72 +/- 0.03), %.2f s",
               analytic, empirical, total, seconds_since(t0)));
  }

  // 2 (and 7 for the toy scenarios): convergence with 1/3/5/7 vehicles at A
  {
    const auto t0 = std::chrono::steady_clock::now();
    const int counts[] = {1, 3, 5, 7};
    const double targets[] = {0.22, 0.43, 0.60, 0.70};
    bool pass = true;
    std::string detail;
    for (int i = 0; i < 4; ++i) {
      const Loaded toy("toy_flex" + std::to_string(counts[i]) + ".yaml");
      const ScenarioResult r = run_checked(toy, invariant_failures, invariant_note);
      ++invariant_runs;
      const double share = r.replications.empty() ? NAN : mean_share(r, "ALL", "FLEX", 60, 75);
      const bool ok = std::abs(share - targets[i]) <= 0.06;
      pass = pass && ok;
      detail += fmt("%d veh %.1f%% (target %.0f%%)%s; ", counts[i], 100 * share, 100 * targets[i], ok ? "" : " OUT");
    }
    report(2, pass, detail + fmt("days 60-75, 20 reps, +/-6 pp, %.1f s", seconds_since(t0)));
  }

  // 3: worst-case FLEX wait with one vehicle at A
  {
    const Loaded toy("toy_flex1.yaml");
    RunOptions o;
    o.days = 1;
    o.replications = 20;
    o.seed = toy.cfg.run.seed;
    const ScenarioResult r = run_scenario(toy.world, o);
    bool pass = true;
    int overflow = 0;
    double worst_dev = 0.0;
    for (const ReplicationResult& rep : r.replications) {
      std::vector<Seconds> w = rep.days[0].flex_first_leg_waits;
      std::sort(w.begin(), w.end());
      for (std::size_t k = 0; k < w.size(); ++k) {
        const double target = k < 10 ? 0.0 : 1800.0;
        worst_dev = std::max(worst_dev, std::abs(w[k] - target));
        if (k >= 10) ++overflow;
      }
      pass = pass && w.size() > 10;
    }
    pass = pass && worst_dev <= 1.0;
    report(3, pass,
           fmt("%d overflow riders over 20 reps wait 1800 s, first 10 per day wait 0 s; max deviation %.3f s (<= 1 s)",
               overflow, worst_dev));
  }

  // 4: MSA running mean
  {
    RandomStream rng(404);
    double worst = 0.0;
    int updates = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      ExperienceLedger l({{300.0, 1800.0}});
      double sum = 0.0;
      const int days = 1 + static_cast<int>(rng.uniform() * 150);
      for (int d = 1; d <= days; ++d) {
        const double x = rng.uniform() * std::pow(10.0, rng.uniform() * 5);
        sum += x;
        const double got = l.msa_update(GroupIdx{0}, ComponentIdx{0}, Quantity::Wait, x).experience;
        const double mean = sum / d;
        worst = std::max(worst, std::abs(got - mean) / std::max(std::abs(mean), 1e-300));
        ++updates;
      }
    }
    report(4, worst <= 1e-9, fmt("%d updates, max relative error %.3g (<= 1e-9)", updates, worst));
  }

  // 5: choice-model properties
  {
    RandomStream rng(505);
    double norm = 0.0;
    double shift = 0.0;
    bool bounds = true;
    for (int trial = 0; trial < 10000; ++trial) {
      const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 10);
      std::vector<double> v(n);
      for (double& x : v) x = (rng.uniform() - 0.5) * 50.0;
      const auto p = mnl_probabilities(v);
      double s = 0.0;
      for (double x : p) s += x;
      norm = std::max(norm, std::abs(s - 1.0));
      const double c = (rng.uniform() - 0.5) * 1000.0;
      std::vector<double> w = v;
      for (double& x : w) x += c;
      const auto q = mnl_probabilities(w);
      for (std::size_t i = 0; i < n; ++i) shift = std::max(shift, std::abs(p[i] - q[i]));
      const double ls = action_logsum(v);
      const double mx = *std::max_element(v.begin(), v.end());
      bounds = bounds && ls >= mx - 1e-12 && ls <= mx + std::log(static_cast<double>(n)) + 1e-12;
    }
    report(5, norm <= 1e-12 && shift <= 1e-12 && bounds,
           fmt("1e4 vectors: |sum p - 1| <= %.2g, translation change <= %.2g, logsum bounds %s", norm, shift,
               bounds ? "hold" : "violated"));
  }

  // 6: partitions against brute force
  {
    RandomStream rng(606);
    PartitionReport pr;
    for (int trial = 0; trial < 300; ++trial) {
      const auto w = random_world(rng);
      check_partitions(*w, rng, pr);
    }
    report(6, pr.mismatches.empty(),
           fmt("%d path sets on random networks of 3-8 stops, %zu mismatches%s", pr.sets_checked,
               pr.mismatches.size(), pr.mismatches.empty() ? "" : (" e.g. " + pr.mismatches[0]).c_str()));
  }

  // 8: dwell time
  {
    const double e1 = std::abs(dwell_time(0, 0) - 5.14);
    const double e2 = std::abs(dwell_time(28, 0) - 102.58);
    const double e3 = std::abs(dwell_time(2, 3) - 17.20);
    report(8, std::max({e1, e2, e3}) <= 1e-9,
           fmt("dwell(0,0)=%.10g dwell(28,0)=%.10g dwell(2,3)=%.10g", dwell_time(0, 0), dwell_time(28, 0),
               dwell_time(2, 3)));
  }

  // 9 (and 7 for the branched scenario): stylized branched network
  {
    const auto t0 = std::chrono::steady_clock::now();
    const Loaded br("branched.yaml");
    const ScenarioResult r = run_checked(br, invariant_failures, invariant_note);
    ++invariant_runs;
    const int last = br.cfg.run.days;
    const int from = last - 9;
    const double b2b_flex = r.replications.empty() ? NAN : mean_share(r, "B2B", "FLEX", from, last);
    bool c2c_all_fix = !r.replications.empty();
    for (const ReplicationResult& rep : r.replications)
      for (const DaySummary& d : rep.days)
        for (const auto& [type, s] : d.by_category.at("C2C"))
          if (type != "FIX" && type != "INCOMPLETE" && s.travelers > 0) c2c_all_fix = false;
    const double c2c_fix = r.replications.empty() ? NAN : mean_share(r, "C2C", "FIX", 1, last);
    const double c2c_incomplete = r.replications.empty() ? NAN : mean_share(r, "C2C", "INCOMPLETE", 1, last);
    std::string ivt_detail;
    bool ivt_ok = !r.replications.empty();
    for (const char* cat : {"C2B", "B2C", "B2B"}) {
      const TypeTotals fix = totals(r, cat, false, from, last);
      const TypeTotals flex = totals(r, cat, true, from, last);
      const bool ok = fix.mean() >= flex.mean();
      ivt_ok = ivt_ok && ok;
      ivt_detail += fmt("%s FIX %.0f s vs FLEX-incl %.0f s%s; ", cat, fix.mean(), flex.mean(), ok ? "" : " (FIX lower)");
    }
    const std::string span = fmt("days %d-%d of %d x %d reps", from, last, last, br.cfg.run.replications);
    report(9, b2b_flex > 0.5, fmt("(a) B2B FLEX share %.1f%% (> 50%%), %s", 100 * b2b_flex, span.c_str()));
    report(9, c2c_all_fix,
           fmt("(b) C2C chose only FIX on every day (FIX %.2f%%, still travelling at horizon %.2f%%)", 100 * c2c_fix,
               100 * c2c_incomplete));
    report(9, ivt_ok, "(c) mean crowding-weighted ivt, FIX >= FLEX-including: " + ivt_detail + span +
                          fmt(", %.0f s", seconds_since(t0)));
  }

  // 7: runtime checks were on in every scenario run above
  report(7, invariant_failures == 0,
         fmt("%d bundled scenarios x 20 reps with capacity/FIFO/no-backtracking/wait-identity checks, %d violations%s",
             invariant_runs, invariant_failures, invariant_note.empty() ? "" : (": " + invariant_note).c_str()));

  // 10: byte-identical reruns through the command-line tool
  {
    const fs::path base = fs::temp_directory_path() / ("fixflex_accept_" + std::to_string(::getpid()));
    fs::remove_all(base);
    bool pass = true;
    std::string detail;
    struct Case {
      const char* scenario;
      const char* args;
    };
    for (const Case c : {Case{"toy_flex3.yaml", "--days 20 --replications 4 --ledger-snapshots"},
                         Case{"branched.yaml", "--days 3 --replications 2 --parallel 2"}}) {
      std::vector<fs::path> dirs;
      for (int k = 0; k < 2; ++k) {
        const fs::path out = base / (std::string(c.scenario) + std::to_string(k));
        const std::string cmd = std::string(FIXFLEX_CLI) + " run -q --scenario " + scenario_path(c.scenario).string() +
                                " " + c.args + " --output " + out.string();
        if (std::system(cmd.c_str()) != 0) pass = false;
        dirs.push_back(out);
      }
      int files = 0;
      for (const auto& e : fs::directory_iterator(dirs[0])) {
        ++files;
        if (slurp(e.path()) != slurp(dirs[1] / e.path().filename())) {
          pass = false;
          detail += std::string(c.scenario) + "/" + e.path().filename().string() + " differs; ";
        }
      }
      pass = pass && files >= 5;
      detail += fmt("%s: %d files compared; ", c.scenario, files);
    }
    fs::remove_all(base);
    report(10, pass, detail + "identical config and seed");
  }

  std::printf("%s: %d failing criterion line(s)\n", failures == 0 ? "ALL PASS" : "NOT ALL PASS", failures);
  return failures == 0 ? 0 : 1;
}
