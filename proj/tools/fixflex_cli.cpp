// Command-line front end: run, validate, paths.
#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <atomic>
#include <map>
#include <memory>
#include <set>

#include "fixflex/engine.hpp"
#include "fixflex/output.hpp"
#include "fixflex/scenario.hpp"

using namespace fixflex;

namespace {

int report(const ConfigError& e) {
  std::cerr << "invalid scenario:\n";
  for (const std::string& v : e.violations()) std::cerr << "  " << v << '\n';
  return 1;
}

int cmd_validate(const std::string& file) {
  const ScenarioConfig cfg = parse_scenario(file);
  const World world = build_world(cfg);
  std::size_t paths = 0;
  for (const auto& [od, list] : world.paths.by_od()) paths += list.size();
  std::cout << cfg.name << ": ok (" << cfg.network.stop_count() << " stops, " << cfg.network.link_count()
            << " links, " << cfg.lines.size() << " lines, " << cfg.flex.initial_positions.size() << " shuttles, "
            << world.ods.size() << " ODs, " << paths << " paths)\n";
  return 0;
}

int cmd_paths(const std::string& file) {
  const ScenarioConfig cfg = parse_scenario(file);
  const World world = build_world(cfg);
  const Network& net = cfg.network;
  for (std::size_t i = 0; i < world.ods.size(); ++i) {
    const auto [o, d] = world.ods[i];
    const auto alts = world.paths.alternatives(o, d);
    std::set<std::string> types;
    for (PathIdx p : alts) types.insert(world.paths.path(p).type());
    std::cout << net.stop(o).id << " -> " << net.stop(d).id << " [" << world.od_categories[i] << "] " << alts.size()
              << " paths, types:";
    for (const std::string& t : types) std::cout << ' ' << t;
    std::cout << '\n';
    for (PathIdx p : alts) std::cout << "  " << describe(world.paths.path(p), net, cfg.lines) << '\n';
  }
  return 0;
}

struct RunArgs {
  std::string scenario;
  std::optional<int> days;
  std::optional<int> replications;
  std::optional<std::uint64_t> seed;
  std::string output;
  int parallel = 1;
  bool check_invariants = false;
  bool ledger = false;
  bool quiet = false;
};

int cmd_run(const RunArgs& a) {
  const ScenarioConfig cfg = parse_scenario(a.scenario);
  preflight_output_dir(a.output);
  const World world = build_world(cfg);

  RunOptions opt;
  opt.days = a.days.value_or(cfg.run.days);
  opt.replications = a.replications.value_or(cfg.run.replications);
  opt.seed = a.seed.value_or(cfg.run.seed);
  opt.parallel = a.parallel;
  opt.check_invariants = a.check_invariants || cfg.run.check_invariants;
  opt.ledger_snapshots = a.ledger;
  if (!a.quiet) {
    const int total = opt.days * opt.replications;
    auto done = std::make_shared<std::atomic<int>>(0);
    opt.progress = [done, total](int, int) {
      const int n = ++*done;
      if (n % 50 == 0 || n == total) std::fprintf(stderr, "\r%d/%d days", n, total);
      if (n == total) std::fprintf(stderr, "\n");
    };
  }
  const ScenarioResult result = run_scenario(world, opt);

  RunMeta meta;
  meta.scenario = cfg.name;
  meta.seed = opt.seed;
  meta.config_hash = config_hash(cfg);
  meta.days = opt.days;
  meta.replications = opt.replications;
  write_outputs(world, result, meta, a.output);
  if (!a.quiet) std::cerr << "outputs written to " << a.output << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed fixed-line and on-demand transit simulation with day-to-day learning"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(FIXFLEX_VERSION));

  std::string validate_file;
  auto* validate = app.add_subcommand("validate", "Check a scenario file and its choice sets");
  validate->add_option("--scenario", validate_file, "Scenario file")->required();

  std::string paths_file;
  auto* paths = app.add_subcommand("paths", "Print the generated choice set of every demand OD");
  paths->add_option("--scenario", paths_file, "Scenario file")->required();

  RunArgs ra;
  const char* env_out = std::getenv("FIXFLEX_OUTPUT_DIR");
  ra.output = env_out && *env_out ? env_out : "output";
  auto* run = app.add_subcommand("run", "Simulate a scenario and write CSV outputs");
  run->add_option("--scenario", ra.scenario, "Scenario file")->required();
  run->add_option("--days", ra.days, "Days per replication (default: scenario)")->check(CLI::PositiveNumber);
  run->add_option("--replications", ra.replications, "Replications (default: scenario)")->check(CLI::PositiveNumber);
  run->add_option("--seed", ra.seed, "Base seed (default: scenario)");
  run->add_option("--output", ra.output, "Output directory (default: $FIXFLEX_OUTPUT_DIR or ./output)");
  run->add_option("--parallel", ra.parallel, "Worker threads for replications")->check(CLI::PositiveNumber);
  run->add_flag("--check-invariants", ra.check_invariants, "Enable runtime supply-side assertions");
  run->add_flag("--ledger-snapshots", ra.ledger, "Also write ledger.csv with per-day learning state");
  run->add_flag("-q,--quiet", ra.quiet, "No progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*validate) return cmd_validate(validate_file);
    if (*paths) return cmd_paths(paths_file);
    return cmd_run(ra);
  } catch (const ConfigError& e) {
    return report(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
