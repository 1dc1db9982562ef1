#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "fixflex/engine.hpp"

namespace fixflex {

struct RunMeta {
  std::string scenario;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  int days = 0;
  int replications = 0;
  std::string version = FIXFLEX_VERSION;
};

/// Creates the directory if needed and checks that a file can be written
/// there. Throws std::runtime_error otherwise.
void preflight_output_dir(const std::filesystem::path& dir);

/// Writes learning_curves.csv, mode_split.csv, mode_split_mean.csv, kpis.csv,
/// run_meta.json and, when snapshots were taken, ledger.csv.
void write_outputs(const World& world, const ScenarioResult& result, const RunMeta& meta,
                   const std::filesystem::path& dir);

/// Fixed textual rendering used in every CSV (17 significant digits at most).
[[nodiscard]] std::string format_number(double v);

}  // namespace fixflex
