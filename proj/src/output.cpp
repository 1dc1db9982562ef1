#include "fixflex/output.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <map>
#include <stdexcept>

#include "fixflex/kpi.hpp"

namespace fixflex {

namespace fs = std::filesystem;

std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

namespace {

std::ofstream open_csv(const fs::path& file) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  return out;
}

std::string optional_number(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

void write_learning_curves(const World& world, const ScenarioResult& result, const fs::path& file) {
  std::ofstream out = open_csv(file);
  out << "day,replication,category,path_type,quantity,anticipated_s,experienced_s,n\n";
  for (const ReplicationResult& rep : result.replications)
    for (const DaySummary& d : rep.days)
      for (const std::string& cat : world.categories) {
        const auto& by_type = d.by_category.at(cat);
        for (const std::string& type : world.category_types.at(cat)) {
          const auto it = by_type.find(type);
          const TypeStats s = it == by_type.end() ? TypeStats{} : it->second;
          for (int q = 0; q < 2; ++q) {
            const auto qi = static_cast<std::size_t>(q);
            out << d.day << ',' << d.replication << ',' << cat << ',' << type << ','
                << to_string(static_cast<Quantity>(q)) << ',';
            if (s.completed > 0)
              out << format_number(s.anticipated[qi] / s.completed) << ','
                  << format_number(s.experienced[qi] / s.completed);
            else
              out << ',';
            out << ',' << s.completed << '\n';
          }
        }
      }
}

void write_mode_split(const World& world, const ScenarioResult& result, const fs::path& file,
                      const fs::path& mean_file) {
  const std::vector<std::string> types = split_columns(world);
  auto header = [&](std::ofstream& out, bool with_rep) {
    out << "day,";
    if (with_rep) out << "replication,";
    out << "category,travelers,completed";
    for (const std::string& t : types) out << ",n_" << t;
    for (const std::string& t : types) out << ",share_" << t;
    out << '\n';
  };

  std::ofstream out = open_csv(file);
  header(out, true);
  std::map<std::pair<int, std::string>, std::vector<ModeSplitRow>> by_day;
  for (const ReplicationResult& rep : result.replications)
    for (const DaySummary& d : rep.days)
      for (ModeSplitRow& row : mode_split(d, world, types)) {
        out << row.day << ',' << row.replication << ',' << row.category << ',' << row.travelers << ','
            << row.completed;
        for (int c : row.counts) out << ',' << c;
        for (double s : row.shares) out << ',' << format_number(s);
        out << '\n';
        by_day[{row.day, row.category}].push_back(std::move(row));
      }

  std::ofstream mean = open_csv(mean_file);
  header(mean, false);
  for (const auto& [key, rows] : by_day) {
    const double n = static_cast<double>(rows.size());
    std::vector<double> counts(types.size(), 0.0);
    std::vector<double> shares(types.size(), 0.0);
    double travelers = 0.0;
    double completed = 0.0;
    for (const ModeSplitRow& r : rows) {
      travelers += r.travelers;
      completed += r.completed;
      for (std::size_t i = 0; i < types.size(); ++i) {
        counts[i] += r.counts[i];
        shares[i] += r.shares[i];
      }
    }
    mean << key.first << ',' << key.second << ',' << format_number(travelers / n) << ','
         << format_number(completed / n);
    for (double c : counts) mean << ',' << format_number(c / n);
    for (double s : shares) mean << ',' << format_number(s / n);
    mean << '\n';
  }
}

void write_kpis(const ScenarioResult& result, const fs::path& file) {
  std::ofstream out = open_csv(file);
  out << "day,replication,service,pkt_km,vkt_km,seats,pkt_vkt_ratio,load_factor,zero_vkt,"
         "denied_travelers,injected,completed,stranded,rebalancing_moves\n";
  for (const ReplicationResult& rep : result.replications)
    for (const DaySummary& d : rep.days) {
      const KpiRecord k = compute_kpis(d);
      for (const auto& [name, s] : {std::pair<const char*, const ServiceKpi&>{"FIX", k.fix}, {"FLEX", k.flex}}) {
        out << k.day << ',' << k.replication << ',' << name << ',' << format_number(s.pkt_km) << ','
            << format_number(s.vkt_km) << ',' << s.seats << ',' << optional_number(s.ratio) << ','
            << optional_number(s.load_factor) << ',' << (s.zero_vkt() ? 1 : 0) << ',' << k.denied_travelers << ','
            << k.injected << ',' << k.completed << ',' << k.stranded << ',' << k.rebalancing_moves << '\n';
      }
    }
}

void write_ledger(const ScenarioResult& result, const fs::path& file) {
  std::ofstream out = open_csv(file);
  out << "replication,day,group,component,quantity,prior_s,experience_s,n_exp\n";
  for (std::size_t r = 0; r < result.replications.size(); ++r)
    for (const LedgerRow& row : result.replications[r].ledger_rows)
      out << r << ',' << row.day << ',' << row.group.value << ',' << row.component.value << ','
          << to_string(row.quantity) << ',' << format_number(row.prior) << ',' << format_number(row.experience)
          << ',' << row.n_exp << '\n';
}

}  // namespace

void preflight_output_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
  const fs::path probe = dir / ".fixflex_write_probe";
  {
    std::ofstream f(probe);
    if (!f || !(f << "ok") || !f.flush()) throw std::runtime_error("output directory is not writable: " + dir.string());
  }
  fs::remove(probe, ec);
}

void write_outputs(const World& world, const ScenarioResult& result, const RunMeta& meta, const fs::path& dir) {
  preflight_output_dir(dir);
  write_learning_curves(world, result, dir / "learning_curves.csv");
  write_mode_split(world, result, dir / "mode_split.csv", dir / "mode_split_mean.csv");
  write_kpis(result, dir / "kpis.csv");
  const bool snapshots = std::any_of(result.replications.begin(), result.replications.end(),
                                     [](const ReplicationResult& r) { return !r.ledger_rows.empty(); });
  if (snapshots) write_ledger(result, dir / "ledger.csv");

  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(meta.config_hash));
  const nlohmann::ordered_json j = {
      {"scenario", meta.scenario}, {"seed", meta.seed},           {"config_hash", hash},
      {"days", meta.days},         {"replications", meta.replications}, {"version", meta.version},
  };
  std::ofstream out = open_csv(dir / "run_meta.json");
  out << j.dump(2) << '\n';
}

}  // namespace fixflex
