#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fixflex/network.hpp"
#include "fixflex/scenario.hpp"

namespace fixflex::testing {

inline std::filesystem::path source_dir() { return FIXFLEX_SOURCE_DIR; }
inline std::filesystem::path scenario_path(const std::string& name) { return source_dir() / "scenarios" / name; }

inline StopIdx stop(Network& net, const std::string& id, const std::string& tag = "") {
  return net.add_stop(Stop{id, id, 0.0, 0.0, tag});
}

inline LinkIdx road(Network& net, StopIdx a, StopIdx b, Seconds t, Meters len = 1000.0) {
  return net.add_road_link(
      RoadLink{net.stop(a).id + net.stop(b).id, a, b, len, RunningTime::constant(t)});
}

/// Two-way chain s0 - s1 - ... with constant link times.
inline std::vector<StopIdx> chain(Network& net, const std::vector<std::string>& ids, Seconds t,
                                  const std::string& tag = "") {
  std::vector<StopIdx> out;
  for (const auto& id : ids) out.push_back(stop(net, id, tag));
  for (std::size_t i = 0; i + 1 < out.size(); ++i) {
    road(net, out[i], out[i + 1], t);
    road(net, out[i + 1], out[i], t);
  }
  return out;
}

inline FixLine make_line(const Network& net, const std::string& id, const std::vector<StopIdx>& stops,
                         Seconds headway, VehicleTypeIdx vt = VehicleTypeIdx{0}) {
  FixLine l;
  l.id = id;
  l.stops = stops;
  for (std::size_t i = 0; i + 1 < stops.size(); ++i) l.links.push_back(*net.link_between(stops[i], stops[i + 1]));
  l.timetable.headway = headway;
  l.timetable.first = 0.0;
  l.timetable.last = 1e9;
  l.vehicle_type = vt;
  finalize_line(l, net);
  return l;
}

/// The bundled toy scenario text with a given number of shuttles at A.
inline std::string toy_yaml(int at_a, int days = 75, int replications = 20) {
  return "name: toy\n"
         "network:\n"
         "  stops: [{id: A}, {id: B}]\n"
         "  links:\n"
         "    - {id: AB, from: A, to: B, length: 20000, running_time: {type: constant, value: 1800}}\n"
         "    - {id: BA, from: B, to: A, length: 20000, running_time: {type: constant, value: 1800}}\n"
         "vehicle_types:\n"
         "  - {id: bus, capacity: 100, seats: 100}\n"
         "  - {id: shuttle, capacity: 10, seats: 10}\n"
         "lines:\n"
         "  - {id: FIX_AB, stops: [A, B], headway: 600, first_departure: 0, vehicle_type: bus}\n"
         "flex:\n"
         "  vehicle_type: shuttle\n"
         "  service_area: [A, B]\n"
         "  fleet: [{stop: A, count: " +
         std::to_string(at_a) +
         "}, {stop: B, count: 10}]\n"
         "  assignment_interval: 1\n"
         "  rebalancing_interval: null\n"
         "demand:\n"
         "  window: 3600\n"
         "  cohorts: [{origin: A, destination: B, size: 100, time: 1}]\n"
         "paths: {max_transfers: 0}\n"
         "behavior: {beta_ivt: -0.0015742, transfer_penalty_ivt_seconds: 300, sharing: od_group}\n"
         "run: {days: " +
         std::to_string(days) + ", replications: " + std::to_string(replications) + ", seed: 7}\n";
}

}  // namespace fixflex::testing
