#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fixflex/core.hpp"
#include "fixflex/network.hpp"

namespace fixflex {

struct VehicleType {
  std::string id;
  int capacity = 0;
  int seats = 0;
};

/// Stop service time for n_board boardings and n_alight alightings.
[[nodiscard]] constexpr Seconds dwell_time(int n_board, int n_alight) {
  return 5.14 + 3.48 * n_board + 1.70 * n_alight;
}

/// Departures either on an even headway in [first, last) or as an explicit list.
struct Timetable {
  std::optional<Seconds> headway;
  Seconds first = 0.0;
  Seconds last = 0.0;
  std::vector<Seconds> explicit_departures;

  /// Mean planned interval between departures.
  [[nodiscard]] Seconds nominal_headway() const;
};

struct FixLine {
  std::string id;
  std::vector<StopIdx> stops;
  /// links[i] runs stops[i] -> stops[i + 1].
  std::vector<LinkIdx> links;
  Timetable timetable;
  VehicleTypeIdx vehicle_type;
  /// Free-flow time from the first stop to stops[i].
  std::vector<Seconds> cumulative_free_flow;
  std::vector<Meters> cumulative_length;

  /// Position of s in the stop sequence, or -1.
  [[nodiscard]] int position_of(StopIdx s) const;
  [[nodiscard]] Seconds free_flow_between(int from_pos, int to_pos) const {
    return cumulative_free_flow[static_cast<std::size_t>(to_pos)] - cumulative_free_flow[static_cast<std::size_t>(from_pos)];
  }
};

/// Checks stop/link consistency and fills the cumulative tables.
void finalize_line(FixLine& line, const Network& net);

/// Trip start times at the first stop. With warm_up, extra trips are
/// prepended at the planned headway so that vehicles already cover the whole
/// line at even spacing by the first regular departure.
[[nodiscard]] std::vector<Seconds> dispatch_timetable(const FixLine& line, Seconds service_end, bool warm_up);

struct Rider {
  TravelerIdx traveler;
  StopIdx alight;
  Seconds boarded_at = 0.0;
};

/// One timetabled vehicle run along a line.
struct FixTrip {
  LineIdx line;
  int trip_no = 0;
  Seconds start = 0.0;
  int capacity = 0;
  int seats = 0;
  /// Index of the stop most recently arrived at.
  int position = -1;
  /// Boarding order; the first `seats` riders are seated.
  std::vector<Rider> onboard;
  Seconds last_arrival = 0.0;
  int boardings = 0;
  int alightings = 0;
  /// Onboard count when leaving each served stop.
  std::vector<int> load_history;

  [[nodiscard]] double load_factor() const { return static_cast<double>(onboard.size()) / seats; }
  [[nodiscard]] bool is_seated(std::size_t rider_pos) const { return rider_pos < static_cast<std::size_t>(seats); }
};

struct QueueEntry {
  TravelerIdx traveler;
  Seconds joined = 0.0;
  std::uint64_t sequence = 0;
  /// Lines this traveler would consider boarding.
  std::vector<LineIdx> lines;
};

/// First-in-first-out queue of travelers waiting for fixed-line vehicles at one stop.
class StopQueue {
 public:
  void join(TravelerIdx t, Seconds at, std::vector<LineIdx> lines);
  void remove(TravelerIdx t);
  [[nodiscard]] std::span<const QueueEntry> entries() const { return entries_; }
  [[nodiscard]] std::size_t size() const { return entries_.size(); }
  [[nodiscard]] bool empty() const { return entries_.empty(); }

 private:
  std::vector<QueueEntry> entries_;
  std::uint64_t next_sequence_ = 0;
};

struct ArrivalOutcome {
  std::vector<Rider> alighted;
  std::vector<TravelerIdx> boarded;
  std::vector<TravelerIdx> denied;
  Seconds dwell = 0.0;
};

/// Serves a stop: riders whose alighting stop is here leave, then waiting
/// travelers that want this line are admitted in queue order until the
/// vehicle is full. Travelers that wanted to board but did not fit are
/// reported as denied and stay queued.
///
/// wants_to_board is asked once per queued traveler awaiting this line, in
/// queue order; choose_alight is asked for each admitted traveler.
ArrivalOutcome process_vehicle_arrival(FixTrip& trip, StopIdx stop, StopQueue& queue, Seconds now,
                                       const std::function<bool(TravelerIdx)>& wants_to_board,
                                       const std::function<StopIdx(TravelerIdx)>& choose_alight);

}  // namespace fixflex
