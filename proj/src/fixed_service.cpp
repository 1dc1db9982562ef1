#include "fixflex/fixed_service.hpp"

#include <algorithm>
#include <cmath>

namespace fixflex {

Seconds Timetable::nominal_headway() const {
  if (headway) return *headway;
  if (explicit_departures.size() < 2) return 0.0;
  return (explicit_departures.back() - explicit_departures.front()) /
         static_cast<double>(explicit_departures.size() - 1);
}

int FixLine::position_of(StopIdx s) const {
  const auto it = std::find(stops.begin(), stops.end(), s);
  return it == stops.end() ? -1 : static_cast<int>(it - stops.begin());
}

void finalize_line(FixLine& line, const Network& net) {
  if (line.stops.size() < 2) throw std::invalid_argument("line '" + line.id + "' needs at least two stops");
  if (line.links.size() + 1 != line.stops.size())
    throw std::invalid_argument("line '" + line.id + "': link count must be stop count - 1");
  line.cumulative_free_flow.assign(1, 0.0);
  line.cumulative_length.assign(1, 0.0);
  for (std::size_t i = 0; i < line.links.size(); ++i) {
    const RoadLink& l = net.link(line.links[i]);
    if (l.from != line.stops[i] || l.to != line.stops[i + 1])
      throw std::invalid_argument("line '" + line.id + "': link '" + l.id + "' does not join consecutive stops");
    line.cumulative_free_flow.push_back(line.cumulative_free_flow.back() + l.running_time.free_flow());
    line.cumulative_length.push_back(line.cumulative_length.back() + l.length);
  }
  const Timetable& tt = line.timetable;
  if (tt.headway) {
    if (!(*tt.headway > 0.0)) throw std::invalid_argument("line '" + line.id + "': headway must be positive");
  } else {
    if (tt.explicit_departures.empty()) throw std::invalid_argument("line '" + line.id + "': no departures");
    for (std::size_t i = 1; i < tt.explicit_departures.size(); ++i)
      if (!(tt.explicit_departures[i] > tt.explicit_departures[i - 1]))
        throw std::invalid_argument("line '" + line.id + "': departure times must be strictly increasing");
  }
}

std::vector<Seconds> dispatch_timetable(const FixLine& line, Seconds service_end, bool warm_up) {
  const Timetable& tt = line.timetable;
  std::vector<Seconds> out;
  if (!tt.headway) {
    out = tt.explicit_departures;
  } else {
    const Seconds h = *tt.headway;
    const Seconds end = std::min(tt.last, service_end);
    for (int k = 0;; ++k) {
      const Seconds t = tt.first + k * h;
      if (t >= end - 1e-9) break;
      out.push_back(t);
    }
  }
  const Seconds h = tt.nominal_headway();
  if (warm_up && h > 0.0 && !out.empty()) {
    const Seconds cycle = line.cumulative_free_flow.back();
    const int extra = static_cast<int>(std::ceil(cycle / h - 1e-9));
    std::vector<Seconds> pre;
    for (int k = extra; k >= 1; --k) pre.push_back(out.front() - k * h);
    out.insert(out.begin(), pre.begin(), pre.end());
  }
  return out;
}

void StopQueue::join(TravelerIdx t, Seconds at, std::vector<LineIdx> lines) {
  entries_.push_back(QueueEntry{t, at, next_sequence_++, std::move(lines)});
}

void StopQueue::remove(TravelerIdx t) {
  const auto it = std::find_if(entries_.begin(), entries_.end(), [&](const QueueEntry& e) { return e.traveler == t; });
  if (it != entries_.end()) entries_.erase(it);
}

ArrivalOutcome process_vehicle_arrival(FixTrip& trip, StopIdx stop, StopQueue& queue, Seconds now,
                                       const std::function<bool(TravelerIdx)>& wants_to_board,
                                       const std::function<StopIdx(TravelerIdx)>& choose_alight) {
  ArrivalOutcome out;
  std::vector<Rider> staying;
  staying.reserve(trip.onboard.size());
  for (Rider& r : trip.onboard) (r.alight == stop ? out.alighted : staying).push_back(r);
  trip.onboard = std::move(staying);

  std::vector<TravelerIdx> willing;
  for (const QueueEntry& e : queue.entries()) {
    if (std::find(e.lines.begin(), e.lines.end(), trip.line) == e.lines.end()) continue;
    if (wants_to_board(e.traveler)) willing.push_back(e.traveler);
  }
  const std::size_t room = static_cast<std::size_t>(trip.capacity) - trip.onboard.size();
  for (std::size_t i = 0; i < willing.size(); ++i) {
    if (i < room) {
      out.boarded.push_back(willing[i]);
      queue.remove(willing[i]);
    } else {
      out.denied.push_back(willing[i]);
    }
  }
  for (TravelerIdx t : out.boarded) trip.onboard.push_back(Rider{t, choose_alight(t), now});

  if (trip.onboard.size() > static_cast<std::size_t>(trip.capacity))
    throw InvariantViolation("fixed-line vehicle over capacity");

  trip.boardings += static_cast<int>(out.boarded.size());
  trip.alightings += static_cast<int>(out.alighted.size());
  trip.load_history.push_back(static_cast<int>(trip.onboard.size()));
  trip.last_arrival = now;
  out.dwell = dwell_time(static_cast<int>(out.boarded.size()), static_cast<int>(out.alighted.size()));
  return out;
}

}  // namespace fixflex
