#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace rail {

// All times are integers on the scheduling grid: minutes multiplied by the
// scenario resolution r. Conversion back to minutes happens only in reports.
using GridTime = std::int64_t;

// (train, station) departure event.
using EventKey = std::pair<std::string, std::string>;

struct RailError : std::runtime_error {
  std::string code;
  RailError(std::string c, const std::string& msg)
      : std::runtime_error(msg), code(std::move(c)) {}
};

struct Diagnostic {
  std::string code;
  std::string message;
};

enum class TrackMode {
  OneWay,        // usable only in the declared from->to direction
  Bidirectional  // usable in both directions
};

struct SegmentTrack {
  std::string id;
  TrackMode mode = TrackMode::Bidirectional;
};

struct LineSegment {
  std::string from, to;
  std::vector<SegmentTrack> tracks;

  bool joins(const std::string& a, const std::string& b) const {
    return (from == a && to == b) || (from == b && to == a);
  }
  const SegmentTrack* find_track(const std::string& id) const;
};

struct Station {
  std::string id;
  std::vector<std::string> switch_groups;
  // Station track -> alternative entry/exit paths, each path a set of switch
  // groups. A track mapped to a single empty path needs no switches.
  std::map<std::string, std::vector<std::set<std::string>>> tracks;
};

struct Train {
  std::string id;
  double weight = 1.0;
  std::vector<std::string> route;  // >= 2 stations, no immediate repetition
  std::map<std::string, GridTime> scheduled_arrival;    // t_schedule(j, s_in)
  std::map<std::string, GridTime> scheduled_departure;  // t_schedule(j, s_out)
  // Stations whose departure delay enters the objective.
  std::set<std::string> counted;

  // A departure event exists wherever a scheduled departure is given. The
  // final station of a route may omit it (the train terminates there).
  bool has_departure(const std::string& s) const {
    return scheduled_departure.count(s) != 0;
  }
  std::optional<std::string> prior_station(const std::string& s) const;
  std::optional<std::string> next_station(const std::string& s) const;
};

struct TimingParams {
  // (train, s, s') -> minimal passing time between s and s'
  std::map<std::tuple<std::string, std::string, std::string>, GridTime> pass;
  // (train, s, s') -> time to release line blocks behind the train
  std::map<std::tuple<std::string, std::string, std::string>, GridTime> blocks;
  // (train, s) -> minimal stop at s
  std::map<std::pair<std::string, std::string>, GridTime> stop;
  // (arriving, departing, s) -> rolling stock preparation time
  std::map<std::tuple<std::string, std::string, std::string>, GridTime> prep;
  // (j, j', s) -> shared-resource release time, ordered pair
  std::map<std::tuple<std::string, std::string, std::string>, GridTime> res;
  std::optional<GridTime> res_default;

  std::optional<GridTime> pass_time(const std::string& j, const std::string& s,
                                    const std::string& s2) const;
  std::optional<GridTime> blocks_time(const std::string& j, const std::string& s,
                                      const std::string& s2) const;
  GridTime stop_time(const std::string& j, const std::string& s) const;
  std::optional<GridTime> prep_time(const std::string& jin, const std::string& jout,
                                    const std::string& s) const;
  std::optional<GridTime> resource_time(const std::string& j, const std::string& j2,
                                        const std::string& s) const;
};

struct Scenario {
  // (train, station) -> primary delay added to the scheduled departure
  std::map<std::pair<std::string, std::string>, GridTime> primary_delay;
  std::map<std::string, GridTime> d_max;  // per train, grid units
  int resolution = 1;                     // grid steps per minute
};

struct Turnaround {
  std::string arriving, departing, station;
  auto operator<=>(const Turnaround&) const = default;
};

struct Routing {
  // (train, from, to) in travel order -> segment track id
  std::map<std::tuple<std::string, std::string, std::string>, std::string> line_track;
  // (train, station) -> station track id
  std::map<std::pair<std::string, std::string>, std::string> station_track;
  // (train, station) -> chosen switch-group path
  std::map<std::pair<std::string, std::string>, std::set<std::string>> station_path;

  auto operator<=>(const Routing&) const = default;
};

struct DispatchInstance {
  std::vector<Station> stations;
  std::vector<LineSegment> segments;
  std::vector<Train> trains;
  TimingParams timing;
  Scenario scenario;
  std::vector<Turnaround> turnarounds;
  Routing default_routing;

  const Station* find_station(const std::string& id) const;
  const Train* find_train(const std::string& id) const;
  const LineSegment* find_segment(const std::string& a, const std::string& b) const;
  GridTime d_max_of(const std::string& train) const;
};

// Segment track in a particular orientation: (a, b) is the travel direction
// for same-direction sets, or the declared orientation for opposite sets.
struct SegKey {
  std::string a, b, track;
  auto operator<=>(const SegKey&) const = default;
};

struct ConflictSets {
  // key oriented along the common travel direction; unordered id-sorted pairs
  std::map<SegKey, std::set<std::pair<std::string, std::string>>> same_direction;
  // key in declared segment orientation; ordered pairs (forward, reverse)
  std::map<SegKey, std::set<std::pair<std::string, std::string>>> single_track_opposite;
  // (station, track) -> trains, only entries with >= 2 trains
  std::map<std::pair<std::string, std::string>, std::set<std::string>> shared_station_track;
  // (station, switch group) -> trains; groups whose every pair already shares
  // a station track there are dropped entirely
  std::map<std::pair<std::string, std::string>, std::set<std::string>> shared_switch;
  // station -> (arriving, departing)
  std::map<std::string, std::set<std::pair<std::string, std::string>>> rolling_stock_pairs;
  // unordered train pair -> consecutive station pairs shared in the same order
  std::map<std::pair<std::string, std::string>,
           std::vector<std::pair<std::string, std::string>>> common_path;

  // Pairs sharing a switch group at s, excluding pairs that also share a
  // station track at s. Each pair reported once with the groups it shares.
  std::vector<std::tuple<std::string, std::string, std::set<std::string>>>
  switch_pairs(const std::string& station) const;
};

enum class ConflictKind { Span, SingleTrack, StationTrack, Switch, RollingStock };

std::string to_string(ConflictKind k);

// A shared-resource conflict between two trains, as picked and rerouted by
// the hybrid loop.
struct Conflict {
  ConflictKind kind{};
  std::string a, b;        // trains; unordered kinds keep a < b by id
  std::string s_from, s_to;  // segment endpoints (travel order) for line kinds
  std::string station;       // for station kinds
  std::string track;         // segment or station track
  std::set<std::string> switches;

  std::string label() const;
  auto operator<=>(const Conflict&) const = default;
};

std::vector<Conflict> enumerate_conflicts(const DispatchInstance& instance,
                                          const ConflictSets& sets);

std::vector<Diagnostic> validate_instance(const DispatchInstance& instance,
                                          const Routing& routing);

ConflictSets derive_conflict_sets(const DispatchInstance& instance,
                                  const Routing& routing);

// Earliest conflict-free departure time per (train, station) honoring the
// schedule, the minimal passing/stay chain and the scenario's primary delays.
std::map<EventKey, GridTime> propagate_unavoidable_delays(
    const DispatchInstance& instance, const Routing& routing);

struct Window {
  GridTime lb = 0, ub = 0;  // inclusive grid bounds
  GridTime size() const { return ub - lb + 1; }
};

std::map<EventKey, Window> departure_windows(const DispatchInstance& instance,
                                             const Routing& routing);

}  // namespace rail
