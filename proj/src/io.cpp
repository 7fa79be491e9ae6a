#include "rail/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace rail {

using nlohmann::json;

namespace {

struct SchemaReader {
  std::vector<Diagnostic> diags;

  void error(const std::string& where, const std::string& msg) {
    diags.push_back({"schema", where + ": " + msg});
  }

  void check_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed) {
    if (!obj.is_object()) {
      error(where, "expected an object");
      return;
    }
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!allowed.count(it.key())) error(where, "unknown key '" + it.key() + "'");
  }

  GridTime grid_time(const json& v, const std::string& where) {
    if (v.is_number_integer()) return v.get<GridTime>();
    if (v.is_number_float())
      error(where, "time " + v.dump() + " is not an integer on the grid");
    else
      error(where, "expected an integer time");
    return 0;
  }

  std::string str(const json& v, const std::string& where) {
    if (v.is_string()) return v.get<std::string>();
    error(where, "expected a string");
    return {};
  }
};

DispatchInstance parse_json(const json& root) {
  SchemaReader r;
  DispatchInstance inst;

  r.check_keys(root, "instance",
               {"stations", "segments", "trains", "timing", "scenario", "turnarounds",
                "routing_default"});

  if (root.contains("stations") && root["stations"].is_array()) {
    for (const auto& js : root["stations"]) {
      r.check_keys(js, "station", {"id", "switch_groups", "tracks"});
      Station s;
      if (js.contains("id")) s.id = r.str(js["id"], "station.id");
      if (js.contains("switch_groups"))
        for (const auto& g : js["switch_groups"])
          s.switch_groups.push_back(r.str(g, "switch_groups"));
      if (js.contains("tracks")) {
        for (auto it = js["tracks"].begin(); it != js["tracks"].end(); ++it) {
          std::vector<std::set<std::string>> alts;
          if (!it.value().is_array()) {
            r.error("station " + s.id, "track " + it.key() + " must list path alternatives");
            continue;
          }
          for (const auto& alt : it.value()) {
            std::set<std::string> path;
            for (const auto& g : alt) path.insert(r.str(g, "path"));
            alts.push_back(std::move(path));
          }
          if (alts.empty()) alts.push_back({});  // explicitly no switches
          s.tracks[it.key()] = std::move(alts);
        }
      }
      inst.stations.push_back(std::move(s));
    }
  } else {
    r.error("instance", "missing 'stations' array");
  }

  if (root.contains("segments") && root["segments"].is_array()) {
    for (const auto& js : root["segments"]) {
      r.check_keys(js, "segment", {"from", "to", "tracks"});
      LineSegment seg;
      if (js.contains("from")) seg.from = r.str(js["from"], "segment.from");
      if (js.contains("to")) seg.to = r.str(js["to"], "segment.to");
      if (js.contains("tracks"))
        for (const auto& jt : js["tracks"]) {
          r.check_keys(jt, "segment.track", {"id", "directions"});
          SegmentTrack t;
          if (jt.contains("id")) t.id = r.str(jt["id"], "track.id");
          std::string mode = jt.contains("directions")
                                 ? r.str(jt["directions"], "track.directions")
                                 : "bidirectional";
          if (mode == "bidirectional") t.mode = TrackMode::Bidirectional;
          else if (mode == "one_way") t.mode = TrackMode::OneWay;
          else r.error("segment.track", "directions must be 'bidirectional' or 'one_way'");
          seg.tracks.push_back(std::move(t));
        }
      inst.segments.push_back(std::move(seg));
    }
  } else {
    r.error("instance", "missing 'segments' array");
  }

  if (root.contains("trains") && root["trains"].is_array()) {
    for (const auto& jt : root["trains"]) {
      r.check_keys(jt, "train", {"id", "weight", "route", "schedule", "counted"});
      Train t;
      if (jt.contains("id")) t.id = r.str(jt["id"], "train.id");
      if (jt.contains("weight")) {
        if (jt["weight"].is_number()) t.weight = jt["weight"].get<double>();
        else r.error("train " + t.id, "weight must be a number");
      }
      if (jt.contains("route"))
        for (const auto& s : jt["route"]) t.route.push_back(r.str(s, "route"));
      if (jt.contains("schedule")) {
        for (auto it = jt["schedule"].begin(); it != jt["schedule"].end(); ++it) {
          r.check_keys(it.value(), "schedule." + it.key(), {"in", "out"});
          if (it.value().contains("in"))
            t.scheduled_arrival[it.key()] = r.grid_time(it.value()["in"], "schedule.in");
          if (it.value().contains("out"))
            t.scheduled_departure[it.key()] = r.grid_time(it.value()["out"], "schedule.out");
        }
      }
      if (jt.contains("counted"))
        for (auto it = jt["counted"].begin(); it != jt["counted"].end(); ++it) {
          if (!it.value().is_boolean()) r.error("train " + t.id, "counted flags must be boolean");
          else if (it.value().get<bool>()) t.counted.insert(it.key());
        }
      inst.trains.push_back(std::move(t));
    }
  } else {
    r.error("instance", "missing 'trains' array");
  }

  if (root.contains("timing")) {
    const json& jt = root["timing"];
    r.check_keys(jt, "timing", {"pass", "blocks", "stop", "prep", "res", "res_default"});
    auto read_seg_map = [&](const char* key, auto& target) {
      if (!jt.contains(key)) return;
      for (const auto& e : jt[key]) {
        r.check_keys(e, std::string("timing.") + key, {"train", "from", "to", "time"});
        target[{r.str(e.value("train", json("")), "train"),
                r.str(e.value("from", json("")), "from"),
                r.str(e.value("to", json("")), "to")}] =
            r.grid_time(e.value("time", json(0)), std::string("timing.") + key);
      }
    };
    read_seg_map("pass", inst.timing.pass);
    read_seg_map("blocks", inst.timing.blocks);
    if (jt.contains("stop"))
      for (const auto& e : jt["stop"]) {
        r.check_keys(e, "timing.stop", {"train", "station", "time"});
        inst.timing.stop[{r.str(e.value("train", json("")), "train"),
                          r.str(e.value("station", json("")), "station")}] =
            r.grid_time(e.value("time", json(0)), "timing.stop");
      }
    if (jt.contains("prep"))
      for (const auto& e : jt["prep"]) {
        r.check_keys(e, "timing.prep", {"arriving", "departing", "station", "time"});
        inst.timing.prep[{r.str(e.value("arriving", json("")), "arriving"),
                          r.str(e.value("departing", json("")), "departing"),
                          r.str(e.value("station", json("")), "station")}] =
            r.grid_time(e.value("time", json(0)), "timing.prep");
      }
    if (jt.contains("res"))
      for (const auto& e : jt["res"]) {
        r.check_keys(e, "timing.res", {"first", "second", "station", "time"});
        inst.timing.res[{r.str(e.value("first", json("")), "first"),
                         r.str(e.value("second", json("")), "second"),
                         r.str(e.value("station", json("")), "station")}] =
            r.grid_time(e.value("time", json(0)), "timing.res");
      }
    if (jt.contains("res_default"))
      inst.timing.res_default = r.grid_time(jt["res_default"], "timing.res_default");
  } else {
    r.error("instance", "missing 'timing' section");
  }

  if (root.contains("scenario")) {
    const json& js = root["scenario"];
    r.check_keys(js, "scenario", {"delays", "d_max", "resolution"});
    if (js.contains("delays"))
      for (const auto& e : js["delays"]) {
        r.check_keys(e, "scenario.delays", {"train", "station", "delay"});
        inst.scenario.primary_delay[{r.str(e.value("train", json("")), "train"),
                                     r.str(e.value("station", json("")), "station")}] =
            r.grid_time(e.value("delay", json(0)), "scenario.delay");
      }
    if (js.contains("d_max"))
      for (auto it = js["d_max"].begin(); it != js["d_max"].end(); ++it)
        inst.scenario.d_max[it.key()] = r.grid_time(it.value(), "scenario.d_max");
    if (js.contains("resolution")) {
      if (js["resolution"].is_number_integer())
        inst.scenario.resolution = js["resolution"].get<int>();
      else
        r.error("scenario", "resolution must be an integer");
    }
  } else {
    r.error("instance", "missing 'scenario' section");
  }

  if (root.contains("turnarounds"))
    for (const auto& e : root["turnarounds"]) {
      r.check_keys(e, "turnaround", {"arriving", "departing", "station"});
      inst.turnarounds.push_back({r.str(e.value("arriving", json("")), "arriving"),
                                  r.str(e.value("departing", json("")), "departing"),
                                  r.str(e.value("station", json("")), "station")});
    }

  if (root.contains("routing_default")) {
    const json& jr = root["routing_default"];
    r.check_keys(jr, "routing_default", {"line_tracks", "station_tracks", "station_paths"});
    if (jr.contains("line_tracks"))
      for (const auto& e : jr["line_tracks"]) {
        r.check_keys(e, "line_tracks", {"train", "from", "to", "track"});
        inst.default_routing.line_track[{r.str(e.value("train", json("")), "train"),
                                         r.str(e.value("from", json("")), "from"),
                                         r.str(e.value("to", json("")), "to")}] =
            r.str(e.value("track", json("")), "track");
      }
    if (jr.contains("station_tracks"))
      for (const auto& e : jr["station_tracks"]) {
        r.check_keys(e, "station_tracks", {"train", "station", "track"});
        inst.default_routing.station_track[{r.str(e.value("train", json("")), "train"),
                                            r.str(e.value("station", json("")), "station")}] =
            r.str(e.value("track", json("")), "track");
      }
    if (jr.contains("station_paths"))
      for (const auto& e : jr["station_paths"]) {
        r.check_keys(e, "station_paths", {"train", "station", "path"});
        std::set<std::string> path;
        if (e.contains("path"))
          for (const auto& g : e["path"]) path.insert(r.str(g, "path"));
        inst.default_routing.station_path[{r.str(e.value("train", json("")), "train"),
                                           r.str(e.value("station", json("")), "station")}] =
            std::move(path);
      }
  } else {
    r.error("instance", "missing 'routing_default' section");
  }

  if (!r.diags.empty()) throw LoadError(std::move(r.diags));
  return inst;
}

}  // namespace

DispatchInstance parse_instance(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw LoadError(std::vector<Diagnostic>{{"parse", e.what()}});
  }
  return parse_json(root);
}

DispatchInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(std::vector<Diagnostic>{{"io", "cannot open " + path}});
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str());
}

void save_instance(const DispatchInstance& inst, const std::string& path) {
  json root;
  for (const auto& s : inst.stations) {
    json js;
    js["id"] = s.id;
    js["switch_groups"] = s.switch_groups;
    json tracks = json::object();
    for (const auto& [id, alts] : s.tracks) {
      json jalts = json::array();
      for (const auto& alt : alts) jalts.push_back(std::vector<std::string>(alt.begin(), alt.end()));
      tracks[id] = jalts;
    }
    js["tracks"] = tracks;
    root["stations"].push_back(js);
  }
  for (const auto& seg : inst.segments) {
    json js;
    js["from"] = seg.from;
    js["to"] = seg.to;
    for (const auto& t : seg.tracks)
      js["tracks"].push_back(
          {{"id", t.id},
           {"directions", t.mode == TrackMode::OneWay ? "one_way" : "bidirectional"}});
    root["segments"].push_back(js);
  }
  for (const auto& t : inst.trains) {
    json js;
    js["id"] = t.id;
    js["weight"] = t.weight;
    js["route"] = t.route;
    json sched = json::object();
    for (const auto& [s, v] : t.scheduled_arrival) sched[s]["in"] = v;
    for (const auto& [s, v] : t.scheduled_departure) sched[s]["out"] = v;
    js["schedule"] = sched;
    json counted = json::object();
    for (const auto& s : t.route)
      if (t.has_departure(s)) counted[s] = t.counted.count(s) != 0;
    js["counted"] = counted;
    root["trains"].push_back(js);
  }
  json timing;
  for (const auto& [k, v] : inst.timing.pass)
    timing["pass"].push_back({{"train", std::get<0>(k)}, {"from", std::get<1>(k)},
                              {"to", std::get<2>(k)}, {"time", v}});
  for (const auto& [k, v] : inst.timing.blocks)
    timing["blocks"].push_back({{"train", std::get<0>(k)}, {"from", std::get<1>(k)},
                                {"to", std::get<2>(k)}, {"time", v}});
  for (const auto& [k, v] : inst.timing.stop)
    timing["stop"].push_back({{"train", k.first}, {"station", k.second}, {"time", v}});
  for (const auto& [k, v] : inst.timing.prep)
    timing["prep"].push_back({{"arriving", std::get<0>(k)}, {"departing", std::get<1>(k)},
                              {"station", std::get<2>(k)}, {"time", v}});
  for (const auto& [k, v] : inst.timing.res)
    timing["res"].push_back({{"first", std::get<0>(k)}, {"second", std::get<1>(k)},
                             {"station", std::get<2>(k)}, {"time", v}});
  if (inst.timing.res_default) timing["res_default"] = *inst.timing.res_default;
  root["timing"] = timing;

  json scenario;
  for (const auto& [k, v] : inst.scenario.primary_delay)
    scenario["delays"].push_back({{"train", k.first}, {"station", k.second}, {"delay", v}});
  json dmax = json::object();
  for (const auto& [k, v] : inst.scenario.d_max) dmax[k] = v;
  scenario["d_max"] = dmax;
  scenario["resolution"] = inst.scenario.resolution;
  root["scenario"] = scenario;

  root["turnarounds"] = json::array();
  for (const auto& t : inst.turnarounds)
    root["turnarounds"].push_back(
        {{"arriving", t.arriving}, {"departing", t.departing}, {"station", t.station}});

  json routing;
  for (const auto& [k, v] : inst.default_routing.line_track)
    routing["line_tracks"].push_back({{"train", std::get<0>(k)}, {"from", std::get<1>(k)},
                                      {"to", std::get<2>(k)}, {"track", v}});
  for (const auto& [k, v] : inst.default_routing.station_track)
    routing["station_tracks"].push_back(
        {{"train", k.first}, {"station", k.second}, {"track", v}});
  for (const auto& [k, v] : inst.default_routing.station_path)
    routing["station_paths"].push_back(
        {{"train", k.first}, {"station", k.second},
         {"path", std::vector<std::string>(v.begin(), v.end())}});
  root["routing_default"] = routing;

  std::ofstream out(path);
  if (!out) throw RailError("io", "cannot write " + path);
  out << root.dump(2) << "\n";
}

void export_qubo(const QuboEncoding& encoding, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw RailError("io", "cannot write " + path);
  const QuboModel& m = encoding.model;
  out << "# qubo coordinate format: i j coeff (i == j for linear terms)\n";
  out << "# n " << m.n << "\n";
  out << std::setprecision(17);
  out << "# offset " << m.offset << "\n";
  out << "# p_sum " << m.constants.p_sum << " p_pair " << m.constants.p_pair << " p_qubic "
      << m.constants.p_qubic << "\n";
  out << "# num_x " << encoding.index.num_x << " num_aux " << encoding.index.aux.size() << "\n";
  for (const auto& [i, c] : m.linear) out << i << " " << i << " " << c << "\n";
  for (const auto& [key, c] : m.quadratic)
    out << key.first << " " << key.second << " " << c << "\n";

  json side;
  side["n"] = m.n;
  side["num_x"] = encoding.index.num_x;
  for (const auto& g : encoding.index.groups) {
    json jg;
    jg["train"] = g.event.first;
    jg["station"] = g.event.second;
    jg["start"] = g.start;
    jg["lb"] = g.lb;
    jg["ub"] = g.ub;
    side["groups"].push_back(jg);
  }
  side["aux"] = json::array();
  for (const auto& a : encoding.index.aux)
    side["aux"].push_back({{"index", a.index}, {"x1", a.x1}, {"x2", a.x2}});
  std::ofstream sidecar(path + ".vars.json");
  if (!sidecar) throw RailError("io", "cannot write " + path + ".vars.json");
  sidecar << side.dump(2) << "\n";
}

QuboModel import_qubo(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RailError("io", "cannot open " + path);
  QuboModel m;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string key;
      while (hs >> key) {
        if (key == "n") hs >> m.n;
        else if (key == "offset") hs >> m.offset;
        else if (key == "p_sum") hs >> m.constants.p_sum;
        else if (key == "p_pair") hs >> m.constants.p_pair;
        else if (key == "p_qubic") hs >> m.constants.p_qubic;
      }
      continue;
    }
    std::istringstream ls(line);
    int i, j;
    double c;
    if (!(ls >> i >> j >> c)) throw RailError("parse", "bad qubo line: " + line);
    if (i == j) m.linear[i] += c;
    else m.quadratic[{std::min(i, j), std::max(i, j)}] += c;
  }
  return m;
}

std::string export_sampleset(const SampleSet& set, const QuboEncoding& encoding,
                             const DispatchInstance& instance) {
  json out = json::array();
  for (const auto& s : set.records) {
    json js;
    std::string bits;
    bits.reserve(s.bits.size());
    for (auto b : s.bits) bits.push_back(b ? '1' : '0');
    js["bits"] = bits;
    js["energy"] = s.energy;
    js["multiplicity"] = s.multiplicity;
    DecodedSample d = decode(s.bits, encoding, instance);
    if (d.one_hot) {
      json dep = json::object();
      for (const auto& [key, t] : d.schedule.departure) dep[key.first + "@" + key.second] = t;
      js["departures"] = dep;
      js["objective"] = d.schedule.objective;
      js["feasible"] = d.schedule.feasible;
    }
    out.push_back(js);
  }
  return out.dump(2);
}

RunReport make_report(const DispatchInstance& instance, const Routing& routing,
                      const std::string& mode, const Schedule& schedule) {
  RunReport rep;
  rep.mode = mode;
  rep.trains = static_cast<int>(instance.trains.size());
  rep.stations = static_cast<int>(instance.stations.size());
  rep.resolution = instance.scenario.resolution;
  ConflictSets sets = derive_conflict_sets(instance, routing);
  LinearModel lm = build_linear_model(instance, routing, sets);
  rep.linear_counts = count_variables(lm);
  VarIndex idx = index_variables(instance, routing);
  rep.num_x = idx.num_x;
  rep.schedule = schedule;
  rep.unavoidable = propagate_unavoidable_delays(instance, routing);
  for (const auto& train : instance.trains)
    for (const auto& [s, t] : train.scheduled_departure) rep.scheduled[{train.id, s}] = t;
  return rep;
}

namespace {

std::string fmt_minutes(GridTime grid, int resolution) {
  if (resolution == 1) return std::to_string(grid);
  std::ostringstream os;
  os << static_cast<double>(grid) / resolution;
  return os.str();
}

}  // namespace

std::string render_report(const RunReport& rep) {
  std::ostringstream os;
  os << "mode: " << rep.mode << "\n";
  os << "trains: " << rep.trains << "  stations: " << rep.stations << "\n";
  os << "variables: time=" << rep.linear_counts.num_time
     << " precedence=" << rep.linear_counts.num_precedence << " (stored "
     << rep.linear_counts.num_precedence_stored << ")  x=" << rep.num_x << "\n";
  os << "train    station  scheduled  realized  d_U   d_s\n";
  for (const auto& [key, dep] : rep.schedule.departure) {
    GridTime sched = rep.scheduled.count(key) ? rep.scheduled.at(key) : 0;
    GridTime t_u = rep.unavoidable.count(key) ? rep.unavoidable.at(key) : 0;
    GridTime d_s = rep.schedule.secondary_delay.count(key)
                       ? rep.schedule.secondary_delay.at(key)
                       : 0;
    os << std::left << std::setw(9) << key.first << std::setw(9) << key.second << std::setw(11)
       << fmt_minutes(sched, rep.resolution) << std::setw(10) << fmt_minutes(dep, rep.resolution)
       << std::setw(6) << fmt_minutes(t_u - sched, rep.resolution) << std::setw(6)
       << fmt_minutes(d_s, rep.resolution) << "\n";
  }
  os << "feasible: " << (rep.schedule.feasible ? "yes" : "no") << "\n";
  os << std::setprecision(10) << "objective: " << rep.schedule.objective << "\n";
  for (const auto& v : rep.schedule.violations)
    os << "violation: " << v.family << " " << v.a << (v.b.empty() ? "" : "/" + v.b) << " "
       << v.resource << " " << v.detail << "\n";
  if (!rep.iterations.empty()) {
    os << "iterations:\n";
    int i = 1;
    for (const auto& it : rep.iterations) {
      os << "  " << i++ << ": objective=" << (it.feasible ? std::to_string(it.objective) : "inf")
         << " routing=" << it.routing_delta;
      if (!it.picked_conflict.empty()) os << " conflict=[" << it.picked_conflict << "]";
      if (!it.move_applied.empty()) os << " move=[" << it.move_applied << "]";
      os << "\n";
    }
    os << "terminated: " << rep.terminated_by << "\n";
  }
  return os.str();
}

std::string render_report_structured(const RunReport& rep) {
  json out;
  out["mode"] = rep.mode;
  out["trains"] = rep.trains;
  out["stations"] = rep.stations;
  out["variables"] = {{"time", rep.linear_counts.num_time},
                      {"precedence", rep.linear_counts.num_precedence},
                      {"precedence_stored", rep.linear_counts.num_precedence_stored},
                      {"x", rep.num_x}};
  out["feasible"] = rep.schedule.feasible;
  out["objective"] = rep.schedule.objective;
  json table = json::array();
  for (const auto& [key, dep] : rep.schedule.departure) {
    json row;
    row["train"] = key.first;
    row["station"] = key.second;
    row["scheduled"] = rep.scheduled.count(key) ? rep.scheduled.at(key) : 0;
    row["realized"] = dep;
    GridTime t_u = rep.unavoidable.count(key) ? rep.unavoidable.at(key) : 0;
    row["d_u"] = t_u - (rep.scheduled.count(key) ? rep.scheduled.at(key) : 0);
    row["d_s"] = rep.schedule.secondary_delay.count(key) ? rep.schedule.secondary_delay.at(key) : 0;
    table.push_back(row);
  }
  out["schedule"] = table;
  json viols = json::array();
  for (const auto& v : rep.schedule.violations)
    viols.push_back({{"family", v.family}, {"a", v.a}, {"b", v.b}, {"resource", v.resource},
                     {"detail", v.detail}});
  out["violations"] = viols;
  if (!rep.iterations.empty()) {
    json iters = json::array();
    for (const auto& it : rep.iterations)
      iters.push_back({{"objective", it.objective},
                       {"feasible", it.feasible},
                       {"routing_delta", it.routing_delta},
                       {"picked_conflict", it.picked_conflict},
                       {"move_applied", it.move_applied}});
    out["iterations"] = iters;
    out["terminated_by"] = rep.terminated_by;
  }
  return out.dump(2);
}

}  // namespace rail
