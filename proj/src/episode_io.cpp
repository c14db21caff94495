#include "steinseed/episode_io.hpp"

#include "steinseed/json_io.hpp"

namespace steinseed {

using nlohmann::json;

namespace {

json state_row(const AgentFrame& a) { return json::array({a.position.x(), a.position.y(), a.heading, a.speed}); }

AgentFrame state_from_row(const json& row) {
  if (!row.is_array() || row.size() != 4) throw ParseError("episode record: state rows need 4 entries");
  return {{row[0].get<double>(), row[1].get<double>()}, row[2].get<double>(), row[3].get<double>()};
}

}  // namespace

json violations_to_json(const std::vector<ViolationRecord>& violations) {
  json out = json::array();
  for (const ViolationRecord& v : violations) {
    json entry = {{"kind", violation_name(v.kind)}, {"frame", v.frame}};
    entry["object"] = v.object ? json(*v.object) : json(nullptr);
    out.push_back(std::move(entry));
  }
  return out;
}

std::vector<ViolationRecord> violations_from_json(const json& value) {
  std::vector<ViolationRecord> out;
  for (const json& v : value) {
    ViolationRecord r;
    r.kind = violation_from_name(v.at("kind").get<std::string>());
    r.frame = v.at("frame").get<std::size_t>();
    if (!v.at("object").is_null()) r.object = v.at("object").get<std::size_t>();
    out.push_back(r);
  }
  return out;
}

json episode_to_json(const EpisodeResult& result) {
  const EpisodeTrace& trace = result.trace;
  json j;
  j["seed"] = to_json_value(result.seed);
  j["dt"] = trace.dt;
  j["destination"] = {trace.destination.x(), trace.destination.y()};
  j["kinds"] = json::array();
  for (ObjectKind k : trace.kinds) j["kinds"].push_back(kind_name(k));
  json ego = json::array();
  std::vector<json> objects(trace.object_count(), json::array());
  for (const Frame& f : trace.frames) {
    ego.push_back(state_row(f.ego));
    for (std::size_t i = 0; i < objects.size(); ++i) objects[i].push_back(state_row(f.objects[i]));
  }
  j["ego"] = std::move(ego);
  j["objects"] = std::move(objects);
  j["violations"] = violations_to_json(result.violations);
  return j;
}

EpisodeResult episode_from_json(const json& record) {
  try {
    EpisodeResult r;
    r.seed = chromosome_from_json(record.at("seed"));
    EpisodeTrace& t = r.trace;
    t.dt = record.at("dt").get<double>();
    t.destination = {record.at("destination").at(0).get<double>(), record.at("destination").at(1).get<double>()};
    for (const json& k : record.at("kinds")) t.kinds.push_back(kind_from_name(k.get<std::string>()));
    const json& ego = record.at("ego");
    const json& objects = record.at("objects");
    if (objects.size() != t.kinds.size()) throw ParseError("episode record: object count does not match kinds");
    for (std::size_t f = 0; f < ego.size(); ++f) {
      Frame frame;
      frame.ego = state_from_row(ego[f]);
      for (const json& track : objects) {
        if (track.size() != ego.size()) throw ParseError("episode record: track lengths differ");
        frame.objects.push_back(state_from_row(track[f]));
      }
      t.frames.push_back(std::move(frame));
    }
    r.violations = violations_from_json(record.at("violations"));
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("episode record: ") + e.what());
  }
}

std::string episode_to_line(const EpisodeResult& result) { return episode_to_json(result).dump(); }

EpisodeResult episode_from_line(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("episode record: ") + e.what());
  }
  return episode_from_json(j);
}

}  // namespace steinseed
