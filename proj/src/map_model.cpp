#include "steinseed/map_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <queue>
#include <sstream>

#include "json.hpp"

namespace steinseed {

using nlohmann::json;

namespace {

constexpr double kJoinTolerance = 0.5;

std::string lane_field(std::size_t i, const char* field) {
  return "lanes[" + std::to_string(i) + "]." + field;
}

// Portion of `line` between arc lengths a0 <= a1.
Polyline sub_polyline(const Polyline& line, double a0, double a1) {
  Polyline out;
  out.push_back(point_at_arc(line, a0).position);
  double walked = 0.0;
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    walked += (line[i + 1] - line[i]).norm();
    if (walked > a0 && walked < a1) out.push_back(line[i + 1]);
  }
  const Vec2 end = point_at_arc(line, a1).position;
  if ((end - out.back()).norm() > 1e-9) out.push_back(end);
  return out;
}

}  // namespace

PointIndex::PointIndex(std::vector<Vec2> points, double cell_size)
    : points_(std::move(points)), cell_(cell_size) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto cx = static_cast<long long>(std::floor(points_[i].x() / cell_));
    const auto cy = static_cast<long long>(std::floor(points_[i].y() / cell_));
    cells_[key(cx, cy)].push_back(i);
  }
}

std::optional<std::size_t> PointIndex::match(const Vec2& position, double threshold) const {
  const double reach = std::ceil(threshold / cell_);
  if (!std::isfinite(reach) || (2 * reach + 1) * (2 * reach + 1) > static_cast<double>(points_.size())) {
    return match_to_set(position, points_, threshold);
  }
  const auto r = static_cast<long long>(reach);
  const auto cx = static_cast<long long>(std::floor(position.x() / cell_));
  const auto cy = static_cast<long long>(std::floor(position.y() / cell_));
  std::optional<std::size_t> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (long long dx = -r; dx <= r; ++dx) {
    for (long long dy = -r; dy <= r; ++dy) {
      const auto it = cells_.find(key(cx + dx, cy + dy));
      if (it == cells_.end()) continue;
      for (std::size_t idx : it->second) {
        const double d = (position - points_[idx]).norm();
        if (d > threshold) continue;
        if (d < best_d || (d == best_d && idx < *best)) {
          best_d = d;
          best = idx;
        }
      }
    }
  }
  return best;
}

RoadNetwork::RoadNetwork(std::vector<Lane> lanes, std::vector<SpawnPoint> spawn_points,
                         std::vector<Vec2> waypoints, Omega omega)
    : lanes_(std::move(lanes)),
      spawn_points_(std::move(spawn_points)),
      waypoints_(std::move(waypoints)),
      omega_(omega) {
  if (lanes_.empty()) throw ValidationError("lanes: at least one lane is required");
  if (!(omega_.d_s > 0.0)) throw ValidationError("omega.d_s must be positive");
  if (!(omega_.d_d > 0.0)) throw ValidationError("omega.d_d must be positive");
  omega_.psi_max = kPi;

  double max_half_width = 0.0;
  bounds_min_ = Vec2::Constant(std::numeric_limits<double>::infinity());
  bounds_max_ = -bounds_min_;
  for (std::size_t i = 0; i < lanes_.size(); ++i) {
    const Lane& lane = lanes_[i];
    if (!(lane.width >= 2.0)) {
      throw ValidationError(lane_field(i, "width") + " must be at least 2.0 m");
    }
    if (lane.centerline.size() < 2) {
      throw ValidationError(lane_field(i, "centerline") + " needs at least two points");
    }
    for (std::size_t k = 0; k < lane.centerline.size(); ++k) {
      if (!lane.centerline[k].allFinite()) {
        throw ValidationError(lane_field(i, "centerline") + " has a non-finite point");
      }
      if (k > 0 && (lane.centerline[k] - lane.centerline[k - 1]).norm() == 0.0) {
        throw ValidationError(lane_field(i, "centerline") + " has a zero-length segment");
      }
      bounds_min_ = bounds_min_.cwiseMin(lane.centerline[k]);
      bounds_max_ = bounds_max_.cwiseMax(lane.centerline[k]);
    }
    max_half_width = std::max(max_half_width, 0.5 * lane.width);
  }
  bounds_min_.array() -= max_half_width;
  bounds_max_.array() += max_half_width;

  for (std::size_t i = 0; i < spawn_points_.size(); ++i) {
    if (!in_bounds(spawn_points_[i].position)) {
      throw ValidationError("spawn_points[" + std::to_string(i) + "] lies outside the map bounds");
    }
  }
  for (std::size_t i = 0; i < waypoints_.size(); ++i) {
    if (!in_bounds(waypoints_[i])) {
      throw ValidationError("waypoints[" + std::to_string(i) + "] lies outside the map bounds");
    }
  }

  successors_.resize(lanes_.size());
  lane_lengths_.resize(lanes_.size());
  lane_waypoints_.resize(lanes_.size());
  for (std::size_t i = 0; i < lanes_.size(); ++i) {
    lane_lengths_[i] = polyline_length(lanes_[i].centerline);
    for (std::size_t w = 0; w < waypoints_.size(); ++w) {
      const auto proj = project_to_polyline(waypoints_[w], lanes_[i].centerline);
      if (proj.distance < 0.5 * lanes_[i].width) lane_waypoints_[i].push_back({w, proj.arc});
    }
    for (std::size_t j = 0; j < lanes_.size(); ++j) {
      if ((lanes_[j].centerline.front() - lanes_[i].centerline.back()).norm() <= kJoinTolerance) {
        successors_[i].push_back(j);
      }
    }
    const double half = 0.5 * lanes_[i].width;
    if (lanes_[i].left_marking == Marking::kSolid) {
      solid_markings_.push_back(offset_polyline(lanes_[i].centerline, half));
    }
    if (lanes_[i].right_marking == Marking::kSolid) {
      solid_markings_.push_back(offset_polyline(lanes_[i].centerline, -half));
    }
  }

  std::vector<Vec2> spawn_positions;
  spawn_positions.reserve(spawn_points_.size());
  for (const auto& sp : spawn_points_) spawn_positions.push_back(sp.position);
  spawn_index_ = PointIndex(std::move(spawn_positions), 1.0);
  waypoint_index_ = PointIndex(waypoints_, 1.0);
}

bool RoadNetwork::in_bounds(const Vec2& p) const {
  return p.x() >= bounds_min_.x() && p.x() <= bounds_max_.x() && p.y() >= bounds_min_.y() &&
         p.y() <= bounds_max_.y();
}

std::optional<std::size_t> RoadNetwork::lane_at(const Pose& pose) const {
  std::optional<std::size_t> best;
  bool best_aligned = false;
  double best_d = std::numeric_limits<double>::infinity();
  const Vec2 dir = heading_vector(pose.heading);
  for (std::size_t i = 0; i < lanes_.size(); ++i) {
    const auto proj = project_to_polyline(pose.position, lanes_[i].centerline);
    if (proj.distance > 0.5 * lanes_[i].width + 1e-9) continue;
    const Polyline& c = lanes_[i].centerline;
    const bool aligned = (c[proj.segment + 1] - c[proj.segment]).dot(dir) > 0.0;
    if (!best || (aligned && !best_aligned) || (aligned == best_aligned && proj.distance < best_d)) {
      best = i;
      best_aligned = aligned;
      best_d = proj.distance;
    }
  }
  return best;
}

std::size_t RoadNetwork::lane_for(const Pose& pose) const {
  if (const auto lane = lane_at(pose)) return *lane;
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lanes_.size(); ++i) {
    const double d = project_to_polyline(pose.position, lanes_[i].centerline).distance;
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

Vec2 RoadNetwork::nearest_lane_point(const Vec2& p) const {
  Vec2 best = lanes_.front().centerline.front();
  double best_d = std::numeric_limits<double>::infinity();
  for (const Lane& lane : lanes_) {
    const auto proj = project_to_polyline(p, lane.centerline);
    if (proj.distance < best_d) {
      best_d = proj.distance;
      best = proj.closest;
    }
  }
  return best;
}

bool RoadNetwork::on_road(const Vec2& p) const {
  for (const Lane& lane : lanes_) {
    if (project_to_polyline(p, lane.centerline).distance <= 0.5 * lane.width) return true;
  }
  return false;
}

std::vector<SpawnPoint> sample_spawn_points(const std::vector<Lane>& lanes, double spacing) {
  std::vector<SpawnPoint> out;
  for (const Lane& lane : lanes) {
    const double len = polyline_length(lane.centerline);
    for (double arc = 0.0; arc <= len + 1e-9; arc += spacing) {
      const Pose p = point_at_arc(lane.centerline, arc);
      const bool dup = std::any_of(out.begin(), out.end(), [&](const SpawnPoint& s) {
        return (s.position - p.position).norm() < 1e-6;
      });
      if (!dup) out.push_back({p.position, wrap_angle(p.heading)});
    }
  }
  return out;
}

std::vector<Vec2> sample_waypoints(const std::vector<Lane>& lanes, double spacing) {
  std::vector<Vec2> out;
  for (const auto& sp : sample_spawn_points(lanes, spacing)) out.push_back(sp.position);
  return out;
}

namespace {

Vec2 parse_point(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ParseError(field + ": expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

double parse_number(const json& obj, const char* key, const std::string& field) {
  if (!obj.contains(key) || !obj[key].is_number()) {
    throw ParseError(field + "." + key + ": expected a number");
  }
  return obj[key].get<double>();
}

Marking parse_marking(const json& obj, const char* key, const std::string& field) {
  if (!obj.contains(key) || !obj[key].is_string()) {
    throw ParseError(field + "." + key + ": expected \"solid\" or \"dashed\"");
  }
  const auto s = obj[key].get<std::string>();
  if (s == "solid") return Marking::kSolid;
  if (s == "dashed") return Marking::kDashed;
  throw ParseError(field + "." + key + ": unknown marking \"" + s + "\"");
}

const char* marking_name(Marking m) { return m == Marking::kSolid ? "solid" : "dashed"; }

}  // namespace

RoadNetwork load_map(std::string_view document) {
  json root;
  try {
    root = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("map document: ") + e.what());
  }
  if (!root.is_object()) throw ParseError("map document: expected an object");
  if (!root.contains("lanes") || !root["lanes"].is_array()) {
    throw ParseError("lanes: expected a list");
  }

  std::vector<Lane> lanes;
  for (std::size_t i = 0; i < root["lanes"].size(); ++i) {
    const json& jl = root["lanes"][i];
    const std::string field = "lanes[" + std::to_string(i) + "]";
    if (!jl.is_object()) throw ParseError(field + ": expected an object");
    if (!jl.contains("centerline") || !jl["centerline"].is_array()) {
      throw ParseError(field + ".centerline: expected a list of points");
    }
    Lane lane;
    for (std::size_t k = 0; k < jl["centerline"].size(); ++k) {
      lane.centerline.push_back(
          parse_point(jl["centerline"][k], field + ".centerline[" + std::to_string(k) + "]"));
    }
    lane.width = parse_number(jl, "width", field);
    lane.left_marking = parse_marking(jl, "left_marking", field);
    lane.right_marking = parse_marking(jl, "right_marking", field);
    lanes.push_back(std::move(lane));
  }

  std::vector<SpawnPoint> spawns;
  if (root.contains("spawn_points")) {
    if (!root["spawn_points"].is_array()) throw ParseError("spawn_points: expected a list");
    for (std::size_t i = 0; i < root["spawn_points"].size(); ++i) {
      const json& js = root["spawn_points"][i];
      const std::string field = "spawn_points[" + std::to_string(i) + "]";
      if (!js.is_object() || !js.contains("pos")) throw ParseError(field + ".pos: missing");
      spawns.push_back({parse_point(js["pos"], field + ".pos"), parse_number(js, "heading", field)});
    }
  } else {
    spawns = sample_spawn_points(lanes);
  }

  std::vector<Vec2> waypoints;
  if (root.contains("waypoints")) {
    if (!root["waypoints"].is_array()) throw ParseError("waypoints: expected a list");
    for (std::size_t i = 0; i < root["waypoints"].size(); ++i) {
      waypoints.push_back(parse_point(root["waypoints"][i], "waypoints[" + std::to_string(i) + "]"));
    }
  } else {
    waypoints = sample_waypoints(lanes);
  }

  if (!root.contains("omega") || !root["omega"].is_object()) {
    throw ParseError("omega: expected an object with d_s and d_d");
  }
  Omega omega;
  omega.d_s = parse_number(root["omega"], "d_s", "omega");
  omega.d_d = parse_number(root["omega"], "d_d", "omega");

  return RoadNetwork(std::move(lanes), std::move(spawns), std::move(waypoints), omega);
}

RoadNetwork load_map_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open map file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_map(ss.str());
}

std::string map_to_json(const RoadNetwork& network) {
  json root;
  root["lanes"] = json::array();
  for (const Lane& lane : network.lanes()) {
    json jl;
    jl["centerline"] = json::array();
    for (const Vec2& p : lane.centerline) jl["centerline"].push_back({p.x(), p.y()});
    jl["width"] = lane.width;
    jl["left_marking"] = marking_name(lane.left_marking);
    jl["right_marking"] = marking_name(lane.right_marking);
    root["lanes"].push_back(std::move(jl));
  }
  root["spawn_points"] = json::array();
  for (const auto& sp : network.spawn_points()) {
    root["spawn_points"].push_back({{"pos", {sp.position.x(), sp.position.y()}}, {"heading", sp.heading}});
  }
  root["waypoints"] = json::array();
  for (const Vec2& w : network.waypoints()) root["waypoints"].push_back({w.x(), w.y()});
  root["omega"] = {{"d_s", network.omega().d_s}, {"d_d", network.omega().d_d}};
  return root.dump(1);
}

double lane_overlap(const Vec2& position, const Lane& lane) {
  const double offset = project_to_polyline(position, lane.centerline).distance;
  return std::clamp(1.0 - offset / lane.width, 0.0, 1.0);
}

LaneOverlapGradient lane_overlap_with_gradient(const Vec2& position, const Lane& lane) {
  const auto proj = project_to_polyline(position, lane.centerline);
  LaneOverlapGradient out;
  out.value = std::clamp(1.0 - proj.distance / lane.width, 0.0, 1.0);
  if (proj.distance > 0.0 && proj.distance < lane.width) {
    out.gradient = -(position - proj.closest) / (proj.distance * lane.width);
  }
  return out;
}

std::optional<std::size_t> match_to_set(const Vec2& position, const std::vector<Vec2>& points,
                                        double threshold) {
  if (!(threshold > 0.0)) throw Error("match_to_set: threshold must be positive");
  std::optional<std::size_t> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = (position - points[i]).norm();
    if (d <= threshold && d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

Route plan_route(const Vec2& start, double heading, const RoadNetwork& network, double horizon) {
  const auto start_lane = network.lane_at({start, heading});
  if (!start_lane) throw Error("isolated start: start position is not on any lane");
  const auto& lanes = network.lanes();
  const double start_arc = project_to_polyline(start, lanes[*start_lane].centerline).arc;

  // Dijkstra over lane entry distances; the start lane may be re-entered via a loop.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> entry(lanes.size(), inf);
  std::vector<std::optional<std::size_t>> parent(lanes.size());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> frontier;
  const double first_exit = network.lane_length(*start_lane) - start_arc;
  for (std::size_t s : network.successors(*start_lane)) {
    if (first_exit < entry[s]) {
      entry[s] = first_exit;
      parent[s] = std::nullopt;
      frontier.push({first_exit, s});
    }
  }
  while (!frontier.empty()) {
    const auto [d, lane] = frontier.top();
    frontier.pop();
    if (d > entry[lane]) continue;
    const double exit = d + network.lane_length(lane);
    for (std::size_t s : network.successors(lane)) {
      if (exit < entry[s]) {
        entry[s] = exit;
        parent[s] = lane;
        frontier.push({exit, s});
      }
    }
  }

  // Shortest reach distance per waypoint, with the lane it is reached on.
  struct Reach {
    double distance = std::numeric_limits<double>::infinity();
    std::size_t lane = 0;
    double arc = 0.0;
    bool direct = false;  // reached on the start lane without leaving it
  };
  const auto& waypoints = network.waypoints();
  std::vector<Reach> reach(waypoints.size());
  for (std::size_t li = 0; li < lanes.size(); ++li) {
    const bool is_start = li == *start_lane;
    if (!is_start && entry[li] == inf) continue;
    for (const auto& [w, arc] : network.lane_waypoints(li)) {
      if (is_start && arc >= start_arc - 1e-9) {
        const double d = std::max(0.0, arc - start_arc);
        if (d < reach[w].distance) reach[w] = {d, li, arc, true};
      }
      if (entry[li] < inf) {
        const double d = entry[li] + arc;
        if (d < reach[w].distance) reach[w] = {d, li, arc, false};
      }
    }
  }

  std::optional<std::size_t> within;
  std::optional<std::size_t> farthest;
  for (std::size_t w = 0; w < waypoints.size(); ++w) {
    const double d = reach[w].distance;
    if (d == inf) continue;
    if (d <= horizon && (!within || d > reach[*within].distance)) within = w;
    if (!farthest || d > reach[*farthest].distance) farthest = w;
  }
  const auto chosen = within ? within : farthest;
  if (!chosen) throw Error("isolated start: no reachable waypoint");

  Route route;
  route.destination_index = *chosen;
  route.destination = waypoints[*chosen];
  route.length = reach[*chosen].distance;

  const Reach& r = reach[*chosen];
  if (r.direct) {
    route.path = sub_polyline(lanes[r.lane].centerline, start_arc, r.arc);
  } else {
    std::vector<std::size_t> chain;
    for (std::optional<std::size_t> l = r.lane; l; l = parent[*l]) {
      chain.push_back(*l);
      if (chain.size() > lanes.size()) break;
    }
    std::reverse(chain.begin(), chain.end());
    const auto& s0 = lanes[*start_lane].centerline;
    route.path = sub_polyline(s0, start_arc, network.lane_length(*start_lane));
    auto append = [&](const Polyline& piece) {
      for (const Vec2& p : piece) {
        if ((p - route.path.back()).norm() > 1e-9) route.path.push_back(p);
      }
    };
    for (std::size_t k = 0; k + 1 < chain.size(); ++k) append(lanes[chain[k]].centerline);
    append(sub_polyline(lanes[r.lane].centerline, 0.0, r.arc));
  }
  return route;
}

Vec2 route_destination(const Vec2& start, double heading, const RoadNetwork& network) {
  return plan_route(start, heading, network).destination;
}

}  // namespace steinseed
