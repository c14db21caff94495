#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "steinseed/geometry.hpp"

namespace steinseed {

enum class Marking { kSolid, kDashed };

struct Lane {
  // Travel direction follows the point order.
  Polyline centerline;
  double width = 3.5;
  Marking left_marking = Marking::kSolid;
  Marking right_marking = Marking::kSolid;

  bool operator==(const Lane&) const = default;
};

struct SpawnPoint {
  Vec2 position = Vec2::Zero();
  double heading = 0.0;

  bool operator==(const SpawnPoint&) const = default;
};

// Admissible box of ego-relative object states.
struct Omega {
  double d_s = 50.0;
  double d_d = 50.0;
  double psi_max = kPi;

  bool operator==(const Omega&) const = default;
};

// Uniform hash grid over a fixed point set. Queries return exactly what an
// exhaustive nearest-point scan returns.
class PointIndex {
 public:
  PointIndex() = default;
  PointIndex(std::vector<Vec2> points, double cell_size);

  std::optional<std::size_t> match(const Vec2& position, double threshold) const;
  const std::vector<Vec2>& points() const { return points_; }

 private:
  long long key(long long cx, long long cy) const { return (cx << 32) ^ (cy & 0xffffffffLL); }

  std::vector<Vec2> points_;
  double cell_ = 1.0;
  std::unordered_map<long long, std::vector<std::size_t>> cells_;
};

// Immutable after construction; every invariant is checked by the constructor.
class RoadNetwork {
 public:
  RoadNetwork(std::vector<Lane> lanes, std::vector<SpawnPoint> spawn_points,
              std::vector<Vec2> waypoints, Omega omega);

  const std::vector<Lane>& lanes() const { return lanes_; }
  const std::vector<SpawnPoint>& spawn_points() const { return spawn_points_; }
  const std::vector<Vec2>& waypoints() const { return waypoints_; }
  const Omega& omega() const { return omega_; }

  const Vec2& bounds_min() const { return bounds_min_; }
  const Vec2& bounds_max() const { return bounds_max_; }
  bool in_bounds(const Vec2& p) const;

  const std::vector<std::size_t>& successors(std::size_t lane) const { return successors_[lane]; }
  double lane_length(std::size_t lane) const { return lane_lengths_[lane]; }
  struct LaneWaypoint {
    std::size_t waypoint;
    double arc;
  };
  // Waypoints lying within half a lane width of the centerline, with their arc position.
  const std::vector<LaneWaypoint>& lane_waypoints(std::size_t lane) const { return lane_waypoints_[lane]; }
  // Solid lane boundaries, one polyline per marked lane side.
  const std::vector<Polyline>& solid_markings() const { return solid_markings_; }

  const PointIndex& spawn_index() const { return spawn_index_; }
  const PointIndex& waypoint_index() const { return waypoint_index_; }

  // Lane whose drivable band contains `pose.position`, preferring lanes whose
  // direction agrees with `pose.heading`, then the smallest lateral offset.
  std::optional<std::size_t> lane_at(const Pose& pose) const;
  // lane_at, falling back to the lane with the closest centerline.
  std::size_t lane_for(const Pose& pose) const;
  // Nearest point on any centerline.
  Vec2 nearest_lane_point(const Vec2& p) const;
  // True when `p` is within half a lane width of some centerline.
  bool on_road(const Vec2& p) const;

  bool operator==(const RoadNetwork& other) const {
    return lanes_ == other.lanes_ && spawn_points_ == other.spawn_points_ &&
           waypoints_ == other.waypoints_ && omega_ == other.omega_;
  }

 private:
  std::vector<Lane> lanes_;
  std::vector<SpawnPoint> spawn_points_;
  std::vector<Vec2> waypoints_;
  Omega omega_;

  Vec2 bounds_min_ = Vec2::Zero();
  Vec2 bounds_max_ = Vec2::Zero();
  std::vector<std::vector<std::size_t>> successors_;
  std::vector<double> lane_lengths_;
  std::vector<std::vector<LaneWaypoint>> lane_waypoints_;
  std::vector<Polyline> solid_markings_;
  PointIndex spawn_index_;
  PointIndex waypoint_index_;
};

inline constexpr double kSampleSpacing = 5.0;

// Points every `spacing` meters along each centerline, skipping duplicates.
std::vector<SpawnPoint> sample_spawn_points(const std::vector<Lane>& lanes, double spacing = kSampleSpacing);
std::vector<Vec2> sample_waypoints(const std::vector<Lane>& lanes, double spacing = kSampleSpacing);

// Parses a JSON map document. Missing `spawn_points` or `waypoints` are sampled
// from the centerlines.
RoadNetwork load_map(std::string_view document);
RoadNetwork load_map_file(const std::string& path);
std::string map_to_json(const RoadNetwork& network);

// 1 on the centerline, falling linearly to 0 at one lane width of lateral offset.
double lane_overlap(const Vec2& position, const Lane& lane);

struct LaneOverlapGradient {
  double value = 0.0;
  Vec2 gradient = Vec2::Zero();
};
// Gradient with respect to position; zero at the ramp kinks.
LaneOverlapGradient lane_overlap_with_gradient(const Vec2& position, const Lane& lane);

// Index of the nearest point within `threshold`, lowest index on ties.
std::optional<std::size_t> match_to_set(const Vec2& position, const std::vector<Vec2>& points,
                                        double threshold);

inline constexpr double kRouteHorizon = 200.0;

struct Route {
  std::size_t destination_index = 0;
  Vec2 destination = Vec2::Zero();
  double length = 0.0;
  Polyline path;
};

// Lane-graph walk from the start pose. The destination is the reachable
// waypoint with the greatest arc distance within `horizon`; when no waypoint
// lies within the horizon, the farthest reachable one.
Route plan_route(const Vec2& start, double heading, const RoadNetwork& network,
                 double horizon = kRouteHorizon);
Vec2 route_destination(const Vec2& start, double heading, const RoadNetwork& network);

// Built-in desk-scale maps: "straight", "grid4", "ring", "rural".
RoadNetwork builtin_map(std::string_view kind);
const std::vector<std::string>& builtin_map_names();

}  // namespace steinseed
