#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "steinseed/geometry.hpp"
#include "steinseed/map_model.hpp"

namespace steinseed {

using Rng = std::mt19937_64;

enum class ObjectKind { kVehicle, kBicycle, kPedestrian };

const char* kind_name(ObjectKind kind);
ObjectKind kind_from_name(std::string_view name);

struct Footprint {
  double length;
  double width;
};
Footprint footprint_of(ObjectKind kind);

inline constexpr double kVehicleLength = 4.5;
inline constexpr std::size_t kDefaultObjectCount = 20;

struct ObjectInit {
  ObjectKind kind = ObjectKind::kVehicle;
  Vec2 position = Vec2::Zero();
  double heading = 0.0;

  Pose pose() const { return {position, heading}; }
  bool operator==(const ObjectInit&) const = default;
};

struct RouteGene {
  Vec2 ego_position = Vec2::Zero();
  double ego_heading = 0.0;
  Vec2 destination = Vec2::Zero();

  bool operator==(const RouteGene&) const = default;
};

// A test seed: the ego route plus the initial placement of every dynamic object.
struct Chromosome {
  RouteGene route;
  std::vector<ObjectInit> objects;

  Pose ego_pose() const { return {route.ego_position, route.ego_heading}; }
  bool operator==(const Chromosome&) const = default;
};

// Ego-relative object state: longitudinal and lateral offset in the ego body
// frame (lateral positive to the left) and relative yaw.
struct Particle {
  double delta_s = 0.0;
  double delta_d = 0.0;
  double delta_psi = 0.0;

  Vec3 vec() const { return {delta_s, delta_d, delta_psi}; }
  static Particle from_vec(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
};

struct KindMix {
  double vehicle = 0.6;
  double bicycle = 0.2;
  double pedestrian = 0.2;
};

// Ego on a uniformly chosen spawn point; objects on distinct spawn points at
// least one vehicle length away from the ego.
Chromosome random_chromosome(const RoadNetwork& network, std::size_t object_count, Rng& rng,
                             const KindMix& mix = {});

using SeedVector = Eigen::VectorXd;

// Ego (x, y, heading) then per object (x, y, heading, kind), all in [0, 1].
SeedVector encode(const Chromosome& chromosome, const RoadNetwork& network);
// Inverse of encode; the destination is re-derived from the ego pose.
Chromosome decode(const SeedVector& encoded, const RoadNetwork& network);
std::size_t encoded_length(std::size_t object_count);

Particle relative_state(const Pose& ego, const Pose& object);
Pose absolute_pose(const Pose& ego, const Particle& particle);

// Places each assigned object at the absolute pose of its particle. Positions
// that leave the road are snapped to the nearest centerline point.
Chromosome apply_particles(const Chromosome& chromosome,
                           std::span<const std::pair<std::size_t, Particle>> assignments,
                           const RoadNetwork& network);

std::string chromosome_to_line(const Chromosome& chromosome);
Chromosome chromosome_from_line(std::string_view line);

}  // namespace steinseed
