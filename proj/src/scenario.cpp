#include "steinseed/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "steinseed/json_io.hpp"

namespace steinseed {

using nlohmann::json;

const char* kind_name(ObjectKind kind) {
  switch (kind) {
    case ObjectKind::kVehicle:
      return "vehicle";
    case ObjectKind::kBicycle:
      return "bicycle";
    case ObjectKind::kPedestrian:
      return "pedestrian";
  }
  return "vehicle";
}

ObjectKind kind_from_name(std::string_view name) {
  if (name == "vehicle") return ObjectKind::kVehicle;
  if (name == "bicycle") return ObjectKind::kBicycle;
  if (name == "pedestrian") return ObjectKind::kPedestrian;
  throw ParseError("unknown object kind: " + std::string(name));
}

Footprint footprint_of(ObjectKind kind) {
  switch (kind) {
    case ObjectKind::kVehicle:
      return {4.5, 2.0};
    case ObjectKind::kBicycle:
      return {1.8, 0.6};
    case ObjectKind::kPedestrian:
      return {0.5, 0.5};
  }
  return {4.5, 2.0};
}

namespace {

double kind_fraction(ObjectKind kind) {
  switch (kind) {
    case ObjectKind::kVehicle:
      return 0.0;
    case ObjectKind::kBicycle:
      return 0.5;
    case ObjectKind::kPedestrian:
      return 1.0;
  }
  return 0.0;
}

ObjectKind kind_from_fraction(double f) {
  if (f < 0.25) return ObjectKind::kVehicle;
  if (f < 0.75) return ObjectKind::kBicycle;
  return ObjectKind::kPedestrian;
}

ObjectKind draw_kind(const KindMix& mix, Rng& rng) {
  const double total = mix.vehicle + mix.bicycle + mix.pedestrian;
  const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
  if (u < mix.vehicle) return ObjectKind::kVehicle;
  if (u < mix.vehicle + mix.bicycle) return ObjectKind::kBicycle;
  return ObjectKind::kPedestrian;
}

double normalize(double v, double lo, double hi) {
  return hi > lo ? std::clamp((v - lo) / (hi - lo), 0.0, 1.0) : 0.0;
}

}  // namespace

Chromosome random_chromosome(const RoadNetwork& network, std::size_t object_count, Rng& rng,
                             const KindMix& mix) {
  const auto& spawns = network.spawn_points();
  if (spawns.empty()) throw Error("map has no spawn points");
  const std::size_t ego_idx = std::uniform_int_distribution<std::size_t>(0, spawns.size() - 1)(rng);

  Chromosome c;
  c.route.ego_position = spawns[ego_idx].position;
  c.route.ego_heading = wrap_angle(spawns[ego_idx].heading);
  c.route.destination = route_destination(c.route.ego_position, c.route.ego_heading, network);

  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < spawns.size(); ++i) {
    if ((spawns[i].position - c.route.ego_position).norm() >= kVehicleLength) eligible.push_back(i);
  }
  if (object_count > eligible.size()) throw Error("map too small for the requested object count");

  // Partial Fisher-Yates: the first object_count entries are a uniform draw without replacement.
  for (std::size_t i = 0; i < object_count; ++i) {
    const std::size_t j = std::uniform_int_distribution<std::size_t>(i, eligible.size() - 1)(rng);
    std::swap(eligible[i], eligible[j]);
    const SpawnPoint& sp = spawns[eligible[i]];
    c.objects.push_back({draw_kind(mix, rng), sp.position, wrap_angle(sp.heading)});
  }
  return c;
}

std::size_t encoded_length(std::size_t object_count) { return 3 + 4 * object_count; }

SeedVector encode(const Chromosome& chromosome, const RoadNetwork& network) {
  const Vec2& lo = network.bounds_min();
  const Vec2& hi = network.bounds_max();
  auto heading01 = [](double h) { return (wrap_angle(h) + kPi) / kTwoPi; };
  SeedVector v(encoded_length(chromosome.objects.size()));
  v[0] = normalize(chromosome.route.ego_position.x(), lo.x(), hi.x());
  v[1] = normalize(chromosome.route.ego_position.y(), lo.y(), hi.y());
  v[2] = heading01(chromosome.route.ego_heading);
  for (std::size_t i = 0; i < chromosome.objects.size(); ++i) {
    const ObjectInit& o = chromosome.objects[i];
    const std::size_t b = 3 + 4 * i;
    v[b] = normalize(o.position.x(), lo.x(), hi.x());
    v[b + 1] = normalize(o.position.y(), lo.y(), hi.y());
    v[b + 2] = heading01(o.heading);
    v[b + 3] = kind_fraction(o.kind);
  }
  return v;
}

Chromosome decode(const SeedVector& encoded, const RoadNetwork& network) {
  if (encoded.size() < 3 || (encoded.size() - 3) % 4 != 0) {
    throw Error("decode: encoded seed has an invalid length");
  }
  const Vec2& lo = network.bounds_min();
  const Vec2& hi = network.bounds_max();
  auto coord = [&](double f, int axis) { return lo[axis] + f * (hi[axis] - lo[axis]); };
  auto heading = [](double f) { return wrap_angle(f * kTwoPi - kPi); };
  Chromosome c;
  c.route.ego_position = {coord(encoded[0], 0), coord(encoded[1], 1)};
  c.route.ego_heading = heading(encoded[2]);
  c.route.destination = route_destination(c.route.ego_position, c.route.ego_heading, network);
  const std::size_t n = (encoded.size() - 3) / 4;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t b = 3 + 4 * i;
    c.objects.push_back({kind_from_fraction(encoded[b + 3]),
                         {coord(encoded[b], 0), coord(encoded[b + 1], 1)},
                         heading(encoded[b + 2])});
  }
  return c;
}

Particle relative_state(const Pose& ego, const Pose& object) {
  const Vec2 d = object.position - ego.position;
  const double c = std::cos(ego.heading);
  const double s = std::sin(ego.heading);
  return {c * d.x() + s * d.y(), -s * d.x() + c * d.y(), wrap_angle(object.heading - ego.heading)};
}

Pose absolute_pose(const Pose& ego, const Particle& particle) {
  const double c = std::cos(ego.heading);
  const double s = std::sin(ego.heading);
  Pose p;
  p.position = ego.position + Vec2(c * particle.delta_s - s * particle.delta_d,
                                   s * particle.delta_s + c * particle.delta_d);
  p.heading = wrap_angle(ego.heading + particle.delta_psi);
  return p;
}

Chromosome apply_particles(const Chromosome& chromosome,
                           std::span<const std::pair<std::size_t, Particle>> assignments,
                           const RoadNetwork& network) {
  Chromosome out = chromosome;
  std::set<std::size_t> seen;
  const Pose ego = chromosome.ego_pose();
  for (const auto& [index, particle] : assignments) {
    if (index >= out.objects.size()) throw Error("apply_particles: object index out of range");
    if (!seen.insert(index).second) throw Error("apply_particles: duplicate object index");
    const Pose p = absolute_pose(ego, particle);
    out.objects[index].position = network.on_road(p.position) ? p.position : network.nearest_lane_point(p.position);
    out.objects[index].heading = p.heading;
  }
  return out;
}

json to_json_value(const Chromosome& c) {
  json j;
  j["ego"] = {{"pos", {c.route.ego_position.x(), c.route.ego_position.y()}},
              {"heading", c.route.ego_heading},
              {"destination", {c.route.destination.x(), c.route.destination.y()}}};
  j["objects"] = json::array();
  for (const ObjectInit& o : c.objects) {
    j["objects"].push_back(
        {{"kind", kind_name(o.kind)}, {"pos", {o.position.x(), o.position.y()}}, {"heading", o.heading}});
  }
  return j;
}

Chromosome chromosome_from_json(const json& j) {
  try {
    Chromosome c;
    const json& e = j.at("ego");
    c.route.ego_position = {e.at("pos").at(0).get<double>(), e.at("pos").at(1).get<double>()};
    c.route.ego_heading = e.at("heading").get<double>();
    c.route.destination = {e.at("destination").at(0).get<double>(), e.at("destination").at(1).get<double>()};
    for (const json& o : j.at("objects")) {
      c.objects.push_back({kind_from_name(o.at("kind").get<std::string>()),
                           {o.at("pos").at(0).get<double>(), o.at("pos").at(1).get<double>()},
                           o.at("heading").get<double>()});
    }
    return c;
  } catch (const json::exception& ex) {
    throw ParseError(std::string("seed record: ") + ex.what());
  }
}

std::string chromosome_to_line(const Chromosome& chromosome) { return to_json_value(chromosome).dump(); }

Chromosome chromosome_from_line(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("seed record: ") + e.what());
  }
  return chromosome_from_json(j);
}

}  // namespace steinseed
