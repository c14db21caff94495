#include <algorithm>
#include <cmath>
#include <string>

#include "steinseed/map_model.hpp"

namespace steinseed {

namespace {

constexpr double kLaneWidth = 3.5;

Polyline reversed(Polyline line) {
  std::reverse(line.begin(), line.end());
  return line;
}

// Relative-state bounds spanning the map: the longer side of the drivable
// extent bounds the longitudinal offset, the shorter side the lateral one.
Omega map_range(const std::vector<Lane>& lanes) {
  Vec2 lo = lanes.front().centerline.front();
  Vec2 hi = lo;
  for (const Lane& lane : lanes) {
    for (const Vec2& p : lane.centerline) {
      lo = lo.cwiseMin(p - Vec2::Constant(0.5 * lane.width));
      hi = hi.cwiseMax(p + Vec2::Constant(0.5 * lane.width));
    }
  }
  const Vec2 span = hi - lo;
  return {span.maxCoeff(), span.minCoeff()};
}

RoadNetwork make_network(const std::vector<Lane>& driving, const std::vector<Lane>& connectors) {
  std::vector<Lane> all = driving;
  all.insert(all.end(), connectors.begin(), connectors.end());
  const Omega omega = map_range(all);
  auto spawns = sample_spawn_points(driving);
  auto waypoints = sample_waypoints(all);
  return RoadNetwork(std::move(all), std::move(spawns), std::move(waypoints), omega);
}

RoadNetwork make_straight() {
  const double half = 0.5 * kLaneWidth;
  Lane east{{{0.0, -half}, {300.0, -half}}, kLaneWidth, Marking::kDashed, Marking::kSolid};
  Lane west{{{300.0, half}, {0.0, half}}, kLaneWidth, Marking::kDashed, Marking::kSolid};
  return make_network({east, west}, {});
}

// 3x3 grid of four-way (edge: three-way, corner: two-way) junctions 100 m apart.
// Two-way roads with a solid center line; junction interiors are covered by
// dashed connector lanes for every non-U-turn movement.
RoadNetwork make_grid4() {
  constexpr double kSpacing = 100.0;
  constexpr int kNodes = 3;
  constexpr double kJunction = 12.0;
  const double off = 0.5 * kLaneWidth;
  const Vec2 arms[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  auto right_of = [](const Vec2& a) { return Vec2(a.y(), -a.x()); };
  auto has_arm = [&](int ix, int iy, const Vec2& a) {
    const int nx = ix + static_cast<int>(a.x());
    const int ny = iy + static_cast<int>(a.y());
    return nx >= 0 && nx < kNodes && ny >= 0 && ny < kNodes;
  };

  std::vector<Lane> driving;
  std::vector<Lane> connectors;
  for (int ix = 0; ix < kNodes; ++ix) {
    for (int iy = 0; iy < kNodes; ++iy) {
      const Vec2 node(ix * kSpacing, iy * kSpacing);
      // Each road is emitted once, from its west/south node, in both directions.
      for (int k = 0; k < 2; ++k) {
        const Vec2& a = arms[k];
        if (!has_arm(ix, iy, a)) continue;
        const Vec2 far = node + kSpacing * a;
        const Vec2 r = right_of(a);
        Polyline out{node + kJunction * a + off * r, far - kJunction * a + off * r};
        Polyline back{far - kJunction * a - off * r, node + kJunction * a - off * r};
        driving.push_back({out, kLaneWidth, Marking::kSolid, Marking::kSolid});
        driving.push_back({back, kLaneWidth, Marking::kSolid, Marking::kSolid});
      }
      for (const Vec2& in_arm : arms) {
        if (!has_arm(ix, iy, in_arm)) continue;
        for (const Vec2& out_arm : arms) {
          if (!has_arm(ix, iy, out_arm) || out_arm == in_arm) continue;
          const Vec2 p0 = node + kJunction * in_arm - off * right_of(in_arm);
          const Vec2 p3 = node + kJunction * out_arm + off * right_of(out_arm);
          Polyline line;
          if (out_arm == -in_arm) {
            line = {p0, p3};
          } else {
            const double c = 0.55 * kJunction;
            const Vec2 p1 = p0 - c * in_arm;
            const Vec2 p2 = p3 - c * out_arm;
            for (int s = 0; s <= 8; ++s) {
              const double t = s / 8.0;
              const double u = 1.0 - t;
              line.push_back(u * u * u * p0 + 3 * u * u * t * p1 + 3 * u * t * t * p2 + t * t * t * p3);
            }
          }
          connectors.push_back({line, kLaneWidth, Marking::kDashed, Marking::kDashed});
        }
      }
    }
  }
  return make_network(driving, connectors);
}

// Two counter-clockwise lanes around a circle.
RoadNetwork make_ring() {
  constexpr double kRadius = 60.0;
  const Vec2 center(80.0, 80.0);
  auto circle = [&](double radius) {
    Polyline line;
    for (int deg = 0; deg < 360; deg += 5) {
      const double a = deg * kPi / 180.0;
      line.emplace_back(center + radius * Vec2(std::cos(a), std::sin(a)));
    }
    line.push_back(line.front());
    return line;
  };
  const double half = 0.5 * kLaneWidth;
  Lane inner{circle(kRadius - half), kLaneWidth, Marking::kSolid, Marking::kDashed};
  Lane outer{circle(kRadius + half), kLaneWidth, Marking::kDashed, Marking::kSolid};
  return make_network({inner, outer}, {});
}

// Narrow winding two-way road with a no-passing center line.
RoadNetwork make_rural() {
  constexpr double kWidth = 3.0;
  Polyline center;
  for (double x = 0.0; x <= 400.0 + 1e-9; x += 5.0) {
    center.emplace_back(x, 40.0 + 20.0 * std::sin(2.0 * kPi * x / 200.0));
  }
  Lane east{offset_polyline(center, -0.5 * kWidth), kWidth, Marking::kSolid, Marking::kSolid};
  Lane west{reversed(offset_polyline(center, 0.5 * kWidth)), kWidth, Marking::kSolid, Marking::kSolid};
  return make_network({east, west}, {});
}

}  // namespace

const std::vector<std::string>& builtin_map_names() {
  static const std::vector<std::string> names = {"straight", "grid4", "ring", "rural"};
  return names;
}

RoadNetwork builtin_map(std::string_view kind) {
  if (kind == "straight") return make_straight();
  if (kind == "grid4") return make_grid4();
  if (kind == "ring") return make_ring();
  if (kind == "rural") return make_rural();
  throw Error("unknown built-in map: " + std::string(kind));
}

}  // namespace steinseed
