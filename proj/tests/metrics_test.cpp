#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "steinseed/metrics.hpp"

namespace steinseed {
namespace {

EpisodeResult fake_episode(bool violated) {
  EpisodeResult r;
  if (violated) r.violations.push_back({ViolationKind::kCollision, 0, 0});
  return r;
}

std::vector<EpisodeResult> pattern(const std::vector<bool>& flags) {
  std::vector<EpisodeResult> out;
  for (bool f : flags) out.push_back(fake_episode(f));
  return out;
}

TEST(ViolationRate, Counts) {
  EXPECT_DOUBLE_EQ(violation_rate(pattern({true, true, true})), 1.0);
  EXPECT_DOUBLE_EQ(violation_rate(pattern({false, false})), 0.0);
  EXPECT_DOUBLE_EQ(violation_rate(pattern({true, false, false, true, false, true, false, false})), 0.375);
  EXPECT_THROW(violation_rate(std::vector<EpisodeResult>{}), Error);
}

TEST(TopKRounds, SequenceWalks) {
  EXPECT_EQ(top_k_rounds(pattern(std::vector<bool>(12, true))), 10u);
  EXPECT_FALSE(top_k_rounds(pattern(std::vector<bool>(9, true))).has_value());
  std::vector<bool> alternating;
  for (int i = 0; i < 30; ++i) alternating.push_back(i % 2 == 0);
  EXPECT_EQ(top_k_rounds(pattern(alternating)), 19u);
  EXPECT_EQ(top_k_rounds(pattern({false, false, true}), 1), 3u);
}

TEST(ParameterDistance, HandCases) {
  const SeedVector a = SeedVector::Zero(7);
  const SeedVector b = SeedVector::Ones(7);
  EXPECT_DOUBLE_EQ(normalized_distance(a, b), 1.0);
  const std::vector<SeedVector> same(4, SeedVector::Constant(7, 0.3));
  EXPECT_DOUBLE_EQ(parameter_distance(same), 0.0);
  const std::vector<SeedVector> extremes = {a, b};
  EXPECT_DOUBLE_EQ(parameter_distance(extremes), 0.5);
  EXPECT_DOUBLE_EQ(parameter_distance(std::vector<SeedVector>{}), 0.0);
}

TEST(ParameterDistance, MatchesDoubleLoopAndIsPermutationInvariant) {
  const RoadNetwork net = builtin_map("grid4");
  Rng rng(1);
  std::vector<Chromosome> seeds;
  for (int i = 0; i < 10; ++i) seeds.push_back(random_chromosome(net, 20, rng));
  double oracle = 0.0;
  for (const Chromosome& x : seeds) {
    const SeedVector ex = encode(x, net);
    double inner = 0.0;
    for (const Chromosome& y : seeds) {
      const SeedVector ey = encode(y, net);
      double sq = 0.0;
      for (Eigen::Index d = 0; d < ex.size(); ++d) sq += (ex[d] - ey[d]) * (ex[d] - ey[d]);
      inner += std::sqrt(sq / static_cast<double>(ex.size()));
    }
    oracle += inner / seeds.size();
  }
  oracle /= seeds.size();
  EXPECT_NEAR(parameter_distance(seeds, net), oracle, 1e-12);
  std::shuffle(seeds.begin(), seeds.end(), rng);
  EXPECT_NEAR(parameter_distance(seeds, net), oracle, 1e-12);
}

// A single straight lane with 30 spawn points every 5 m and waypoints every 10 m.
RoadNetwork thirty_spawn_map() {
  const Lane lane{{{0, 0}, {200, 0}}, 3.5, Marking::kSolid, Marking::kSolid};
  const Lane spur{{{0, 20}, {100, 20}}, 3.5, Marking::kSolid, Marking::kSolid};
  std::vector<SpawnPoint> spawns;
  for (int i = 0; i < 30; ++i) spawns.push_back({{5.0 * i, 0.0}, 0.0});
  std::vector<Vec2> waypoints;
  for (int i = 0; i < 10; ++i) waypoints.emplace_back(10.0 + 20.0 * i, 0.0);
  for (int i = 0; i < 10; ++i) waypoints.emplace_back(5.0 + 10.0 * i, 20.0);
  return RoadNetwork({lane, spur}, spawns, waypoints, Omega{200.0, 20.0});
}

EpisodeResult static_episode(const Vec2& ego, const std::vector<Vec2>& objects, bool violated) {
  EpisodeResult r = fake_episode(violated);
  Frame f;
  f.ego = {ego, 0.0, 0.0};
  for (const Vec2& p : objects) {
    f.objects.push_back({p, 0.0, 0.0});
    r.trace.kinds.push_back(ObjectKind::kVehicle);
    r.seed.objects.push_back({ObjectKind::kVehicle, p, 0.0});
  }
  r.seed.route.ego_position = ego;
  r.trace.frames = {f, f};
  return r;
}

TEST(MapCoverage, SetCounting) {
  const RoadNetwork net = thirty_spawn_map();
  EXPECT_DOUBLE_EQ(map_coverage(std::vector<EpisodeResult>{}, net), 0.0);
  // Three spawn points within 50 m of the ego, one beyond, one off any spawn point.
  const std::vector<EpisodeResult> one = {
      static_episode({0, 0}, {{10, 0}, {20.01, 0}, {45, 0}, {120, 0}, {33, 0}}, true)};
  EXPECT_NEAR(map_coverage(one, net), 0.1, 1e-15);

  std::vector<EpisodeResult> repeated = one;
  repeated.push_back(one.front());
  EXPECT_NEAR(map_coverage(repeated, net), 0.1, 1e-15);
  repeated.push_back(static_episode({0, 0}, {{15, 0}}, false));
  EXPECT_NEAR(map_coverage(repeated, net), 0.1, 1e-15);
}

TEST(TrajectoryCoverage, LaneDriveAndGrowth) {
  const RoadNetwork net = thirty_spawn_map();
  EXPECT_DOUBLE_EQ(trajectory_coverage(std::vector<EpisodeResult>{static_episode({0, 0}, {{3, 3}}, false)}, net),
                   0.0);

  // An object drives the spur at 1 m per frame, hitting every spur waypoint.
  EpisodeResult drive;
  drive.trace.kinds = {ObjectKind::kVehicle};
  for (int x = 0; x <= 100; ++x) drive.trace.frames.push_back({{{0, -10}, 0.0, 0.0}, {{{double(x), 20.0}, 0.0, 1.0}}});
  std::vector<EpisodeResult> results = {drive};
  EXPECT_NEAR(trajectory_coverage(results, net), 0.5, 1e-15);

  double previous = trajectory_coverage(results, net);
  for (int i = 0; i < 5; ++i) {
    results.push_back(static_episode({0, 0}, {{10.0 + 20.0 * i, 0.0}}, i % 2 == 0));
    const double now = trajectory_coverage(results, net);
    EXPECT_GE(now, previous);
    previous = now;
  }
  EXPECT_NEAR(previous, 15.0 / 20.0, 1e-15);
}

std::optional<std::size_t> scan_match(const Vec2& p, const std::vector<Vec2>& pts, double threshold) {
  std::optional<std::size_t> best;
  double best_d = threshold;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = (p - pts[i]).norm();
    if (d <= best_d && (!best || d < best_d)) {
      best = i;
      best_d = d;
    }
  }
  return best;
}

TEST(CampaignMetrics, RandomCampaignsMatchBruteForce) {
  const RoadNetwork net = builtin_map("grid4");
  std::vector<Vec2> spawn_pts;
  for (const SpawnPoint& s : net.spawn_points()) spawn_pts.push_back(s.position);
  const std::vector<Vec2>& waypoints = net.waypoints();
  std::mt19937_64 gen(2);
  Rng rng(3);
  std::bernoulli_distribution coin(0.4);
  std::normal_distribution<double> jitter(0.0, 0.03);
  std::uniform_int_distribution<std::size_t> frames(1, 6);
  for (int campaign = 0; campaign < 10; ++campaign) {
    std::vector<EpisodeResult> results;
    for (int e = 0; e < 25; ++e) {
      EpisodeResult r = fake_episode(coin(gen));
      r.seed = random_chromosome(net, 6, rng);
      r.trace.kinds.assign(6, ObjectKind::kVehicle);
      const std::size_t n = frames(gen);
      for (std::size_t t = 0; t < n; ++t) {
        Frame f;
        f.ego = {r.seed.route.ego_position, 0.0, 0.0};
        for (const ObjectInit& o : r.seed.objects) {
          // Frame 0 keeps spawn positions; later frames sit near random waypoints.
          Vec2 p = o.position;
          if (t > 0) p = waypoints[gen() % waypoints.size()] + Vec2(jitter(gen), jitter(gen));
          f.objects.push_back({p, 0.0, 0.0});
        }
        r.trace.frames.push_back(f);
      }
      results.push_back(r);
    }

    std::set<std::size_t> spawn_hits;
    std::set<std::size_t> waypoint_hits;
    std::vector<SeedVector> bad;
    std::size_t violating = 0;
    std::optional<std::size_t> tenth;
    for (std::size_t i = 0; i < results.size(); ++i) {
      const EpisodeResult& r = results[i];
      for (const Frame& f : r.trace.frames) {
        for (const AgentFrame& o : f.objects) {
          if (const auto w = scan_match(o.position, waypoints, 0.05)) waypoint_hits.insert(*w);
        }
      }
      if (r.violations.empty()) continue;
      ++violating;
      if (violating == 10) tenth = i + 1;
      bad.push_back(encode(r.seed, net));
      const Frame& f0 = r.trace.frames.front();
      for (const AgentFrame& o : f0.objects) {
        if ((o.position - f0.ego.position).norm() > 50.0) continue;
        if (const auto s = scan_match(o.position, spawn_pts, 0.05)) spawn_hits.insert(*s);
      }
    }

    const CampaignMetrics m = compute_metrics(results, net);
    EXPECT_EQ(m.episodes, results.size());
    EXPECT_EQ(m.violating, violating);
    EXPECT_DOUBLE_EQ(m.violation_rate, violation_rate(results));
    EXPECT_EQ(m.top_k_rounds, tenth);
    EXPECT_NEAR(m.parameter_distance, parameter_distance(bad), 1e-12);
    EXPECT_DOUBLE_EQ(m.map_coverage, static_cast<double>(spawn_hits.size()) / spawn_pts.size());
    EXPECT_DOUBLE_EQ(m.trajectory_coverage, static_cast<double>(waypoint_hits.size()) / waypoints.size());
  }
}

}  // namespace
}  // namespace steinseed
