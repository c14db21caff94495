#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "steinseed/map_model.hpp"
#include "steinseed/scenario.hpp"
#include "steinseed/simulator.hpp"

namespace steinseed {

inline constexpr double kCoverageRadius = 50.0;
inline constexpr double kMatchThreshold = 0.05;
inline constexpr std::size_t kTopK = 10;

double violation_rate(std::span<const EpisodeResult> results);

// 1-based index of the episode holding the k-th violation, if any.
std::optional<std::size_t> top_k_rounds(std::span<const EpisodeResult> results, std::size_t k = kTopK);

// Euclidean distance scaled by 1/sqrt(length), so two encoded seeds are at most 1 apart.
double normalized_distance(const SeedVector& a, const SeedVector& b);
// Double mean of normalized pairwise distances, diagonal included; 0 for an empty set.
double parameter_distance(std::span<const SeedVector> encoded);
double parameter_distance(std::span<const Chromosome> seeds, const RoadNetwork& network);

double map_coverage(std::span<const EpisodeResult> results, const RoadNetwork& network,
                    double radius = kCoverageRadius, double threshold = kMatchThreshold);
double trajectory_coverage(std::span<const EpisodeResult> results, const RoadNetwork& network,
                           double threshold = kMatchThreshold);

struct CampaignMetrics {
  std::size_t episodes = 0;
  std::size_t violating = 0;
  double violation_rate = 0.0;
  std::optional<std::size_t> top_k_rounds;
  double parameter_distance = 0.0;
  double map_coverage = 0.0;
  double trajectory_coverage = 0.0;
};

// Consumes episodes one at a time so a campaign need not keep every trace.
class MetricsAccumulator {
 public:
  explicit MetricsAccumulator(const RoadNetwork& network, double radius = kCoverageRadius,
                              double threshold = kMatchThreshold, std::size_t k = kTopK);

  void add(const EpisodeResult& result);
  CampaignMetrics finish() const;

  const std::vector<SeedVector>& violating_seeds() const { return violating_; }
  const std::set<std::size_t>& spawn_hits() const { return spawn_hits_; }
  const std::set<std::size_t>& waypoint_hits() const { return waypoint_hits_; }

 private:
  const RoadNetwork* network_;
  double radius_;
  double threshold_;
  std::size_t k_;
  std::size_t episodes_ = 0;
  std::optional<std::size_t> top_k_;
  std::vector<SeedVector> violating_;
  std::set<std::size_t> spawn_hits_;
  std::set<std::size_t> waypoint_hits_;
};

CampaignMetrics compute_metrics(std::span<const EpisodeResult> results, const RoadNetwork& network);

}  // namespace steinseed
