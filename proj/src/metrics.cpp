#include "steinseed/metrics.hpp"

#include <cmath>

namespace steinseed {

double violation_rate(std::span<const EpisodeResult> results) {
  if (results.empty()) throw Error("violation_rate: no episodes");
  std::size_t bad = 0;
  for (const EpisodeResult& r : results) bad += r.violated() ? 1 : 0;
  return static_cast<double>(bad) / static_cast<double>(results.size());
}

std::optional<std::size_t> top_k_rounds(std::span<const EpisodeResult> results, std::size_t k) {
  if (k == 0) throw Error("top_k_rounds: k must be positive");
  std::size_t seen = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].violated() && ++seen == k) return i + 1;
  }
  return std::nullopt;
}

double normalized_distance(const SeedVector& a, const SeedVector& b) {
  if (a.size() != b.size()) throw Error("parameter distance: encoded seeds differ in length");
  if (a.size() == 0) return 0.0;
  return (a - b).norm() / std::sqrt(static_cast<double>(a.size()));
}

double parameter_distance(std::span<const SeedVector> encoded) {
  const std::size_t n = encoded.size();
  if (n == 0) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double inner = 0.0;
    for (std::size_t j = 0; j < n; ++j) inner += normalized_distance(encoded[i], encoded[j]);
    total += inner / static_cast<double>(n);
  }
  return total / static_cast<double>(n);
}

double parameter_distance(std::span<const Chromosome> seeds, const RoadNetwork& network) {
  std::vector<SeedVector> encoded;
  encoded.reserve(seeds.size());
  for (const Chromosome& c : seeds) encoded.push_back(encode(c, network));
  return parameter_distance(encoded);
}

MetricsAccumulator::MetricsAccumulator(const RoadNetwork& network, double radius, double threshold,
                                       std::size_t k)
    : network_(&network), radius_(radius), threshold_(threshold), k_(k) {
  if (k_ == 0) throw Error("metrics: k must be positive");
}

void MetricsAccumulator::add(const EpisodeResult& result) {
  ++episodes_;
  const PointIndex& waypoints = network_->waypoint_index();
  for (const Frame& f : result.trace.frames) {
    for (const AgentFrame& o : f.objects) {
      if (const auto w = waypoints.match(o.position, threshold_)) waypoint_hits_.insert(*w);
    }
  }
  if (!result.violated()) return;

  violating_.push_back(encode(result.seed, *network_));
  if (!top_k_ && violating_.size() == k_) top_k_ = episodes_;
  if (result.trace.frames.empty()) return;
  const Frame& first = result.trace.frames.front();
  for (const AgentFrame& o : first.objects) {
    if ((o.position - first.ego.position).norm() > radius_) continue;
    if (const auto s = network_->spawn_index().match(o.position, threshold_)) spawn_hits_.insert(*s);
  }
}

CampaignMetrics MetricsAccumulator::finish() const {
  CampaignMetrics m;
  m.episodes = episodes_;
  m.violating = violating_.size();
  m.violation_rate = episodes_ ? static_cast<double>(m.violating) / static_cast<double>(episodes_) : 0.0;
  m.top_k_rounds = top_k_;
  m.parameter_distance = parameter_distance(violating_);
  const std::size_t spawns = network_->spawn_points().size();
  const std::size_t waypoints = network_->waypoints().size();
  m.map_coverage = spawns ? static_cast<double>(spawn_hits_.size()) / static_cast<double>(spawns) : 0.0;
  m.trajectory_coverage =
      waypoints ? static_cast<double>(waypoint_hits_.size()) / static_cast<double>(waypoints) : 0.0;
  return m;
}

CampaignMetrics compute_metrics(std::span<const EpisodeResult> results, const RoadNetwork& network) {
  MetricsAccumulator acc(network);
  for (const EpisodeResult& r : results) acc.add(r);
  return acc.finish();
}

double map_coverage(std::span<const EpisodeResult> results, const RoadNetwork& network, double radius,
                    double threshold) {
  if (network.spawn_points().empty()) throw Error("map_coverage: network has no spawn points");
  MetricsAccumulator acc(network, radius, threshold);
  for (const EpisodeResult& r : results) acc.add(r);
  return acc.finish().map_coverage;
}

double trajectory_coverage(std::span<const EpisodeResult> results, const RoadNetwork& network, double threshold) {
  if (network.waypoints().empty()) throw Error("trajectory_coverage: network has no waypoints");
  MetricsAccumulator acc(network, kCoverageRadius, threshold);
  for (const EpisodeResult& r : results) acc.add(r);
  return acc.finish().trajectory_coverage;
}

}  // namespace steinseed
