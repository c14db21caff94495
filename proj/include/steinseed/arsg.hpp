#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "steinseed/map_model.hpp"
#include "steinseed/scenario.hpp"

namespace steinseed {

inline constexpr std::size_t kDefaultCandidateCount = 10;

// Encoded vectors of every executed seed.
class SeedPool {
 public:
  explicit SeedPool(std::size_t candidate_count = kDefaultCandidateCount);

  std::size_t candidate_count() const { return candidate_count_; }
  const std::vector<SeedVector>& executed() const { return executed_; }
  std::size_t size() const { return executed_.size(); }

  void add(SeedVector encoded);

 private:
  std::size_t candidate_count_;
  std::vector<SeedVector> executed_;
};

std::vector<Chromosome> generate_candidates(const RoadNetwork& network, std::size_t object_count,
                                            std::size_t k, Rng& rng, const KindMix& mix = {});

// Minimum Euclidean distance from `candidate` to any executed seed (infinity when none).
double min_distance_to_executed(const SeedVector& candidate, const SeedPool& pool);

// Candidate maximizing its minimum distance to the executed seeds, lowest index
// on ties. With no executed seeds the pick is uniform over candidates.
std::pair<Chromosome, std::size_t> select_next(const std::vector<Chromosome>& candidates,
                                               const SeedPool& pool, const RoadNetwork& network, Rng& rng);

void record_executed(SeedPool& pool, const Chromosome& seed, const RoadNetwork& network);

}  // namespace steinseed
