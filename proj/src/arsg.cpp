#include "steinseed/arsg.hpp"

#include <limits>

namespace steinseed {

SeedPool::SeedPool(std::size_t candidate_count) : candidate_count_(candidate_count) {
  if (candidate_count_ < 1) throw Error("seed pool: candidate count must be at least 1");
}

void SeedPool::add(SeedVector encoded) {
  if (!executed_.empty() && encoded.size() != executed_.front().size()) {
    throw Error("seed pool: executed seeds must share one dimension");
  }
  executed_.push_back(std::move(encoded));
}

std::vector<Chromosome> generate_candidates(const RoadNetwork& network, std::size_t object_count,
                                            std::size_t k, Rng& rng, const KindMix& mix) {
  if (k < 1) throw Error("generate_candidates: k must be at least 1");
  std::vector<Chromosome> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(random_chromosome(network, object_count, rng, mix));
  return out;
}

double min_distance_to_executed(const SeedVector& candidate, const SeedPool& pool) {
  double best = std::numeric_limits<double>::infinity();
  for (const SeedVector& t : pool.executed()) best = std::min(best, (candidate - t).norm());
  return best;
}

std::pair<Chromosome, std::size_t> select_next(const std::vector<Chromosome>& candidates,
                                               const SeedPool& pool, const RoadNetwork& network, Rng& rng) {
  if (candidates.empty()) throw Error("select_next: no candidates");
  if (pool.executed().empty()) {
    const std::size_t pick = std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng);
    return {candidates[pick], pick};
  }
  std::size_t best = 0;
  double best_score = -1.0;
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    const double score = min_distance_to_executed(encode(candidates[j], network), pool);
    if (score > best_score) {
      best_score = score;
      best = j;
    }
  }
  return {candidates[best], best};
}

void record_executed(SeedPool& pool, const Chromosome& seed, const RoadNetwork& network) {
  pool.add(encode(seed, network));
}

}  // namespace steinseed
