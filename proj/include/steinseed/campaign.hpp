#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "steinseed/arsg.hpp"
#include "steinseed/hazard.hpp"
#include "steinseed/metrics.hpp"
#include "steinseed/simulator.hpp"
#include "steinseed/svgd.hpp"

namespace steinseed {

enum class Mode { kPtop, kNoArsg, kRandom };

const char* mode_name(Mode mode);
Mode mode_from_name(const std::string& name);

struct TrainingConfig {
  std::size_t train_steps = 4;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  std::size_t buffer_capacity = kDefaultBufferCapacity;
  std::size_t half_window = kLabelHalfWindow;
};

struct CampaignConfig {
  // Built-in map name or path to a map file.
  std::string map = "grid4";
  Mode mode = Mode::kPtop;
  std::size_t episodes = 50;
  std::size_t repetitions = 2;
  std::uint64_t seed = 0;
  std::size_t object_count = kDefaultObjectCount;
  std::size_t candidates = kDefaultCandidateCount;
  KindMix kinds;
  RefinerConfig refiner;
  EpisodeConfig episode;
  TrainingConfig training;

  void validate() const;
};

// Unknown keys are rejected; missing keys keep their defaults.
CampaignConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const CampaignConfig& config);
CampaignConfig load_config_file(const std::filesystem::path& path);

RoadNetwork resolve_map(const std::string& map);

// Independent generator for one purpose within one repetition.
enum class Stream : std::uint64_t { kModelInit = 1, kSeeds = 2, kRefine = 3, kEpisode = 4, kTraining = 5 };
Rng make_stream(std::uint64_t seed, std::size_t repetition, Stream stream);

struct ArsgPick {
  std::size_t candidate = 0;
  double min_distance = 0.0;
};

struct EpisodeRecord {
  std::size_t episode = 0;  // position in the whole campaign
  std::size_t repetition = 0;
  std::size_t index = 0;  // position within the repetition
  Mode mode = Mode::kPtop;
  TesterKind tester = TesterKind::kGradient;
  EpisodeResult result;
  std::optional<ArsgPick> arsg;
  std::optional<RefineDiagnostics> refine;
  std::optional<double> train_loss;
  // Executed seeds in the pool and samples in the replay buffer after this episode.
  std::size_t pool_size = 0;
  std::size_t buffer_size = 0;
};

nlohmann::json record_to_json(const EpisodeRecord& record);
EpisodeRecord record_from_json(const nlohmann::json& j);

struct RepetitionSummary {
  std::size_t repetition = 0;
  CampaignMetrics metrics;
  std::size_t svgd_invocations = 0;
  std::size_t arsg_invocations = 0;
};

struct CampaignReport {
  std::vector<RepetitionSummary> repetitions;

  // Mean over repetitions; top_k_rounds is left empty (see mean_top_k_rounds).
  CampaignMetrics mean() const;
  // Mean over the repetitions that reached k violations.
  std::optional<double> mean_top_k_rounds() const;
  std::size_t svgd_invocations() const;
  std::size_t arsg_invocations() const;
};

struct CampaignRun {
  CampaignReport report;
  // Surrogate state at the end of the last repetition.
  HazardModel model;
  double wall_time = 0.0;
};

using EpisodeObserver = std::function<void(const EpisodeRecord&)>;

CampaignRun run_campaign(const CampaignConfig& config, const RoadNetwork& network,
                         const EpisodeObserver& observer = {});

// Per-repetition metrics rebuilt from stored records.
CampaignReport report_from_records(const std::vector<EpisodeRecord>& records, const RoadNetwork& network);

std::string report_csv(const CampaignReport& report);

struct ScatterTables {
  std::string relative;
  std::string absolute;
};
ScatterTables export_scatter(const std::vector<EpisodeRecord>& records);

// Reads an episodes file; every line must parse.
std::vector<EpisodeRecord> read_records(const std::filesystem::path& path);

struct ReplaySummary {
  std::size_t episodes = 0;
  std::size_t violating = 0;
};
// Re-detects violations on every stored trace; throws IntegrityError on any mismatch.
void replay_record(const EpisodeRecord& record, const RoadNetwork& network);
ReplaySummary replay_file(const std::filesystem::path& path, const RoadNetwork& network);

// Runs a campaign and writes episodes.jsonl, report.csv, scatter_rel.csv,
// scatter_abs.csv, hazard.ckpt, map.json, config.json and timing.csv to `out`.
CampaignReport run_campaign_to_directory(const CampaignConfig& config, const std::filesystem::path& out);

}  // namespace steinseed
