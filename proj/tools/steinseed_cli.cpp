#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "steinseed/campaign.hpp"

namespace fs = std::filesystem;
using namespace steinseed;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

RoadNetwork map_next_to(const fs::path& file) {
  const fs::path map = file.parent_path() / "map.json";
  if (!fs::exists(map)) throw Error("no map.json next to " + file.string());
  return load_map_file(map.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seed generation and online testing harness for driving scenarios"};
  app.require_subcommand(1);

  std::string config_path;
  std::string mode;
  std::string tester;
  std::optional<std::size_t> episodes;
  std::optional<std::size_t> reps;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  auto* run = app.add_subcommand("run", "Run a testing campaign");
  run->add_option("--config", config_path, "Campaign config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--mode", mode, "Seed pipeline")->check(CLI::IsMember({"ptop", "no_arsg", "random"}));
  run->add_option("--tester", tester, "Online object controller")->check(CLI::IsMember({"gradient", "random"}));
  run->add_option("--episodes", episodes, "Episodes per repetition");
  run->add_option("--reps", reps, "Repetitions");
  run->add_option("--seed", seed, "Master RNG seed");
  run->add_option("--out", out_dir, "Output directory")->required();

  std::string replay_in;
  std::string replay_map;
  auto* replay = app.add_subcommand("replay", "Re-detect violations on stored episodes");
  replay->add_option("--in", replay_in, "episodes.jsonl")->required()->check(CLI::ExistingFile);
  replay->add_option("--map", replay_map, "Map file or built-in name (default: map.json beside the input)");

  std::string metrics_in;
  std::string metrics_out;
  auto* metrics = app.add_subcommand("metrics", "Recompute the campaign report from stored episodes");
  metrics->add_option("--in", metrics_in, "Campaign output directory")->required()->check(CLI::ExistingDirectory);
  metrics->add_option("--out", metrics_out, "CSV path")->required();

  std::string scatter_in;
  std::string scatter_out;
  auto* scatter = app.add_subcommand("scatter", "Export initial positions of violating seeds");
  scatter->add_option("--in", scatter_in, "Campaign output directory")->required()->check(CLI::ExistingDirectory);
  scatter->add_option("--out", scatter_out, "Output directory")->required();

  std::string map_kind;
  std::string map_out;
  auto* gen_map = app.add_subcommand("gen-map", "Write a built-in map as JSON");
  gen_map->add_option("--kind", map_kind, "Map kind")
      ->required()
      ->check(CLI::IsMember({"straight", "grid4", "ring", "rural"}));
  gen_map->add_option("--out", map_out, "Output path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      CampaignConfig config = load_config_file(config_path);
      if (!mode.empty()) config.mode = mode_from_name(mode);
      if (!tester.empty()) config.episode.tester = tester_from_name(tester);
      if (episodes) config.episodes = *episodes;
      if (reps) config.repetitions = *reps;
      if (seed) config.seed = *seed;
      const CampaignReport report = run_campaign_to_directory(config, out_dir);
      const CampaignMetrics m = report.mean();
      std::cout << "episodes " << m.episodes << ", violating " << m.violating << ", violation rate "
                << m.violation_rate << ", parameter distance " << m.parameter_distance << ", map coverage "
                << m.map_coverage << ", trajectory coverage " << m.trajectory_coverage << "\n";
    } else if (*replay) {
      const RoadNetwork network = replay_map.empty() ? map_next_to(replay_in) : resolve_map(replay_map);
      const ReplaySummary s = replay_file(replay_in, network);
      std::cout << "replayed " << s.episodes << " episodes, " << s.violating << " violating, all consistent\n";
    } else if (*metrics) {
      const fs::path dir = metrics_in;
      const RoadNetwork network = load_map_file((dir / "map.json").string());
      const auto records = read_records(dir / "episodes.jsonl");
      write_file(metrics_out, report_csv(report_from_records(records, network)));
    } else if (*scatter) {
      const fs::path dir = scatter_in;
      const ScatterTables tables = export_scatter(read_records(dir / "episodes.jsonl"));
      write_file(fs::path(scatter_out) / "scatter_rel.csv", tables.relative);
      write_file(fs::path(scatter_out) / "scatter_abs.csv", tables.absolute);
    } else if (*gen_map) {
      write_file(map_out, map_to_json(builtin_map(map_kind)) + "\n");
    }
  } catch (const IntegrityError& e) {
    std::cerr << "integrity error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
