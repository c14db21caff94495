#include "steinseed/campaign.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "steinseed/episode_io.hpp"

namespace steinseed {

using nlohmann::json;
namespace fs = std::filesystem;

const char* mode_name(Mode mode) {
  switch (mode) {
    case Mode::kPtop:
      return "ptop";
    case Mode::kNoArsg:
      return "no_arsg";
    case Mode::kRandom:
      return "random";
  }
  return "ptop";
}

Mode mode_from_name(const std::string& name) {
  if (name == "ptop") return Mode::kPtop;
  if (name == "no_arsg") return Mode::kNoArsg;
  if (name == "random") return Mode::kRandom;
  throw ParseError("unknown mode: " + name);
}

void CampaignConfig::validate() const {
  if (episodes == 0) throw ValidationError("config: episodes must be at least 1");
  if (repetitions == 0) throw ValidationError("config: repetitions must be at least 1");
  if (candidates == 0) throw ValidationError("config: candidates must be at least 1");
  if (!(episode.dt > 0.0)) throw ValidationError("config: episode.dt must be positive");
  if (episode.horizon == 0) throw ValidationError("config: episode.horizon must be positive");
  if (training.batch_size == 0) throw ValidationError("config: training.batch_size must be positive");
  if (training.buffer_capacity == 0) throw ValidationError("config: training.buffer_capacity must be positive");
  if (!(training.learning_rate > 0.0)) throw ValidationError("config: training.learning_rate must be positive");
  if (kinds.vehicle < 0.0 || kinds.bicycle < 0.0 || kinds.pedestrian < 0.0 ||
      !(kinds.vehicle + kinds.bicycle + kinds.pedestrian > 0.0)) {
    throw ValidationError("config: kinds must be non-negative with a positive sum");
  }
  try {
    refiner.validate();
  } catch (const Error& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ParseError("config: " + where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ParseError("config: unknown key " + where + key);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

CampaignConfig config_from_json(const json& j) {
  CampaignConfig c;
  try {
    check_keys(j,
               {"map", "mode", "tester", "episodes", "repetitions", "seed", "object_count", "candidates", "kinds",
                "refiner", "episode", "training"},
               "");
    read(j, "map", c.map);
    if (j.contains("mode")) c.mode = mode_from_name(j.at("mode").get<std::string>());
    if (j.contains("tester")) c.episode.tester = tester_from_name(j.at("tester").get<std::string>());
    read(j, "episodes", c.episodes);
    read(j, "repetitions", c.repetitions);
    read(j, "seed", c.seed);
    read(j, "object_count", c.object_count);
    read(j, "candidates", c.candidates);
    if (j.contains("kinds")) {
      const json& k = j.at("kinds");
      check_keys(k, {"vehicle", "bicycle", "pedestrian"}, "kinds.");
      read(k, "vehicle", c.kinds.vehicle);
      read(k, "bicycle", c.kinds.bicycle);
      read(k, "pedestrian", c.kinds.pedestrian);
    }
    if (j.contains("refiner")) {
      const json& r = j.at("refiner");
      check_keys(r,
                 {"top_k", "temperature", "repulsion", "step", "iterations", "r_min", "metric", "guard_sweeps",
                  "snap_to_spawn"},
                 "refiner.");
      read(r, "top_k", c.refiner.top_k);
      c.refiner.particle_count = c.refiner.top_k;
      read(r, "temperature", c.refiner.temperature);
      read(r, "repulsion", c.refiner.repulsion);
      read(r, "step", c.refiner.step);
      read(r, "iterations", c.refiner.iterations);
      if (r.contains("r_min") && !r.at("r_min").is_null()) c.refiner.r_min = r.at("r_min").get<double>();
      if (r.contains("metric") && !r.at("metric").is_null()) {
        const auto m = r.at("metric").get<std::vector<double>>();
        if (m.size() != 3) throw ParseError("config: refiner.metric needs 3 entries");
        c.refiner.metric = Vec3(m[0], m[1], m[2]);
      }
      read(r, "guard_sweeps", c.refiner.guard_sweeps);
      read(r, "snap_to_spawn", c.refiner.snap_to_spawn);
    }
    if (j.contains("episode")) {
      const json& e = j.at("episode");
      check_keys(e, {"horizon", "dt", "ascent_iterations", "ascent_step"}, "episode.");
      read(e, "horizon", c.episode.horizon);
      read(e, "dt", c.episode.dt);
      read(e, "ascent_iterations", c.episode.gradient.iterations);
      read(e, "ascent_step", c.episode.gradient.step);
    }
    if (j.contains("training")) {
      const json& t = j.at("training");
      check_keys(t, {"train_steps", "batch_size", "learning_rate", "buffer_capacity", "half_window"}, "training.");
      read(t, "train_steps", c.training.train_steps);
      read(t, "batch_size", c.training.batch_size);
      read(t, "learning_rate", c.training.learning_rate);
      read(t, "buffer_capacity", c.training.buffer_capacity);
      read(t, "half_window", c.training.half_window);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

json config_to_json(const CampaignConfig& c) {
  json j;
  j["map"] = c.map;
  j["mode"] = mode_name(c.mode);
  j["tester"] = tester_name(c.episode.tester);
  j["episodes"] = c.episodes;
  j["repetitions"] = c.repetitions;
  j["seed"] = c.seed;
  j["object_count"] = c.object_count;
  j["candidates"] = c.candidates;
  j["kinds"] = {{"vehicle", c.kinds.vehicle}, {"bicycle", c.kinds.bicycle}, {"pedestrian", c.kinds.pedestrian}};
  json r = {{"top_k", c.refiner.top_k},
            {"temperature", c.refiner.temperature},
            {"repulsion", c.refiner.repulsion},
            {"step", c.refiner.step},
            {"iterations", c.refiner.iterations},
            {"guard_sweeps", c.refiner.guard_sweeps},
            {"snap_to_spawn", c.refiner.snap_to_spawn}};
  r["r_min"] = c.refiner.r_min ? json(*c.refiner.r_min) : json(nullptr);
  r["metric"] = c.refiner.metric ? json::array({c.refiner.metric->x(), c.refiner.metric->y(), c.refiner.metric->z()})
                                 : json(nullptr);
  j["refiner"] = std::move(r);
  j["episode"] = {{"horizon", c.episode.horizon},
                  {"dt", c.episode.dt},
                  {"ascent_iterations", c.episode.gradient.iterations},
                  {"ascent_step", c.episode.gradient.step}};
  j["training"] = {{"train_steps", c.training.train_steps},
                   {"batch_size", c.training.batch_size},
                   {"learning_rate", c.training.learning_rate},
                   {"buffer_capacity", c.training.buffer_capacity},
                   {"half_window", c.training.half_window}};
  return j;
}

CampaignConfig load_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

RoadNetwork resolve_map(const std::string& map) {
  for (const std::string& name : builtin_map_names()) {
    if (name == map) return builtin_map(map);
  }
  return load_map_file(map);
}

Rng make_stream(std::uint64_t seed, std::size_t repetition, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(repetition), static_cast<std::uint32_t>(stream)};
  return Rng(seq);
}

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json diagnostics_to_json(const RefineDiagnostics& d) {
  json j;
  j["selected"] = d.selected;
  j["r_min"] = d.r_min;
  j["residual_violations"] = d.residual_violations;
  json particles = json::array();
  for (const Vec3& p : d.final_particles) particles.push_back({p.x(), p.y(), p.z()});
  j["final_particles"] = std::move(particles);
  json hazard = json::array();
  json separation = json::array();
  json bandwidth = json::array();
  for (const RefineIteration& it : d.iterations) {
    hazard.push_back(it.mean_hazard);
    separation.push_back(finite_or_null(it.min_separation));
    bandwidth.push_back(it.bandwidth);
  }
  j["mean_hazard"] = std::move(hazard);
  j["min_separation"] = std::move(separation);
  j["bandwidth"] = std::move(bandwidth);
  return j;
}

RefineDiagnostics diagnostics_from_json(const json& j) {
  RefineDiagnostics d;
  d.selected = j.at("selected").get<std::vector<std::size_t>>();
  d.r_min = j.at("r_min").get<double>();
  d.residual_violations = j.at("residual_violations").get<std::size_t>();
  for (const json& p : j.at("final_particles")) {
    d.final_particles.emplace_back(p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>());
  }
  const json& hazard = j.at("mean_hazard");
  const json& separation = j.at("min_separation");
  const json& bandwidth = j.at("bandwidth");
  for (std::size_t i = 0; i < hazard.size(); ++i) {
    RefineIteration it;
    it.iteration = i;
    it.mean_hazard = hazard.at(i).get<double>();
    it.min_separation = separation.at(i).is_null() ? std::numeric_limits<double>::infinity()
                                                   : separation.at(i).get<double>();
    it.bandwidth = bandwidth.at(i).get<double>();
    d.iterations.push_back(it);
  }
  return d;
}

}  // namespace

json record_to_json(const EpisodeRecord& r) {
  json j = episode_to_json(r.result);
  j["episode"] = r.episode;
  j["repetition"] = r.repetition;
  j["index"] = r.index;
  j["mode"] = mode_name(r.mode);
  j["tester"] = tester_name(r.tester);
  j["arsg"] = r.arsg ? json{{"candidate", r.arsg->candidate}, {"min_distance", finite_or_null(r.arsg->min_distance)}}
                     : json(nullptr);
  j["refine"] = r.refine ? diagnostics_to_json(*r.refine) : json(nullptr);
  j["train_loss"] = r.train_loss ? finite_or_null(*r.train_loss) : json(nullptr);
  j["pool_size"] = r.pool_size;
  j["buffer_size"] = r.buffer_size;
  return j;
}

EpisodeRecord record_from_json(const json& j) {
  EpisodeRecord r;
  r.result = episode_from_json(j);
  try {
    r.episode = j.at("episode").get<std::size_t>();
    r.repetition = j.at("repetition").get<std::size_t>();
    r.index = j.at("index").get<std::size_t>();
    r.mode = mode_from_name(j.at("mode").get<std::string>());
    r.tester = tester_from_name(j.at("tester").get<std::string>());
    if (!j.at("arsg").is_null()) {
      const json& a = j.at("arsg");
      const json& d = a.at("min_distance");
      r.arsg = ArsgPick{a.at("candidate").get<std::size_t>(),
                        d.is_null() ? std::numeric_limits<double>::infinity() : d.get<double>()};
    }
    if (!j.at("refine").is_null()) r.refine = diagnostics_from_json(j.at("refine"));
    if (!j.at("train_loss").is_null()) r.train_loss = j.at("train_loss").get<double>();
    r.pool_size = j.at("pool_size").get<std::size_t>();
    r.buffer_size = j.at("buffer_size").get<std::size_t>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("episode record: ") + e.what());
  }
  return r;
}

CampaignMetrics CampaignReport::mean() const {
  CampaignMetrics m;
  if (repetitions.empty()) return m;
  const double n = static_cast<double>(repetitions.size());
  for (const RepetitionSummary& r : repetitions) {
    m.episodes += r.metrics.episodes;
    m.violating += r.metrics.violating;
    m.violation_rate += r.metrics.violation_rate / n;
    m.parameter_distance += r.metrics.parameter_distance / n;
    m.map_coverage += r.metrics.map_coverage / n;
    m.trajectory_coverage += r.metrics.trajectory_coverage / n;
  }
  return m;
}

std::optional<double> CampaignReport::mean_top_k_rounds() const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const RepetitionSummary& r : repetitions) {
    if (!r.metrics.top_k_rounds) continue;
    sum += static_cast<double>(*r.metrics.top_k_rounds);
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::size_t CampaignReport::svgd_invocations() const {
  std::size_t n = 0;
  for (const RepetitionSummary& r : repetitions) n += r.svgd_invocations;
  return n;
}

std::size_t CampaignReport::arsg_invocations() const {
  std::size_t n = 0;
  for (const RepetitionSummary& r : repetitions) n += r.arsg_invocations;
  return n;
}

namespace {

void train_after_episode(HazardModel& model, ReplayBuffer& buffer, const EpisodeResult& result,
                         const RoadNetwork& network, const TrainingConfig& training, Rng& rng,
                         EpisodeRecord& record) {
  for (const HazardSample& s : harvest(result.trace, collided_objects(result.trace), network, training.half_window)) {
    buffer.push(s);
  }
  record.buffer_size = buffer.size();
  if (buffer.size() == 0 || training.train_steps == 0) return;
  double loss = 0.0;
  for (std::size_t step = 0; step < training.train_steps; ++step) {
    loss += model.train_step(buffer.sample(training.batch_size, rng), training.learning_rate);
  }
  record.train_loss = loss / static_cast<double>(training.train_steps);
}

}  // namespace

CampaignRun run_campaign(const CampaignConfig& config, const RoadNetwork& network, const EpisodeObserver& observer) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  CampaignRun run;
  std::size_t global = 0;

  for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
    Rng init_rng = make_stream(config.seed, rep, Stream::kModelInit);
    Rng seed_rng = make_stream(config.seed, rep, Stream::kSeeds);
    Rng refine_rng = make_stream(config.seed, rep, Stream::kRefine);
    Rng episode_rng = make_stream(config.seed, rep, Stream::kEpisode);
    Rng train_rng = make_stream(config.seed, rep, Stream::kTraining);

    HazardModel model = HazardModel::initialized(init_rng);
    SeedPool pool(config.candidates);
    ReplayBuffer buffer(config.training.buffer_capacity);
    MetricsAccumulator metrics(network);
    RepetitionSummary summary;
    summary.repetition = rep;

    for (std::size_t e = 0; e < config.episodes; ++e, ++global) {
      EpisodeRecord record;
      record.episode = global;
      record.repetition = rep;
      record.index = e;
      record.mode = config.mode;
      record.tester = config.episode.tester;
      try {
        Chromosome seed;
        if (config.mode == Mode::kPtop) {
          const auto candidates =
              generate_candidates(network, config.object_count, config.candidates, seed_rng, config.kinds);
          auto [chosen, index] = select_next(candidates, pool, network, seed_rng);
          record.arsg = ArsgPick{index, min_distance_to_executed(encode(chosen, network), pool)};
          seed = std::move(chosen);
          ++summary.arsg_invocations;
        } else {
          seed = random_chromosome(network, config.object_count, seed_rng, config.kinds);
        }
        if (config.mode != Mode::kRandom) {
          RefineResult refined = refine(seed, model, network, config.refiner, refine_rng);
          seed = std::move(refined.seed);
          record.refine = std::move(refined.diagnostics);
          ++summary.svgd_invocations;
        }
        if (config.mode == Mode::kPtop) record_executed(pool, seed, network);
        record.result = run_episode(seed, network, model, config.episode, episode_rng);
        train_after_episode(model, buffer, record.result, network, config.training, train_rng, record);
        record.pool_size = pool.size();
      } catch (const Error& ex) {
        throw Error("repetition " + std::to_string(rep) + ", episode " + std::to_string(e) + ": " + ex.what());
      }
      metrics.add(record.result);
      if (observer) observer(record);
    }
    summary.metrics = metrics.finish();
    run.report.repetitions.push_back(summary);
    if (rep + 1 == config.repetitions) run.model = std::move(model);
  }
  run.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return run;
}

CampaignReport report_from_records(const std::vector<EpisodeRecord>& records, const RoadNetwork& network) {
  std::map<std::size_t, std::vector<const EpisodeRecord*>> by_rep;
  for (const EpisodeRecord& r : records) by_rep[r.repetition].push_back(&r);
  CampaignReport report;
  for (auto& [rep, list] : by_rep) {
    std::stable_sort(list.begin(), list.end(),
                     [](const EpisodeRecord* a, const EpisodeRecord* b) { return a->index < b->index; });
    MetricsAccumulator acc(network);
    RepetitionSummary s;
    s.repetition = rep;
    for (const EpisodeRecord* r : list) {
      acc.add(r->result);
      if (r->refine) ++s.svgd_invocations;
      if (r->arsg) ++s.arsg_invocations;
    }
    s.metrics = acc.finish();
    report.repetitions.push_back(s);
  }
  return report;
}

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

std::string report_csv(const CampaignReport& report) {
  std::ostringstream out;
  out << "repetition,episodes,violating,violation_rate,top10_rounds,parameter_distance,map_coverage,"
         "trajectory_coverage,svgd_invocations,arsg_invocations\n";
  for (const RepetitionSummary& r : report.repetitions) {
    const CampaignMetrics& m = r.metrics;
    out << r.repetition << ',' << m.episodes << ',' << m.violating << ',' << num(m.violation_rate) << ','
        << (m.top_k_rounds ? std::to_string(*m.top_k_rounds) : std::string()) << ','
        << num(m.parameter_distance) << ',' << num(m.map_coverage) << ',' << num(m.trajectory_coverage) << ','
        << r.svgd_invocations << ',' << r.arsg_invocations << '\n';
  }
  if (!report.repetitions.empty()) {
    const double n = static_cast<double>(report.repetitions.size());
    const CampaignMetrics m = report.mean();
    const auto top = report.mean_top_k_rounds();
    out << "mean," << num(static_cast<double>(m.episodes) / n) << ',' << num(static_cast<double>(m.violating) / n)
        << ',' << num(m.violation_rate) << ',' << (top ? num(*top) : std::string())
        << ',' << num(m.parameter_distance) << ',' << num(m.map_coverage) << ',' << num(m.trajectory_coverage)
        << ',' << num(static_cast<double>(report.svgd_invocations()) / n) << ','
        << num(static_cast<double>(report.arsg_invocations()) / n) << '\n';
  }
  return out.str();
}

ScatterTables export_scatter(const std::vector<EpisodeRecord>& records) {
  std::ostringstream rel;
  std::ostringstream abs;
  rel << "episode,object,ds,dd\n";
  abs << "episode,object,x,y\n";
  for (const EpisodeRecord& r : records) {
    if (!r.result.violated()) continue;
    const Chromosome& seed = r.result.seed;
    for (std::size_t i = 0; i < seed.objects.size(); ++i) {
      const Particle p = relative_state(seed.ego_pose(), seed.objects[i].pose());
      rel << r.episode << ',' << i << ',' << num(p.delta_s) << ',' << num(p.delta_d) << '\n';
      abs << r.episode << ',' << i << ',' << num(seed.objects[i].position.x()) << ','
          << num(seed.objects[i].position.y()) << '\n';
    }
  }
  return {rel.str(), abs.str()};
}

std::vector<EpisodeRecord> read_records(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open episodes: " + path.string());
  std::vector<EpisodeRecord> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    } catch (const Error& e) {
      throw ParseError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

void replay_record(const EpisodeRecord& record, const RoadNetwork& network) {
  const auto redetected = detect_violations(record.result.trace, network);
  if (redetected != record.result.violations) {
    throw IntegrityError("episode " + std::to_string(record.episode) + ": stored violations " +
                         violations_to_json(record.result.violations).dump() + " but trace yields " +
                         violations_to_json(redetected).dump());
  }
}

ReplaySummary replay_file(const fs::path& path, const RoadNetwork& network) {
  ReplaySummary s;
  for (const EpisodeRecord& r : read_records(path)) {
    replay_record(r, network);
    ++s.episodes;
    if (r.result.violated()) ++s.violating;
  }
  return s;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace

CampaignReport run_campaign_to_directory(const CampaignConfig& config, const fs::path& out) {
  config.validate();
  const RoadNetwork network = resolve_map(config.map);
  fs::create_directories(out);
  write_text(out / "config.json", config_to_json(config).dump(2) + "\n");
  write_text(out / "map.json", map_to_json(network) + "\n");

  std::ofstream episodes(out / "episodes.jsonl", std::ios::binary);
  std::ofstream timing(out / "timing.csv", std::ios::binary);
  if (!episodes || !timing) throw Error("cannot write campaign outputs in " + out.string());
  timing << "episode,repetition,index,wall_time_s\n";

  std::vector<EpisodeRecord> violating;
  auto observer = [&](const EpisodeRecord& r) {
    episodes << record_to_json(r).dump() << '\n';
    episodes.flush();
    timing << r.episode << ',' << r.repetition << ',' << r.index << ',' << num(r.result.wall_time) << '\n';
    if (r.result.violated()) {
      // Scatter export only needs the seed; drop the trace to bound memory.
      EpisodeRecord light;
      light.episode = r.episode;
      light.result.seed = r.result.seed;
      light.result.violations = r.result.violations;
      violating.push_back(std::move(light));
    }
  };

  CampaignRun run = run_campaign(config, network, observer);
  timing << "total,,," << num(run.wall_time) << '\n';
  run.model.save_file((out / "hazard.ckpt").string());
  write_text(out / "report.csv", report_csv(run.report));
  const ScatterTables scatter = export_scatter(violating);
  write_text(out / "scatter_rel.csv", scatter.relative);
  write_text(out / "scatter_abs.csv", scatter.absolute);
  return run.report;
}

}  // namespace steinseed
