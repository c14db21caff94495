// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "steinseed/campaign.hpp"

namespace steinseed {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b, c, d);
  return buf;
}

std::vector<Vec3> uniform_particles(std::mt19937_64& rng, std::size_t n, double spread) {
  std::uniform_real_distribution<double> u(-spread, spread);
  std::vector<Vec3> out;
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(u(rng), u(rng), u(rng));
  return out;
}

// ---------------------------------------------------------------------------

Outcome svgd_correctness() {
  Stopwatch clock;
  std::mt19937_64 rng(101);
  bool bitwise = true;
  for (int i = 0; i < 1000; ++i) {
    const auto x = uniform_particles(rng, 1, 0.95);
    const auto g = uniform_particles(rng, 1, 5.0);
    SvgdStepParams p;
    p.temperature = 1.0 + 0.001 * i;
    p.step = 0.05;
    const Vec3 ascent = project(x[0] + p.step * (p.temperature * g[0]), p.half_extent);
    bitwise = bitwise && svgd_step(x, g, p, 0.5)[0] == ascent;
  }

  double ref_err = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = uniform_particles(rng, 3, 1.0);
    const auto g = uniform_particles(rng, 3, 3.0);
    const double metric[3] = {0.8, 1.7, 0.3};
    const double half[3] = {1.0, 0.9, 1.1};
    const double tau = 1.2;
    const double beta = 0.7;
    const double eps = 0.06;
    const double h = 0.6;
    SvgdStepParams p;
    p.temperature = tau;
    p.repulsion = beta;
    p.step = eps;
    p.metric = Vec3(metric[0], metric[1], metric[2]);
    p.half_extent = Vec3(half[0], half[1], half[2]);
    const auto got = svgd_step(x, g, p, h);
    for (std::size_t i = 0; i < 3; ++i) {
      double phi[3] = {0, 0, 0};
      for (std::size_t j = 0; j < 3; ++j) {
        double q = 0.0;
        for (int d = 0; d < 3; ++d) q += metric[d] * (x[j][d] - x[i][d]) * (x[j][d] - x[i][d]);
        const double k = std::exp(-q / h);
        for (int d = 0; d < 3; ++d) phi[d] += k * tau * g[j][d] + beta * (-2.0 / h) * metric[d] * (x[j][d] - x[i][d]) * k;
      }
      for (int d = 0; d < 3; ++d) {
        const double want = std::min(std::max(x[i][d] + eps * phi[d] / 3.0, -half[d]), half[d]);
        ref_err = std::max(ref_err, std::abs(got[i][d] - want));
      }
    }
  }

  double kernel_err = 0.0;
  std::uniform_real_distribution<double> w(0.2, 3.0);
  for (int i = 0; i < 100; ++i) {
    const auto p = uniform_particles(rng, 2, 1.5);
    const Vec3 metric(w(rng), w(rng), w(rng));
    const double h = w(rng);
    const Vec3 g = kernel(p[0], p[1], metric, h).grad_first;
    Vec3 fd;
    for (int k = 0; k < 3; ++k) {
      const double s = 1e-6;
      Vec3 up = p[0];
      Vec3 down = p[0];
      up[k] += s;
      down[k] -= s;
      fd[k] = (kernel(up, p[1], metric, h).k - kernel(down, p[1], metric, h).k) / (2 * s);
    }
    if (fd.norm() > 1e-6) kernel_err = std::max(kernel_err, (g - fd).norm() / fd.norm());
  }
  const double t = clock.seconds();
  Outcome o;
  o.pass = bitwise && ref_err <= 1e-12 && kernel_err < 1e-6 && t < 1.0;
  o.detail = std::string("single-particle bitwise ") + (bitwise ? "yes" : "no") +
             fmt(", reference max err %.2e, kernel FD rel err %.2e, %.3f s", ref_err, kernel_err, t);
  return o;
}

Outcome svgd_mode_coverage() {
  Stopwatch clock;
  int good_runs = 0;
  std::string fractions;
  for (int run = 0; run < 5; ++run) {
    std::mt19937_64 rng(200 + run);
    std::normal_distribution<double> init(0.0, 0.5);
    std::vector<Vec3> x;
    for (int i = 0; i < 50; ++i) x.emplace_back(init(rng), init(rng), init(rng));
    SvgdStepParams p;
    p.step = 0.05;
    p.half_extent = Vec3::Constant(10.0);
    std::vector<Vec3> g(x.size());
    for (int it = 0; it < 500; ++it) {
      for (std::size_t i = 0; i < x.size(); ++i) {
        // Score of an equal mixture of unit Gaussians centered at (+-3, 0, 0).
        const double a = x[i].x() + 3.0;
        const double b = x[i].x() - 3.0;
        const double la = -0.5 * a * a;
        const double lb = -0.5 * b * b;
        const double m = std::max(la, lb);
        const double wa = std::exp(la - m);
        const double wb = std::exp(lb - m);
        g[i] = Vec3((-a * wa - b * wb) / (wa + wb), -x[i].y(), -x[i].z());
      }
      x = svgd_step(x, g, p, median_bandwidth(x, p.metric));
    }
    int near_a = 0;
    int near_b = 0;
    for (const Vec3& q : x) {
      near_a += (q - Vec3(-3, 0, 0)).norm() <= 3.0;
      near_b += (q - Vec3(3, 0, 0)).norm() <= 3.0;
    }
    if (near_a >= 10 && near_b >= 10) ++good_runs;
    fractions += (run ? " " : "") + std::to_string(near_a) + "/" + std::to_string(near_b);
  }
  const double t = clock.seconds();
  Outcome o;
  o.pass = good_runs >= 4 && t < 10.0;
  o.detail = std::to_string(good_runs) + "/5 runs cover both modes (per-mode counts " + fractions + ")" +
             fmt(", %.2f s", t);
  return o;
}

FeatureVector random_z(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  FeatureVector z;
  for (int i = 0; i < 5; ++i) z[i] = u(rng);
  return z;
}

Outcome hazard_gradients() {
  Stopwatch clock;
  std::mt19937_64 rng(301);
  Rng init(302);
  HazardModel model = HazardModel::initialized(init);

  double theta_err = 0.0;
  const Eigen::VectorXd theta = model.parameters();
  for (int point = 0; point < 100; ++point) {
    const FeatureVector z = random_z(rng);
    const Eigen::VectorXd g = model.output_parameter_gradient(z);
    Eigen::VectorXd fd(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      const double h = 1e-6;
      Eigen::VectorXd t = theta;
      t[i] += h;
      model.set_parameters(t);
      const double up = model.forward(z);
      t[i] -= 2 * h;
      model.set_parameters(t);
      const double down = model.forward(z);
      fd[i] = (up - down) / (2 * h);
    }
    model.set_parameters(theta);
    theta_err = std::max(theta_err, (g - fd).norm() / std::max(fd.norm(), 1e-12));
  }

  const RoadNetwork net = builtin_map("grid4");
  const SpawnPoint& s = net.spawn_points()[11];
  const FeatureContext ctx = make_feature_context({s.position, s.heading}, net);
  std::uniform_real_distribution<double> ds(-0.95 * ctx.omega.d_s, 0.95 * ctx.omega.d_s);
  std::uniform_real_distribution<double> dd(-0.95 * ctx.omega.d_d, 0.95 * ctx.omega.d_d);
  std::uniform_real_distribution<double> dpsi(-3.1, 3.1);
  double x_err = 0.0;
  int points = 0;
  while (points < 100) {
    const Particle x{ds(rng), dd(rng), dpsi(rng)};
    // The lane-overlap ramp has kinks at 0 and 1; stay clear of them.
    const double overlap = particle_features(x, ctx)[4];
    if ((overlap > 0.0 && overlap < 1e-3) || (overlap > 1.0 - 1e-3 && overlap < 1.0)) continue;
    const Vec3 g = grad_x(model, x, ctx);
    Vec3 fd;
    for (int k = 0; k < 3; ++k) {
      const double h = 1e-6;
      Vec3 up = x.vec();
      Vec3 down = x.vec();
      up[k] += h;
      down[k] -= h;
      fd[k] = (hazard_of(model, Particle::from_vec(up), ctx) - hazard_of(model, Particle::from_vec(down), ctx)) /
              (2 * h);
    }
    x_err = std::max(x_err, (g - fd).norm() / std::max(fd.norm(), 1e-12));
    ++points;
  }
  const double t = clock.seconds();
  Outcome o;
  o.pass = theta_err < 1e-4 && x_err < 1e-4 && t < 5.0;
  o.detail = fmt("d/dtheta max rel err %.2e, d/dx max rel err %.2e, %.2f s", theta_err, x_err, t);
  return o;
}

EpisodeTrace constant_trace(std::size_t frames, const AgentFrame& ego, const AgentFrame& object) {
  EpisodeTrace t;
  t.kinds = {ObjectKind::kVehicle};
  for (std::size_t i = 0; i < frames; ++i) t.frames.push_back({ego, {object}});
  return t;
}

Outcome label_semantics() {
  const EpisodeTrace far = constant_trace(300, {{0, 0}, 0.0, 0.0}, {{0, 100}, 0.0, 0.0});
  const double collided = near_miss_label(far, 0, 2, true);
  const double far_label = near_miss_label(far, 0, 2, false);

  std::mt19937_64 rng(401);
  std::uniform_real_distribution<double> pos(-30.0, 30.0);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  std::uniform_real_distribution<double> speed(0.0, 20.0);
  std::uniform_int_distribution<int> len(1, 40);
  double lo = 1.0;
  double hi = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    EpisodeTrace t;
    t.kinds = {ObjectKind::kVehicle};
    const int n = len(rng);
    for (int i = 0; i < n; ++i) {
      t.frames.push_back({{{pos(rng), pos(rng)}, ang(rng), speed(rng)}, {{{pos(rng), pos(rng)}, ang(rng), speed(rng)}}});
    }
    const double y = near_miss_label(t, 0, trial % 4, trial % 7 == 0);
    lo = std::min(lo, y);
    hi = std::max(hi, y);
  }

  // Five frames at constant distance, relative heading and closing speed.
  // Ties put the closest frame at 0, so the window covers frames 0..2.
  const AgentFrame ego{{0, 0}, 0.0, 4.0};
  const AgentFrame obj{{3, 0}, kPi / 3, 4.0};
  const EpisodeTrace five = constant_trace(5, ego, obj);
  const double v_close = -(obj.velocity() - ego.velocity()).x();
  auto bound = [](double s) { return std::min(std::max(s, 1e-6), 1.0 - 1e-6); };
  const double s_dist = bound(std::exp(-3.0));
  const double s_head = bound((1.0 - std::cos(kPi / 3)) / 2.0);
  const double s_close = bound(std::min(std::max(v_close / 4.0, 0.0), 1.0));
  const double survive = std::pow((1.0 - s_dist) * (1.0 - s_head) * (1.0 - s_close), 3);
  const double oracle_err = std::abs(near_miss_label(five, 0, 2, false) - (1.0 - survive));

  Outcome o;
  o.pass = collided == 1.0 && far_label < 0.05 && lo >= 0.0 && hi <= 1.0 && oracle_err <= 1e-12;
  o.detail = fmt("collided y=%.3f, far-field y=%.2e, fuzz range [%.3f, %.3f]", collided, far_label, lo, hi) +
             fmt(", 5-frame oracle err %.1e", oracle_err);
  return o;
}

Outcome arsg_exactness() {
  const RoadNetwork net = builtin_map("grid4");
  Rng rng(501);
  std::uniform_int_distribution<std::size_t> executed(1, 20);
  std::uniform_int_distribution<std::size_t> cand(1, 10);
  int agree = 0;
  for (int instance = 0; instance < 50; ++instance) {
    SeedPool pool;
    for (const Chromosome& c : generate_candidates(net, 8, executed(rng), rng)) record_executed(pool, c, net);
    const auto candidates = generate_candidates(net, 8, cand(rng), rng);
    std::size_t best = 0;
    double best_score = -1.0;
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      const SeedVector cj = encode(candidates[j], net);
      double nearest = std::numeric_limits<double>::infinity();
      for (const SeedVector& t : pool.executed()) {
        double sq = 0.0;
        for (Eigen::Index d = 0; d < cj.size(); ++d) sq += (cj[d] - t[d]) * (cj[d] - t[d]);
        nearest = std::min(nearest, std::sqrt(sq));
      }
      if (nearest > best_score) {
        best_score = nearest;
        best = j;
      }
    }
    const auto [seed, index] = select_next(candidates, pool, net, rng);
    if (index == best && seed == candidates[best]) ++agree;
  }
  Outcome o;
  o.pass = agree == 50;
  o.detail = std::to_string(agree) + "/50 instances match the exhaustive argmax-min";
  return o;
}

std::optional<std::size_t> scan_match(const Vec2& p, const std::vector<Vec2>& pts, double threshold) {
  std::optional<std::size_t> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = (p - pts[i]).norm();
    if (d <= threshold && d < best_d) {
      best = i;
      best_d = d;
    }
  }
  return best;
}

Outcome metric_oracles() {
  const RoadNetwork net = builtin_map("grid4");
  std::vector<Vec2> spawns;
  for (const SpawnPoint& s : net.spawn_points()) spawns.push_back(s.position);
  const std::vector<Vec2>& waypoints = net.waypoints();
  std::mt19937_64 gen(601);
  Rng rng(602);
  std::bernoulli_distribution coin(0.45);
  std::normal_distribution<double> jitter(0.0, 0.03);
  std::uniform_int_distribution<std::size_t> frames(1, 5);
  int mismatches = 0;
  for (int campaign = 0; campaign < 20; ++campaign) {
    std::vector<EpisodeResult> results;
    for (int e = 0; e < 30; ++e) {
      EpisodeResult r;
      if (coin(gen)) r.violations.push_back({ViolationKind::kCollision, 0, 0});
      r.seed = random_chromosome(net, 5, rng);
      r.trace.kinds.assign(5, ObjectKind::kVehicle);
      const std::size_t n = frames(gen);
      for (std::size_t t = 0; t < n; ++t) {
        Frame f;
        f.ego = {r.seed.route.ego_position, 0.0, 0.0};
        for (const ObjectInit& obj : r.seed.objects) {
          Vec2 p = obj.position;
          if (t > 0) p = waypoints[gen() % waypoints.size()] + Vec2(jitter(gen), jitter(gen));
          f.objects.push_back({p, 0.0, 0.0});
        }
        r.trace.frames.push_back(f);
      }
      results.push_back(r);
    }

    std::size_t violating = 0;
    std::optional<std::size_t> tenth;
    std::vector<SeedVector> bad;
    std::set<std::size_t> spawn_hits;
    std::set<std::size_t> waypoint_hits;
    for (std::size_t i = 0; i < results.size(); ++i) {
      const EpisodeResult& r = results[i];
      for (const Frame& f : r.trace.frames) {
        for (const AgentFrame& obj : f.objects) {
          if (const auto w = scan_match(obj.position, waypoints, 0.05)) waypoint_hits.insert(*w);
        }
      }
      if (r.violations.empty()) continue;
      if (++violating == 10) tenth = i + 1;
      bad.push_back(encode(r.seed, net));
      const Frame& f0 = r.trace.frames.front();
      for (const AgentFrame& obj : f0.objects) {
        if ((obj.position - f0.ego.position).norm() > 50.0) continue;
        if (const auto s = scan_match(obj.position, spawns, 0.05)) spawn_hits.insert(*s);
      }
    }
    double rho = 0.0;
    for (const SeedVector& a : bad) {
      double inner = 0.0;
      for (const SeedVector& b : bad) {
        double sq = 0.0;
        for (Eigen::Index d = 0; d < a.size(); ++d) sq += (a[d] - b[d]) * (a[d] - b[d]);
        inner += std::sqrt(sq / static_cast<double>(a.size()));
      }
      rho += inner / static_cast<double>(bad.size());
    }
    if (!bad.empty()) rho /= static_cast<double>(bad.size());

    const double rate = static_cast<double>(violating) / static_cast<double>(results.size());
    mismatches += violation_rate(results) != rate;
    mismatches += top_k_rounds(results) != tenth;
    mismatches += std::abs(parameter_distance(bad) - rho) > 1e-12;
    mismatches += map_coverage(results, net) != static_cast<double>(spawn_hits.size()) / spawns.size();
    mismatches += trajectory_coverage(results, net) != static_cast<double>(waypoint_hits.size()) / waypoints.size();
  }

  const SeedVector zeros = SeedVector::Zero(83);
  const SeedVector ones = SeedVector::Ones(83);
  const std::vector<SeedVector> extremes = {zeros, ones};
  const double rho_extremes = parameter_distance(extremes);
  double max_pair = 0.0;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    SeedVector a(83);
    SeedVector b(83);
    for (int d = 0; d < 83; ++d) {
      a[d] = u(gen) < 0.5 ? 0.0 : u(gen);
      b[d] = u(gen) < 0.5 ? 1.0 : u(gen);
    }
    max_pair = std::max(max_pair, normalized_distance(a, b));
  }
  const double corner = normalized_distance(zeros, ones);

  Outcome o;
  o.pass = mismatches == 0 && rho_extremes == 0.5 && corner == 1.0 && max_pair <= 1.0;
  o.detail = std::to_string(mismatches) + " oracle mismatches over 20 campaigns" +
             fmt(", rho(extremes)=%.3f, d(0,1)=%.3f, max random d=%.3f", rho_extremes, corner, max_pair);
  return o;
}

Outcome kinematics() {
  double worst_radius = 0.0;
  for (double steer : {0.1, 0.3, 0.45}) {
    const double dt = 0.01;
    const double radius = kVehicleWheelbase / std::tan(steer);
    AgentState s{{0, 0}, 0.0, 6.0, ObjectKind::kVehicle};
    const Vec2 center(0.0, radius);
    const int steps = static_cast<int>(std::ceil(2.0 * kPi * radius / s.speed / dt));
    for (int i = 0; i < steps; ++i) {
      s = step_bicycle(s, {0.0, steer}, dt, kVehicleWheelbase);
      worst_radius = std::max(worst_radius, std::abs((s.position - center).norm() - radius) / radius);
    }
  }

  std::mt19937_64 rng(701);
  std::uniform_real_distribution<double> pos(-50, 50);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  std::uniform_real_distribution<double> speed(0.5, 25.0);
  std::uniform_real_distribution<double> accel(-2.5, 2.5);
  std::uniform_real_distribution<double> steer(-0.45, 0.45);
  std::uniform_real_distribution<double> walk(-0.1, 0.1);
  const ObjectKind kinds[] = {ObjectKind::kVehicle, ObjectKind::kBicycle, ObjectKind::kPedestrian};
  double worst_jac = 0.0;
  for (int i = 0; i < 600; ++i) {
    const ObjectKind kind = kinds[i % 3];
    const AgentState s{{pos(rng), pos(rng)}, ang(rng), speed(rng), kind};
    const Control u = kind == ObjectKind::kPedestrian ? Control(walk(rng), walk(rng)) : Control(accel(rng), steer(rng));
    const StepJacobian j = step_jacobian(s, u, 0.1);
    for (int c = 0; c < 2; ++c) {
      const double h = 1e-7;
      Control up = u;
      Control down = u;
      up[c] += h;
      down[c] -= h;
      const AgentState a = step_agent(s, up, 0.1);
      const AgentState b = step_agent(s, down, 0.1);
      const Vec3 fd((a.position.x() - b.position.x()) / (2 * h), (a.position.y() - b.position.y()) / (2 * h),
                    wrap_angle(a.heading - b.heading) / (2 * h));
      const Vec3 analytic = j.col(c);
      if (fd.norm() > 1e-9) worst_jac = std::max(worst_jac, (analytic - fd).norm() / fd.norm());
    }
  }
  Outcome o;
  o.pass = worst_radius < 0.01 && worst_jac < 1e-5;
  o.detail = fmt("worst radius deviation %.3f%%, worst control-gradient rel err %.2e", 100.0 * worst_radius, worst_jac);
  return o;
}

Outcome guard_postconditions() {
  const RoadNetwork net = builtin_map("grid4");
  const Vec3 box = omega_extent(net.omega());
  CampaignConfig config;
  config.mode = Mode::kPtop;
  config.episodes = 50;
  config.repetitions = 1;
  config.seed = 801;
  std::size_t scanned = 0;
  std::size_t outside = 0;
  std::size_t too_close = 0;
  double closest_margin = std::numeric_limits<double>::infinity();
  run_campaign(config, net, [&](const EpisodeRecord& r) {
    if (!r.refine) return;
    ++scanned;
    const auto& ps = r.refine->final_particles;
    for (const Vec3& p : ps) outside += project(p, box) != p;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      for (std::size_t j = i + 1; j < ps.size(); ++j) {
        const double d = std::hypot(ps[i].x() - ps[j].x(), ps[i].y() - ps[j].y());
        closest_margin = std::min(closest_margin, d - r.refine->r_min);
        too_close += d < r.refine->r_min - 1e-9;
      }
    }
  });
  Outcome o;
  o.pass = scanned == 50 && outside == 0 && too_close == 0;
  o.detail = std::to_string(scanned) + " refinements, " + std::to_string(outside) + " particles outside the box, " +
             std::to_string(too_close) + " pairs under r_min" + fmt(" (tightest margin %.2e m)", closest_margin);
  return o;
}

CampaignMetrics directional_run(Mode mode) {
  CampaignConfig config;
  config.map = "grid4";
  config.mode = mode;
  config.episodes = 200;
  config.repetitions = 4;
  config.seed = 7;
  config.episode.tester = TesterKind::kGradient;
  return run_campaign(config, builtin_map("grid4")).report.mean();
}

Outcome directional_reproduction() {
  Stopwatch clock;
  const CampaignMetrics ptop = directional_run(Mode::kPtop);
  const CampaignMetrics random = directional_run(Mode::kRandom);
  const CampaignMetrics no_arsg = directional_run(Mode::kNoArsg);
  const double rho_ratio = ptop.parameter_distance / random.parameter_distance;
  const double cov_ratio = ptop.map_coverage / random.map_coverage;
  const bool a = rho_ratio >= 1.03;
  const bool b = cov_ratio >= 1.05;
  const double lo = std::min(random.parameter_distance, ptop.parameter_distance);
  const double hi = std::max(random.parameter_distance, ptop.parameter_distance);
  const bool c = (no_arsg.parameter_distance >= lo && no_arsg.parameter_distance <= hi) ||
                 no_arsg.parameter_distance < ptop.parameter_distance;
  Outcome o;
  o.pass = a && b && c;
  o.detail = fmt("rho ptop/random/no_arsg %.4f/%.4f/%.4f (ratio %.3f)", ptop.parameter_distance,
                 random.parameter_distance, no_arsg.parameter_distance, rho_ratio) +
             fmt(", map coverage ptop/random/no_arsg %.4f/%.4f/%.4f (ratio %.3f)", ptop.map_coverage,
                 random.map_coverage, no_arsg.map_coverage, cov_ratio) +
             std::string(", (a) ") + (a ? "ok" : "fail") + " (b) " + (b ? "ok" : "fail") + " (c) " +
             (c ? "ok" : "fail") + fmt(", %.0f s", clock.seconds());
  return o;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  CampaignConfig config;
  config.mode = Mode::kPtop;
  config.episodes = 25;
  config.repetitions = 2;
  config.seed = 1001;
  const fs::path root = fs::temp_directory_path() / "steinseed_acceptance_determinism";
  fs::remove_all(root);
  run_campaign_to_directory(config, root / "a");
  run_campaign_to_directory(config, root / "b");
  const bool episodes = slurp(root / "a" / "episodes.jsonl") == slurp(root / "b" / "episodes.jsonl");
  const bool report = slurp(root / "a" / "report.csv") == slurp(root / "b" / "report.csv");
  const auto bytes = fs::file_size(root / "a" / "episodes.jsonl");
  fs::remove_all(root);
  Outcome o;
  o.pass = episodes && report && bytes > 0;
  o.detail = std::string("episodes.jsonl ") + (episodes ? "identical" : "differs") + " (" + std::to_string(bytes) +
             " bytes), report.csv " + (report ? "identical" : "differs");
  return o;
}

}  // namespace
}  // namespace steinseed

int main() {
  using namespace steinseed;
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"svgd correctness", svgd_correctness},
      {"svgd mode coverage", svgd_mode_coverage},
      {"hazard gradients", hazard_gradients},
      {"label semantics", label_semantics},
      {"arsg exactness", arsg_exactness},
      {"metric oracles", metric_oracles},
      {"kinematics", kinematics},
      {"guard and projection post-conditions", guard_postconditions},
      {"directional reproduction", directional_reproduction},
      {"determinism", determinism},
  };
  int failed = 0;
  int number = 0;
  for (const Criterion& c : criteria) {
    ++number;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", number, c.name, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d/%d criteria passed\n", number - failed, number);
  return failed == 0 ? 0 : 1;
}
