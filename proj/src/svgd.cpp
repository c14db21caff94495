#include "steinseed/svgd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace steinseed {

void RefinerConfig::validate() const {
  if (particle_count != top_k) throw Error("refiner: particle_count must equal top_k");
  if (!(temperature > 0.0)) throw Error("refiner: temperature must be positive");
  if (!(repulsion > 0.0 && repulsion <= 1.0)) throw Error("refiner: repulsion must lie in (0, 1]");
  if (!(step > 0.0)) throw Error("refiner: step must be positive");
  if (r_min && !(*r_min > 0.0)) throw Error("refiner: r_min must be positive");
  if (metric && !(metric->array() > 0.0).all()) throw Error("refiner: metric weights must be positive");
}

KernelValue kernel(const Vec3& x, const Vec3& y, const Vec3& metric, double h) {
  const Vec3 diff = x - y;
  KernelValue out;
  out.k = std::exp(-diff.dot(metric.cwiseProduct(diff)) / h);
  out.grad_first = -(2.0 / h) * metric.cwiseProduct(diff) * out.k;
  return out;
}

double median_bandwidth(std::span<const Vec3> particles, const Vec3& metric) {
  const std::size_t n = particles.size();
  if (n < 2) return 1.0;
  std::vector<double> d2;
  d2.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const Vec3 diff = particles[i] - particles[j];
      d2.push_back(diff.dot(metric.cwiseProduct(diff)));
    }
  }
  std::sort(d2.begin(), d2.end());
  const std::size_t m = d2.size();
  const double median = m % 2 == 1 ? d2[m / 2] : 0.5 * (d2[m / 2 - 1] + d2[m / 2]);
  return std::max(median / std::log(static_cast<double>(n) + 1.0), 1e-6);
}

Vec3 project(const Vec3& x, const Vec3& half_extent) { return x.cwiseMax(-half_extent).cwiseMin(half_extent); }

Vec3 omega_extent(const Omega& omega) { return {omega.d_s, omega.d_d, omega.psi_max}; }

std::vector<Vec3> svgd_step(std::span<const Vec3> particles, std::span<const Vec3> scores,
                            const SvgdStepParams& params, double h) {
  if (particles.size() != scores.size()) throw Error("svgd_step: particle and score counts differ");
  const std::size_t n = particles.size();
  std::vector<Vec3> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 phi = Vec3::Zero();
    for (std::size_t j = 0; j < n; ++j) {
      const KernelValue kv = kernel(particles[j], particles[i], params.metric, h);
      phi += kv.k * (params.temperature * scores[j]) + params.repulsion * kv.grad_first;
    }
    phi /= static_cast<double>(n);
    out[i] = project(particles[i] + params.step * phi, params.half_extent);
  }
  return out;
}

namespace {

double planar_distance(const Vec3& a, const Vec3& b) { return std::hypot(a.x() - b.x(), a.y() - b.y()); }

bool too_close(double d, double r_min) { return d < r_min * (1.0 - 1e-12); }

}  // namespace

double min_planar_separation(std::span<const Vec3> particles) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < particles.size(); ++i) {
    for (std::size_t j = i + 1; j < particles.size(); ++j) {
      best = std::min(best, planar_distance(particles[i], particles[j]));
    }
  }
  return best;
}

GuardResult separation_guard(std::span<const Vec3> particles, double r_min, const Vec3& half_extent, Rng& rng,
                             std::size_t max_sweeps) {
  if (!(r_min > 0.0)) throw Error("separation_guard: r_min must be positive");
  GuardResult out;
  out.particles.assign(particles.begin(), particles.end());
  auto& p = out.particles;
  std::uniform_real_distribution<double> angle(-kPi, kPi);

  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    bool moved = false;
    for (std::size_t i = 0; i < p.size(); ++i) {
      for (std::size_t j = i + 1; j < p.size(); ++j) {
        const double d = planar_distance(p[i], p[j]);
        if (!too_close(d, r_min)) continue;
        moved = true;
        Vec3 dir = Vec3::Zero();
        if (d > 0.0) {
          dir.head<2>() = (p[j] - p[i]).head<2>() / d;
        } else {
          const double a = angle(rng);
          dir.head<2>() = Vec2(std::cos(a), std::sin(a));
        }
        const double push = 0.5 * (r_min - d);
        p[i] = project(p[i] - push * dir, half_extent);
        p[j] = project(p[j] + push * dir, half_extent);
        // A side pinned by the box leaves the remaining gap to its partner.
        const double gap = r_min - (p[j] - p[i]).head<2>().dot(dir.head<2>());
        if (gap > 0.0) {
          const Vec3 pj = project(p[j] + gap * dir, half_extent);
          if ((pj - p[j]).norm() > 0.0) {
            p[j] = pj;
          } else {
            p[i] = project(p[i] - gap * dir, half_extent);
          }
        }
      }
    }
    out.sweeps = sweep + 1;
    if (!moved) break;
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      if (too_close(planar_distance(p[i], p[j]), r_min)) ++out.residual_violations;
    }
  }
  return out;
}

namespace {

double mean_hazard(const HazardModel& model, std::span<const Vec3> xs, const FeatureContext& ctx) {
  if (xs.empty()) return 0.0;
  double total = 0.0;
  for (const Vec3& x : xs) total += hazard_of(model, Particle::from_vec(x), ctx);
  return total / static_cast<double>(xs.size());
}

void snap_to_free_spawns(Chromosome& seed, const std::vector<std::size_t>& refined, const RoadNetwork& network) {
  const auto& spawns = network.spawn_points();
  std::vector<bool> is_refined(seed.objects.size(), false);
  for (std::size_t idx : refined) is_refined[idx] = true;
  std::vector<Vec2> occupied;
  for (std::size_t i = 0; i < seed.objects.size(); ++i) {
    if (!is_refined[i]) occupied.push_back(seed.objects[i].position);
  }
  for (std::size_t idx : refined) {
    const Vec2 target = seed.objects[idx].position;
    std::optional<std::size_t> best;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < spawns.size(); ++s) {
      const Vec2& sp = spawns[s].position;
      if ((sp - seed.route.ego_position).norm() < kVehicleLength) continue;
      const bool taken = std::any_of(occupied.begin(), occupied.end(),
                                     [&](const Vec2& o) { return (o - sp).norm() < 1e-6; });
      if (taken) continue;
      const double d = (sp - target).norm();
      if (d < best_d) {
        best_d = d;
        best = s;
      }
    }
    if (best) seed.objects[idx].position = spawns[*best].position;
    occupied.push_back(seed.objects[idx].position);
  }
}

}  // namespace

RefineResult refine(const Chromosome& seed, const HazardModel& model, const RoadNetwork& network,
                    const RefinerConfig& config, Rng& rng) {
  config.validate();
  RefineResult result{seed, {}};
  RefineDiagnostics& diag = result.diagnostics;

  const Pose ego = seed.ego_pose();
  const FeatureContext ctx = make_feature_context(ego, network);
  const Vec3 extent = omega_extent(network.omega());
  const Vec3 metric = config.metric.value_or(extent.cwiseProduct(extent).cwiseInverse());
  diag.r_min = config.r_min.value_or(ctx.ego_lane->width);

  std::vector<double> scores(seed.objects.size());
  for (std::size_t i = 0; i < seed.objects.size(); ++i) {
    scores[i] = hazard_of(model, relative_state(ego, seed.objects[i].pose()), ctx);
  }
  std::vector<std::size_t> order(seed.objects.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  order.resize(std::min(config.top_k, order.size()));
  diag.selected = order;
  if (order.empty() || config.iterations == 0) return result;

  std::vector<Vec3> xs;
  for (std::size_t idx : order) {
    xs.push_back(project(relative_state(ego, seed.objects[idx].pose()).vec(), extent));
  }
  diag.iterations.push_back({0, mean_hazard(model, xs, ctx), min_planar_separation(xs), 0.0});

  // SVGD runs in box-normalized coordinates u = x / extent, where the kernel
  // metric becomes metric * extent^2 and the box becomes the unit cube.
  SvgdStepParams params;
  params.temperature = config.temperature;
  params.repulsion = config.repulsion;
  params.step = config.step;
  params.metric = metric.cwiseProduct(extent).cwiseProduct(extent);
  params.half_extent = Vec3::Ones();

  std::vector<Vec3> us(xs.size());
  std::vector<Vec3> gs(xs.size());
  for (std::size_t it = 1; it <= config.iterations; ++it) {
    for (std::size_t j = 0; j < xs.size(); ++j) {
      us[j] = xs[j].cwiseQuotient(extent);
      gs[j] = grad_x(model, Particle::from_vec(xs[j]), ctx).cwiseProduct(extent);
    }
    const double h = median_bandwidth(us, params.metric);
    us = svgd_step(us, gs, params, h);
    for (std::size_t j = 0; j < xs.size(); ++j) xs[j] = us[j].cwiseProduct(extent);
    GuardResult guarded = separation_guard(xs, diag.r_min, extent, rng, config.guard_sweeps);
    xs = std::move(guarded.particles);
    diag.residual_violations = guarded.residual_violations;
    diag.iterations.push_back({it, mean_hazard(model, xs, ctx), min_planar_separation(xs), h});
  }
  diag.final_particles = xs;

  std::vector<std::pair<std::size_t, Particle>> assignments;
  for (std::size_t j = 0; j < order.size(); ++j) assignments.emplace_back(order[j], Particle::from_vec(xs[j]));
  result.seed = apply_particles(seed, assignments, network);
  if (config.snap_to_spawn) snap_to_free_spawns(result.seed, order, network);
  return result;
}

}  // namespace steinseed
