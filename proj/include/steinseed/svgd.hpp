#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "steinseed/hazard.hpp"
#include "steinseed/map_model.hpp"
#include "steinseed/scenario.hpp"

namespace steinseed {

struct RefinerConfig {
  std::size_t particle_count = 5;
  std::size_t top_k = 5;
  double temperature = 1.0;
  double repulsion = 1.0;
  // Step size in box-normalized coordinates (each axis divided by its half-range).
  double step = 0.05;
  std::size_t iterations = 50;
  // Minimum planar separation; the ego lane width when unset.
  std::optional<double> r_min;
  // Diagonal of the kernel metric; diag(1/D_s^2, 1/D_d^2, 1/psi_max^2) when unset.
  std::optional<Vec3> metric;
  std::size_t guard_sweeps = 10;
  // Move refined objects onto the nearest free spawn point.
  bool snap_to_spawn = true;

  void validate() const;
};

struct KernelValue {
  double k = 1.0;
  Vec3 grad_first = Vec3::Zero();  // d k / d x
};

// exp(-|x - y|^2_metric / h).
KernelValue kernel(const Vec3& x, const Vec3& y, const Vec3& metric, double h);

// Median of pairwise squared metric distances divided by log(N + 1), floored at 1e-6.
double median_bandwidth(std::span<const Vec3> particles, const Vec3& metric);

// Component-wise clamp into [-half_extent, half_extent].
Vec3 project(const Vec3& x, const Vec3& half_extent);
Vec3 omega_extent(const Omega& omega);

struct SvgdStepParams {
  double temperature = 1.0;
  double repulsion = 1.0;
  double step = 0.05;
  Vec3 metric = Vec3::Ones();
  Vec3 half_extent = Vec3::Constant(1.0);
};

// One synchronous update x_i <- project(x_i + step * phi(x_i)), with phi built
// from kernel-weighted scores and kernel repulsion.
std::vector<Vec3> svgd_step(std::span<const Vec3> particles, std::span<const Vec3> scores,
                            const SvgdStepParams& params, double h);

struct GuardResult {
  std::vector<Vec3> particles;
  std::size_t sweeps = 0;
  std::size_t residual_violations = 0;
};

// Pushes every pair closer than r_min in (ds, dd) apart along the line of
// centers until it sits exactly r_min apart, re-clipping to the box. Coincident
// pairs split along a random direction.
GuardResult separation_guard(std::span<const Vec3> particles, double r_min, const Vec3& half_extent, Rng& rng,
                             std::size_t max_sweeps = 10);

double min_planar_separation(std::span<const Vec3> particles);

struct RefineIteration {
  std::size_t iteration = 0;
  double mean_hazard = 0.0;
  double min_separation = 0.0;
  double bandwidth = 0.0;
};

struct RefineDiagnostics {
  std::vector<std::size_t> selected;
  std::vector<RefineIteration> iterations;
  std::vector<Vec3> final_particles;
  double r_min = 0.0;
  std::size_t residual_violations = 0;
};

struct RefineResult {
  Chromosome seed;
  RefineDiagnostics diagnostics;
};

// Scores every object at t = 0, runs SVGD on the top-K as particles and maps
// them back into the seed.
RefineResult refine(const Chromosome& seed, const HazardModel& model, const RoadNetwork& network,
                    const RefinerConfig& config, Rng& rng);

}  // namespace steinseed
