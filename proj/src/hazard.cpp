#include "steinseed/hazard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace steinseed {

FeatureContext make_feature_context(const Pose& ego, const RoadNetwork& network) {
  return {ego, &network.lanes()[network.lane_for(ego)], network.omega()};
}

namespace {

double clip_unit(double v) { return std::clamp(v, -1.0, 1.0); }

// Derivative of clip_unit; zero on and beyond the bound.
double clip_unit_slope(double v) { return std::abs(v) < 1.0 ? 1.0 : 0.0; }

}  // namespace

FeatureVector particle_features(const Particle& x, const FeatureContext& ctx) {
  FeatureVector z;
  z[0] = clip_unit(x.delta_s / ctx.omega.d_s);
  z[1] = clip_unit(x.delta_d / ctx.omega.d_d);
  z[2] = std::cos(x.delta_psi);
  z[3] = std::sin(x.delta_psi);
  z[4] = lane_overlap(absolute_pose(ctx.ego, x).position, *ctx.ego_lane);
  return z;
}

FeatureVector features(const Pose& ego, const Pose& object, const Lane& ego_lane, const Omega& omega) {
  return particle_features(relative_state(ego, object), {ego, &ego_lane, omega});
}

FeatureJacobian particle_feature_jacobian(const Particle& x, const FeatureContext& ctx) {
  FeatureJacobian j = FeatureJacobian::Zero();
  j(0, 0) = clip_unit_slope(x.delta_s / ctx.omega.d_s) / ctx.omega.d_s;
  j(1, 1) = clip_unit_slope(x.delta_d / ctx.omega.d_d) / ctx.omega.d_d;
  j(2, 2) = -std::sin(x.delta_psi);
  j(3, 2) = std::cos(x.delta_psi);
  const auto overlap = lane_overlap_with_gradient(absolute_pose(ctx.ego, x).position, *ctx.ego_lane);
  // d position / d (ds, dd) is the ego rotation.
  const double c = std::cos(ctx.ego.heading);
  const double s = std::sin(ctx.ego.heading);
  j(4, 0) = overlap.gradient.x() * c + overlap.gradient.y() * s;
  j(4, 1) = -overlap.gradient.x() * s + overlap.gradient.y() * c;
  return j;
}

double closing_speed(const AgentFrame& ego, const AgentFrame& object) {
  const Vec2 r = object.position - ego.position;
  const double range = r.norm();
  if (range == 0.0) return 0.0;
  return -(r / range).dot(object.velocity() - ego.velocity());
}

NearMissDetail near_miss_detail(const EpisodeTrace& trace, std::size_t index, std::size_t half_window,
                                bool collided) {
  if (trace.frames.empty()) throw Error("near_miss_label: empty trace");
  if (index >= trace.object_count()) throw Error("near_miss_label: object index out of range");
  NearMissDetail out;

  const std::size_t n = trace.frames.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < n; ++t) {
    const Frame& f = trace.frames[t];
    const double d = (f.ego.position - f.objects[index].position).norm();
    if (d < best) {
      best = d;
      out.closest_frame = t;
    }
    out.max_speed = std::max(out.max_speed, f.ego.speed);
    for (const AgentFrame& o : f.objects) out.max_speed = std::max(out.max_speed, o.speed);
  }
  out.window_begin = out.closest_frame >= half_window ? out.closest_frame - half_window : 0;
  out.window_end = std::min(n - 1, out.closest_frame + half_window);

  const double count = static_cast<double>(out.window_end - out.window_begin + 1);
  for (std::size_t t = out.window_begin; t <= out.window_end; ++t) {
    const Frame& f = trace.frames[t];
    out.mean_distance += (f.ego.position - f.objects[index].position).norm();
    out.mean_closing_speed += closing_speed(f.ego, f.objects[index]);
  }
  out.mean_distance /= count;
  out.mean_closing_speed /= count;

  auto bounded = [](double s) { return std::clamp(s, kCueEpsilon, 1.0 - kCueEpsilon); };
  const double s_dist = bounded(std::exp(-out.mean_distance));
  const double s_close =
      bounded(out.max_speed > 0.0 ? std::clamp(out.mean_closing_speed / out.max_speed, 0.0, 1.0) : 0.0);
  double log_no_hazard = 0.0;
  for (std::size_t t = out.window_begin; t <= out.window_end; ++t) {
    const Frame& f = trace.frames[t];
    const double rel_yaw = wrap_angle(f.objects[index].heading - f.ego.heading);
    const double s_head = bounded(0.5 * (1.0 - std::cos(rel_yaw)));
    log_no_hazard += std::log(1.0 - s_dist) + std::log(1.0 - s_head) + std::log(1.0 - s_close);
  }
  out.label = collided ? 1.0 : 1.0 - std::exp(log_no_hazard);
  return out;
}

double near_miss_label(const EpisodeTrace& trace, std::size_t index, std::size_t half_window, bool collided) {
  return near_miss_detail(trace, index, half_window, collided).label;
}

std::vector<HazardSample> harvest(const EpisodeTrace& trace, const std::vector<bool>& collided,
                                  const RoadNetwork& network, std::size_t half_window) {
  if (trace.frames.empty()) throw Error("harvest: empty trace");
  if (collided.size() != trace.object_count()) throw Error("harvest: collision flags do not match objects");
  const Frame& first = trace.frames.front();
  const FeatureContext ctx = make_feature_context(first.ego.pose(), network);
  std::vector<HazardSample> out;
  out.reserve(trace.object_count());
  for (std::size_t i = 0; i < trace.object_count(); ++i) {
    out.push_back({particle_features(relative_state(ctx.ego, first.objects[i].pose()), ctx),
                   near_miss_label(trace, i, half_window, collided[i])});
  }
  return out;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw Error("replay buffer: capacity must be positive");
}

void ReplayBuffer::push(const HazardSample& sample) {
  if (samples_.size() == capacity_) samples_.pop_front();
  samples_.push_back(sample);
}

std::vector<HazardSample> ReplayBuffer::sample(std::size_t count, Rng& rng) const {
  std::vector<HazardSample> out;
  if (samples_.empty()) return out;
  out.reserve(count);
  std::uniform_int_distribution<std::size_t> pick(0, samples_.size() - 1);
  for (std::size_t i = 0; i < count; ++i) out.push_back(samples_[pick(rng)]);
  return out;
}

Vec3 grad_x(const HazardModel& model, const Particle& x, const FeatureContext& ctx) {
  const FeatureVector z = particle_features(x, ctx);
  return particle_feature_jacobian(x, ctx).transpose() * model.input_gradient(z);
}

double hazard_of(const HazardModel& model, const Particle& x, const FeatureContext& ctx) {
  return model.forward(particle_features(x, ctx));
}

}  // namespace steinseed
