#include "steinseed/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace steinseed {

double wheelbase_of(ObjectKind kind) {
  return kind == ObjectKind::kBicycle ? kBicycleWheelbase : kVehicleWheelbase;
}

namespace {

OrientedBox box_of(const Vec2& position, double heading, ObjectKind kind) {
  const Footprint f = footprint_of(kind);
  return {position, heading, f.length, f.width};
}

Eigen::Matrix2d rotation(double heading) {
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

double walk_radius(double dt, const ControlLimits& limits) { return limits.max_walk_speed * dt; }

}  // namespace

OrientedBox AgentState::box() const { return box_of(position, heading, kind); }

Control clamp_control(ObjectKind kind, const Control& u, double dt, const ControlLimits& limits) {
  if (kind == ObjectKind::kPedestrian) {
    const double r = walk_radius(dt, limits);
    const double n = u.norm();
    return n > r ? Control(u * (r / n)) : u;
  }
  return {std::clamp(u.x(), -limits.max_acceleration, limits.max_acceleration),
          std::clamp(u.y(), -limits.max_steer, limits.max_steer)};
}

AgentState step_bicycle(const AgentState& state, const Control& u, double dt, double wheelbase) {
  AgentState next = state;
  next.speed = std::clamp(state.speed + u.x() * dt, 0.0, kMaxSpeed);
  const double heading = state.heading + next.speed / wheelbase * std::tan(u.y()) * dt;
  next.position = state.position + next.speed * dt * heading_vector(heading);
  next.heading = wrap_angle(heading);
  return next;
}

AgentState step_pedestrian(const AgentState& state, const Control& u, double dt, const ControlLimits& limits) {
  const Control d = clamp_control(ObjectKind::kPedestrian, u, dt, limits);
  const Vec2 world = rotation(state.heading) * d;
  AgentState next = state;
  next.position = state.position + world;
  const double n = world.norm();
  if (n > 0.0) next.heading = std::atan2(world.y(), world.x());
  next.speed = n / dt;
  return next;
}

AgentState step_agent(const AgentState& state, const Control& u, double dt, const ControlLimits& limits) {
  if (state.kind == ObjectKind::kPedestrian) return step_pedestrian(state, u, dt, limits);
  return step_bicycle(state, clamp_control(state.kind, u, dt, limits), dt, wheelbase_of(state.kind));
}

StepJacobian step_jacobian(const AgentState& state, const Control& u, double dt, const ControlLimits& limits) {
  StepJacobian j = StepJacobian::Zero();
  if (state.kind == ObjectKind::kPedestrian) {
    const Eigen::Matrix2d r = rotation(state.heading);
    j.topRows<2>() = r;
    const Vec2 world = r * clamp_control(state.kind, u, dt, limits);
    const double n2 = world.squaredNorm();
    if (n2 > 0.0) j.row(2) = (Vec2(-world.y(), world.x()) / n2).transpose() * r;
    return j;
  }
  const Control c = clamp_control(state.kind, u, dt, limits);
  const double wheelbase = wheelbase_of(state.kind);
  const double v = std::clamp(state.speed + c.x() * dt, 0.0, kMaxSpeed);
  const double dv_da = (state.speed + c.x() * dt >= 0.0 && state.speed + c.x() * dt <= kMaxSpeed) ? dt : 0.0;
  const double tan_d = std::tan(c.y());
  const double heading = state.heading + v / wheelbase * tan_d * dt;
  const double dpsi_da = dv_da * tan_d * dt / wheelbase;
  const double dpsi_dd = v / wheelbase * (1.0 + tan_d * tan_d) * dt;
  const Vec2 dir = heading_vector(heading);
  const Vec2 perp = left_normal(heading);
  j.block<2, 1>(0, 0) = dt * dir * dv_da + v * dt * perp * dpsi_da;
  j.block<2, 1>(0, 1) = v * dt * perp * dpsi_dd;
  j(2, 0) = dpsi_da;
  j(2, 1) = dpsi_dd;
  return j;
}

Vec2 hazard_control_gradient(const AgentState& object, const Control& u, const AgentState& ego,
                             const HazardModel& model, const FeatureContext& ctx, double dt,
                             const ControlLimits& limits) {
  const AgentState next = step_agent(object, u, dt, limits);
  const Vec3 g = grad_x(model, relative_state(ego.pose(), next.pose()), ctx);
  // d relative_state / d (x, y, heading) of the object.
  Eigen::Matrix3d dx = Eigen::Matrix3d::Zero();
  dx.topLeftCorner<2, 2>() = rotation(ego.heading).transpose();
  dx(2, 2) = 1.0;
  return (dx * step_jacobian(object, u, dt, limits)).transpose() * g;
}

std::vector<Control> gradient_controller(const std::vector<AgentState>& objects, const AgentState& ego,
                                         const HazardModel& model, const RoadNetwork& network, double dt,
                                         const GradientControllerConfig& config) {
  const FeatureContext ctx = make_feature_context(ego.pose(), network);
  const ControlLimits& lim = config.limits;
  std::vector<Control> out;
  out.reserve(objects.size());
  for (const AgentState& obj : objects) {
    const bool walker = obj.kind == ObjectKind::kPedestrian;
    const Vec2 scale = walker ? Vec2::Constant(walk_radius(dt, lim)) : Vec2(lim.max_acceleration, lim.max_steer);
    Control u = Control::Zero();
    for (std::size_t it = 0; it < config.iterations; ++it) {
      const Vec2 g = hazard_control_gradient(obj, u, ego, model, ctx, dt, lim).cwiseProduct(scale);
      const double n = g.norm();
      if (!(n > 0.0)) break;
      // Normalized ascent: one-step sensitivities scale with dt^2 and would
      // otherwise leave the controls at zero.
      const Vec2 un = u.cwiseQuotient(scale) + config.step * g / n;
      u = clamp_control(obj.kind, un.cwiseProduct(scale), dt, lim);
    }
    out.push_back(u);
  }
  return out;
}

std::vector<Control> random_controller(const std::vector<AgentState>& objects, Rng& rng, double dt,
                                       const ControlLimits& limits) {
  auto uniform = [&](double bound) {
    return bound > 0.0 ? std::uniform_real_distribution<double>(-bound, bound)(rng) : 0.0;
  };
  std::vector<Control> out;
  out.reserve(objects.size());
  for (const AgentState& obj : objects) {
    if (obj.kind == ObjectKind::kPedestrian) {
      const double r = walk_radius(dt, limits);
      Control u = Control::Zero();
      if (r > 0.0) {
        do {
          u = {uniform(r), uniform(r)};
        } while (u.norm() > r);
      }
      out.push_back(u);
    } else {
      const double a = uniform(limits.max_acceleration);
      const double d = uniform(limits.max_steer);
      out.push_back({a, d});
    }
  }
  return out;
}

bool object_in_cone(const AgentState& ego, const std::vector<AgentState>& objects, const EgoPolicyConfig& config) {
  const Vec2 forward = heading_vector(ego.heading);
  const Vec2 bumper = ego.position + forward * (0.5 * footprint_of(ego.kind).length);
  const double cos_limit = std::cos(config.cone_half_angle);
  for (const AgentState& obj : objects) {
    const OrientedBox b = obj.box();
    const auto c = b.corners();
    const std::array<Vec2, 9> samples = {c[0], c[1], c[2], c[3], b.center, 0.5 * (c[0] + c[1]),
                                         0.5 * (c[1] + c[2]), 0.5 * (c[2] + c[3]), 0.5 * (c[3] + c[0])};
    for (const Vec2& p : samples) {
      const Vec2 d = p - bumper;
      const double r = d.norm();
      if (r > config.cone_range) continue;
      if (r == 0.0 || d.dot(forward) >= r * cos_limit) return true;
    }
  }
  return false;
}

Control ego_policy(const AgentState& ego, const Polyline& route, const std::vector<AgentState>& objects,
                   const EgoPolicyConfig& config) {
  const PolylineProjection proj = project_to_polyline(ego.position, route);
  const double remaining = polyline_length(route) - proj.arc;
  const Vec2 target = point_at_arc(route, proj.arc + config.lookahead).position;

  double steer = 0.0;
  const Vec2 local = rotation(ego.heading).transpose() * (target - ego.position);
  const double ld = local.norm();
  if (ld > 1e-6) {
    const double alpha = std::atan2(local.y(), local.x());
    steer = std::atan(2.0 * kVehicleWheelbase * std::sin(alpha) / ld);
  }
  steer = std::clamp(steer, -config.max_steer, config.max_steer);

  if (object_in_cone(ego, objects, config)) return {-config.max_braking, steer};

  double target_speed = 0.0;
  if (remaining > config.arrival_distance) {
    // Comfortable deceleration profile toward the end of the route.
    target_speed = std::min(config.target_speed, std::sqrt(2.0 * 2.0 * (remaining - config.arrival_distance)));
  }
  const double accel = std::clamp(config.speed_gain * (target_speed - ego.speed), -config.max_braking,
                                  config.max_acceleration);
  return {accel, steer};
}

const char* violation_name(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kCollision:
      return "collision";
    case ViolationKind::kLaneDeparture:
      return "lane_departure";
    case ViolationKind::kMotionless:
      return "motionless";
  }
  return "collision";
}

ViolationKind violation_from_name(const std::string& name) {
  if (name == "collision") return ViolationKind::kCollision;
  if (name == "lane_departure") return ViolationKind::kLaneDeparture;
  if (name == "motionless") return ViolationKind::kMotionless;
  throw ParseError("unknown violation kind: " + name);
}

namespace {

struct MarkingBounds {
  const Polyline* line;
  Vec2 lo;
  Vec2 hi;
};

std::vector<MarkingBounds> marking_bounds(const RoadNetwork& network) {
  std::vector<MarkingBounds> out;
  for (const Polyline& line : network.solid_markings()) {
    if (line.empty()) continue;
    MarkingBounds b{&line, line.front(), line.front()};
    for (const Vec2& p : line) {
      b.lo = b.lo.cwiseMin(p);
      b.hi = b.hi.cwiseMax(p);
    }
    out.push_back(b);
  }
  return out;
}

bool crosses_marking(const OrientedBox& box, const std::vector<MarkingBounds>& markings) {
  const double reach = 0.5 * std::hypot(box.length, box.width);
  for (const MarkingBounds& m : markings) {
    if ((box.center.array() < m.lo.array() - reach).any() || (box.center.array() > m.hi.array() + reach).any()) {
      continue;
    }
    if (polyline_touches_box(*m.line, box)) return true;
  }
  return false;
}

OrientedBox ego_box(const AgentFrame& ego) { return box_of(ego.position, ego.heading, ObjectKind::kVehicle); }

std::optional<std::size_t> first_overlap(const Frame& frame, const std::vector<ObjectKind>& kinds) {
  const OrientedBox e = ego_box(frame.ego);
  for (std::size_t i = 0; i < frame.objects.size(); ++i) {
    const AgentFrame& o = frame.objects[i];
    if (boxes_overlap(e, box_of(o.position, o.heading, kinds[i]))) return i;
  }
  return std::nullopt;
}

bool corridor_clear(const Frame& frame, const std::vector<ObjectKind>& kinds) {
  const double half_ego = 0.5 * footprint_of(ObjectKind::kVehicle).length;
  const OrientedBox corridor{frame.ego.position + heading_vector(frame.ego.heading) * (half_ego + 0.5 * kCorridorLength),
                             frame.ego.heading, kCorridorLength, kCorridorWidth};
  for (std::size_t i = 0; i < frame.objects.size(); ++i) {
    const AgentFrame& o = frame.objects[i];
    if (boxes_overlap(corridor, box_of(o.position, o.heading, kinds[i]))) return false;
  }
  return true;
}

}  // namespace

std::vector<ViolationRecord> detect_violations(const EpisodeTrace& trace, const RoadNetwork& network,
                                               double motionless_seconds) {
  std::vector<ViolationRecord> out;
  for (std::size_t t = 0; t < trace.frames.size(); ++t) {
    if (const auto hit = first_overlap(trace.frames[t], trace.kinds)) {
      out.push_back({ViolationKind::kCollision, t, hit});
      break;
    }
  }

  const auto markings = marking_bounds(network);
  for (std::size_t t = 0; t < trace.frames.size(); ++t) {
    if (crosses_marking(ego_box(trace.frames[t].ego), markings)) {
      out.push_back({ViolationKind::kLaneDeparture, t, std::nullopt});
      break;
    }
  }

  bool stalled_run = false;
  std::size_t stalled_since = 0;
  for (std::size_t t = 0; t < trace.frames.size(); ++t) {
    const Frame& f = trace.frames[t];
    const bool stalled = f.ego.speed < kStoppedSpeed &&
                         (f.ego.position - trace.destination).norm() > kArrivalRadius &&
                         corridor_clear(f, trace.kinds);
    if (!stalled) {
      stalled_run = false;
      continue;
    }
    if (!stalled_run) {
      stalled_run = true;
      stalled_since = t;
    }
    if (static_cast<double>(t - stalled_since) * trace.dt > motionless_seconds) {
      out.push_back({ViolationKind::kMotionless, t, std::nullopt});
      break;
    }
  }
  return out;
}

const char* tester_name(TesterKind kind) { return kind == TesterKind::kGradient ? "gradient" : "random"; }

TesterKind tester_from_name(const std::string& name) {
  if (name == "gradient") return TesterKind::kGradient;
  if (name == "random") return TesterKind::kRandom;
  throw ParseError("unknown tester: " + name);
}

std::vector<bool> collided_objects(const EpisodeTrace& trace) {
  std::vector<bool> out(trace.object_count(), false);
  if (trace.frames.empty()) return out;
  const Frame& last = trace.frames.back();
  const OrientedBox e = ego_box(last.ego);
  for (std::size_t i = 0; i < last.objects.size(); ++i) {
    const AgentFrame& o = last.objects[i];
    out[i] = boxes_overlap(e, box_of(o.position, o.heading, trace.kinds[i]));
  }
  return out;
}

EpisodeResult run_episode(const Chromosome& seed, const RoadNetwork& network, const HazardModel& model,
                          const EpisodeConfig& config, Rng& rng) {
  if (!(config.dt > 0.0)) throw Error("run_episode: dt must be positive");
  if (config.horizon == 0) throw Error("run_episode: horizon must be positive");
  const auto started = std::chrono::steady_clock::now();

  EpisodeResult result;
  result.seed = seed;
  const Route route = plan_route(seed.route.ego_position, seed.route.ego_heading, network);

  AgentState ego{seed.route.ego_position, wrap_angle(seed.route.ego_heading), 0.0, ObjectKind::kVehicle};
  std::vector<AgentState> objects;
  objects.reserve(seed.objects.size());
  EpisodeTrace& trace = result.trace;
  trace.dt = config.dt;
  trace.destination = seed.route.destination;
  for (const ObjectInit& o : seed.objects) {
    objects.push_back({o.position, wrap_angle(o.heading), 0.0, o.kind});
    trace.kinds.push_back(o.kind);
  }

  auto record = [&] {
    Frame f;
    f.ego = ego.frame();
    f.objects.reserve(objects.size());
    for (const AgentState& o : objects) f.objects.push_back(o.frame());
    trace.frames.push_back(std::move(f));
    return first_overlap(trace.frames.back(), trace.kinds).has_value();
  };

  bool collided = record();
  while (!collided && trace.frames.size() < config.horizon) {
    const std::vector<Control> controls =
        config.tester == TesterKind::kGradient
            ? gradient_controller(objects, ego, model, network, config.dt, config.gradient)
            : random_controller(objects, rng, config.dt, config.gradient.limits);
    for (std::size_t i = 0; i < objects.size(); ++i) {
      objects[i] = step_agent(objects[i], controls[i], config.dt, config.gradient.limits);
    }
    const Control u = ego_policy(ego, route.path, objects, config.ego);
    ego = step_bicycle(ego, u, config.dt, kVehicleWheelbase);
    collided = record();
  }

  result.violations = detect_violations(trace, network);
  result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace steinseed
