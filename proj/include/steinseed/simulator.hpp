#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "steinseed/geometry.hpp"
#include "steinseed/hazard.hpp"
#include "steinseed/map_model.hpp"
#include "steinseed/scenario.hpp"

namespace steinseed {

inline constexpr double kDefaultDt = 0.1;
inline constexpr std::size_t kDefaultHorizon = 300;
inline constexpr double kMaxSpeed = 30.0;
inline constexpr double kVehicleWheelbase = 2.7;
inline constexpr double kBicycleWheelbase = 1.1;
inline constexpr double kMotionlessSeconds = 15.0;

double wheelbase_of(ObjectKind kind);

struct AgentState {
  Vec2 position = Vec2::Zero();
  double heading = 0.0;
  double speed = 0.0;
  ObjectKind kind = ObjectKind::kVehicle;

  Pose pose() const { return {position, heading}; }
  OrientedBox box() const;
  AgentFrame frame() const { return {position, heading, speed}; }
};

// Vehicles and bicycles: (acceleration m/s^2, steering angle rad).
// Pedestrians: body-frame displacement per step (forward, left) in m.
using Control = Vec2;

struct ControlLimits {
  double max_acceleration = 3.0;
  double max_steer = 0.5;
  double max_walk_speed = 1.5;
};

Control clamp_control(ObjectKind kind, const Control& u, double dt, const ControlLimits& limits = {});

// Semi-implicit Euler: speed first, then heading with the new speed, then
// position along the new heading.
AgentState step_bicycle(const AgentState& state, const Control& u, double dt, double wheelbase);
AgentState step_pedestrian(const AgentState& state, const Control& u, double dt,
                           const ControlLimits& limits = {});
// Dispatches on kind after clamping the control.
AgentState step_agent(const AgentState& state, const Control& u, double dt, const ControlLimits& limits = {});

// d(x, y, heading)_{next} / d(control) of step_agent for a control inside its
// limits.
using StepJacobian = Eigen::Matrix<double, 3, 2>;
StepJacobian step_jacobian(const AgentState& state, const Control& u, double dt, const ControlLimits& limits = {});

struct GradientControllerConfig {
  std::size_t iterations = 3;
  // Step in control units normalized by the control limits.
  double step = 0.5;
  ControlLimits limits;
};

// d hazard(next object state) / d control for one object.
Vec2 hazard_control_gradient(const AgentState& object, const Control& u, const AgentState& ego,
                             const HazardModel& model, const FeatureContext& ctx, double dt,
                             const ControlLimits& limits = {});

std::vector<Control> gradient_controller(const std::vector<AgentState>& objects, const AgentState& ego,
                                         const HazardModel& model, const RoadNetwork& network, double dt,
                                         const GradientControllerConfig& config = {});

std::vector<Control> random_controller(const std::vector<AgentState>& objects, Rng& rng, double dt,
                                       const ControlLimits& limits = {});

struct EgoPolicyConfig {
  double lookahead = 8.0;
  double target_speed = 10.0;
  double speed_gain = 1.0;
  double max_acceleration = 3.0;
  double max_braking = 8.0;
  double max_steer = 0.5;
  double cone_range = 12.0;
  double cone_half_angle = 20.0 * kPi / 180.0;
  // Remaining route length below which the ego stops.
  double arrival_distance = 2.0;
};

// True when any footprint sample of an object lies in the forward braking cone.
bool object_in_cone(const AgentState& ego, const std::vector<AgentState>& objects, const EgoPolicyConfig& config);

// Pure pursuit on the route polyline with proportional speed control.
Control ego_policy(const AgentState& ego, const Polyline& route, const std::vector<AgentState>& objects,
                   const EgoPolicyConfig& config = {});

enum class ViolationKind { kCollision, kLaneDeparture, kMotionless };

const char* violation_name(ViolationKind kind);
ViolationKind violation_from_name(const std::string& name);

struct ViolationRecord {
  ViolationKind kind = ViolationKind::kCollision;
  std::size_t frame = 0;
  std::optional<std::size_t> object;

  bool operator==(const ViolationRecord&) const = default;
};

inline constexpr double kCorridorLength = 10.0;
inline constexpr double kCorridorWidth = 3.5;
inline constexpr double kStoppedSpeed = 0.1;
inline constexpr double kArrivalRadius = 5.0;

std::vector<ViolationRecord> detect_violations(const EpisodeTrace& trace, const RoadNetwork& network,
                                               double motionless_seconds = kMotionlessSeconds);

enum class TesterKind { kGradient, kRandom };

const char* tester_name(TesterKind kind);
TesterKind tester_from_name(const std::string& name);

struct EpisodeConfig {
  std::size_t horizon = kDefaultHorizon;
  double dt = kDefaultDt;
  TesterKind tester = TesterKind::kGradient;
  GradientControllerConfig gradient;
  EgoPolicyConfig ego;
};

struct EpisodeResult {
  Chromosome seed;
  EpisodeTrace trace;
  std::vector<ViolationRecord> violations;
  double wall_time = 0.0;

  bool violated() const { return !violations.empty(); }
};

// Objects whose footprint overlaps the ego in the last recorded frame.
std::vector<bool> collided_objects(const EpisodeTrace& trace);

EpisodeResult run_episode(const Chromosome& seed, const RoadNetwork& network, const HazardModel& model,
                          const EpisodeConfig& config, Rng& rng);

}  // namespace steinseed
