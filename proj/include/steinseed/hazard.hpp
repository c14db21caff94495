#pragma once

#include <cstddef>
#include <deque>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "steinseed/geometry.hpp"
#include "steinseed/map_model.hpp"
#include "steinseed/scenario.hpp"

namespace steinseed {

using FeatureVector = Eigen::Matrix<double, 5, 1>;
using FeatureJacobian = Eigen::Matrix<double, 5, 3>;

// Everything the ego-centric features depend on besides the object itself.
struct FeatureContext {
  Pose ego;
  const Lane* ego_lane = nullptr;
  Omega omega;
};

FeatureContext make_feature_context(const Pose& ego, const RoadNetwork& network);

// z = [ds / D_s, dd / D_d, cos dpsi, sin dpsi, lane overlap], first two clipped to [-1, 1].
FeatureVector features(const Pose& ego, const Pose& object, const Lane& ego_lane, const Omega& omega);
FeatureVector particle_features(const Particle& x, const FeatureContext& ctx);
// dz/dx; clipped components have zero derivative at and beyond the clip bound.
FeatureJacobian particle_feature_jacobian(const Particle& x, const FeatureContext& ctx);

struct AgentFrame {
  Vec2 position = Vec2::Zero();
  double heading = 0.0;
  double speed = 0.0;

  Vec2 velocity() const { return speed * heading_vector(heading); }
  Pose pose() const { return {position, heading}; }
  bool operator==(const AgentFrame&) const = default;
};

struct Frame {
  AgentFrame ego;
  std::vector<AgentFrame> objects;

  bool operator==(const Frame&) const = default;
};

// Interaction record of one episode.
struct EpisodeTrace {
  double dt = 0.1;
  std::vector<ObjectKind> kinds;
  Vec2 destination = Vec2::Zero();
  std::vector<Frame> frames;

  std::size_t object_count() const { return kinds.size(); }
  bool operator==(const EpisodeTrace&) const = default;
};

// Positive when the range between the two agents is shrinking; 0 for coincident positions.
double closing_speed(const AgentFrame& ego, const AgentFrame& object);

inline constexpr std::size_t kLabelHalfWindow = 2;
inline constexpr double kCueEpsilon = 1e-6;

struct NearMissDetail {
  std::size_t closest_frame = 0;
  std::size_t window_begin = 0;
  std::size_t window_end = 0;  // inclusive
  double mean_distance = 0.0;
  double mean_closing_speed = 0.0;
  double max_speed = 0.0;
  double label = 0.0;
};

// Dense near-miss score of object `index` around its closest approach.
NearMissDetail near_miss_detail(const EpisodeTrace& trace, std::size_t index, std::size_t half_window,
                                bool collided);
double near_miss_label(const EpisodeTrace& trace, std::size_t index, std::size_t half_window, bool collided);

struct HazardSample {
  FeatureVector z;
  double y = 0.0;
};

// One (frame-0 features, label) sample per object.
std::vector<HazardSample> harvest(const EpisodeTrace& trace, const std::vector<bool>& collided,
                                  const RoadNetwork& network, std::size_t half_window = kLabelHalfWindow);

inline constexpr std::size_t kDefaultBufferCapacity = 10000;

// Bounded FIFO of training samples.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = kDefaultBufferCapacity);

  void push(const HazardSample& sample);
  std::size_t size() const { return samples_.size(); }
  std::size_t capacity() const { return capacity_; }
  const std::deque<HazardSample>& samples() const { return samples_; }

  // Uniform draw with replacement.
  std::vector<HazardSample> sample(std::size_t count, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::deque<HazardSample> samples_;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Feed-forward surrogate 5 -> 16 -> 16 -> 1, tanh hidden units, logistic output.
// Parameters live in one flat vector: W1 (16x5, row-major), b1, W2 (16x16,
// row-major), b2, w3 (1x16), b3.
class HazardModel {
 public:
  static constexpr int kInput = 5;
  static constexpr int kHidden = 16;
  static constexpr int kParameterCount = kHidden * kInput + kHidden + kHidden * kHidden + kHidden + kHidden + 1;

  // All-zero parameters; outputs 0.5 everywhere.
  HazardModel();
  // Xavier-uniform weights, zero biases.
  static HazardModel initialized(Rng& rng);

  double forward(const FeatureVector& z) const;
  double logit(const FeatureVector& z) const;
  FeatureVector input_gradient(const FeatureVector& z) const;
  // d forward / d theta.
  Eigen::VectorXd output_parameter_gradient(const FeatureVector& z) const;

  // Mean binary cross-entropy of the batch and its parameter gradient.
  std::pair<double, Eigen::VectorXd> loss_and_gradient(const std::vector<HazardSample>& batch) const;
  // One Adam step on the mean BCE; returns the pre-step loss.
  double train_step(const std::vector<HazardSample>& batch, double learning_rate);

  const Eigen::VectorXd& parameters() const { return theta_; }
  void set_parameters(const Eigen::VectorXd& theta);
  std::size_t steps_taken() const { return step_; }

  void save(std::ostream& out) const;
  static HazardModel load(std::istream& in);
  void save_file(const std::string& path) const;
  static HazardModel load_file(const std::string& path);

 private:
  struct Activations {
    Eigen::Matrix<double, kHidden, 1> h1;
    Eigen::Matrix<double, kHidden, 1> h2;
    double a3 = 0.0;
  };
  Activations run(const FeatureVector& z) const;

  Eigen::VectorXd theta_;
  Eigen::VectorXd adam_m_;
  Eigen::VectorXd adam_v_;
  std::size_t step_ = 0;
  AdamConfig adam_;
};

// Gradient of the hazard with respect to the particle state, chained through the features.
Vec3 grad_x(const HazardModel& model, const Particle& x, const FeatureContext& ctx);
double hazard_of(const HazardModel& model, const Particle& x, const FeatureContext& ctx);

}  // namespace steinseed
