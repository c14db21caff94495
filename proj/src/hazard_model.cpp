#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "steinseed/hazard.hpp"

namespace steinseed {

namespace {

constexpr int kIn = HazardModel::kInput;
constexpr int kH = HazardModel::kHidden;
constexpr int kW1 = 0;
constexpr int kB1 = kW1 + kH * kIn;
constexpr int kW2 = kB1 + kH;
constexpr int kB2 = kW2 + kH * kH;
constexpr int kW3 = kB2 + kH;
constexpr int kB3 = kW3 + kH;

using W1Map = Eigen::Map<const Eigen::Matrix<double, kH, kIn, Eigen::RowMajor>>;
using W2Map = Eigen::Map<const Eigen::Matrix<double, kH, kH, Eigen::RowMajor>>;
using VecMap = Eigen::Map<const Eigen::Matrix<double, kH, 1>>;
using W1MapMut = Eigen::Map<Eigen::Matrix<double, kH, kIn, Eigen::RowMajor>>;
using W2MapMut = Eigen::Map<Eigen::Matrix<double, kH, kH, Eigen::RowMajor>>;
using VecMapMut = Eigen::Map<Eigen::Matrix<double, kH, 1>>;

double sigmoid(double a) {
  if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
  const double e = std::exp(a);
  return e / (1.0 + e);
}

double softplus(double a) { return std::max(a, 0.0) + std::log1p(std::exp(-std::abs(a))); }

constexpr char kMagic[4] = {'H', 'Z', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

struct Shape {
  std::uint32_t rows;
  std::uint32_t cols;
};
constexpr Shape kShapes[6] = {{kH, kIn}, {kH, 1}, {kH, kH}, {kH, 1}, {1, kH}, {1, 1}};

}  // namespace

HazardModel::HazardModel()
    : theta_(Eigen::VectorXd::Zero(kParameterCount)),
      adam_m_(Eigen::VectorXd::Zero(kParameterCount)),
      adam_v_(Eigen::VectorXd::Zero(kParameterCount)) {}

HazardModel HazardModel::initialized(Rng& rng) {
  HazardModel m;
  auto fill = [&](int offset, int rows, int cols) {
    const double limit = std::sqrt(6.0 / (rows + cols));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (int i = 0; i < rows * cols; ++i) m.theta_[offset + i] = u(rng);
  };
  fill(kW1, kH, kIn);
  fill(kW2, kH, kH);
  fill(kW3, 1, kH);
  return m;
}

void HazardModel::set_parameters(const Eigen::VectorXd& theta) {
  if (theta.size() != kParameterCount) throw Error("hazard model: wrong parameter count");
  if (!theta.allFinite()) throw Error("hazard model: non-finite parameters");
  theta_ = theta;
}

HazardModel::Activations HazardModel::run(const FeatureVector& z) const {
  const double* p = theta_.data();
  Activations a;
  a.h1 = (W1Map(p + kW1) * z + VecMap(p + kB1)).array().tanh();
  a.h2 = (W2Map(p + kW2) * a.h1 + VecMap(p + kB2)).array().tanh();
  a.a3 = VecMap(p + kW3).dot(a.h2) + p[kB3];
  return a;
}

double HazardModel::logit(const FeatureVector& z) const { return run(z).a3; }

double HazardModel::forward(const FeatureVector& z) const { return sigmoid(run(z).a3); }

FeatureVector HazardModel::input_gradient(const FeatureVector& z) const {
  const double* p = theta_.data();
  const Activations a = run(z);
  const double s = sigmoid(a.a3);
  const Eigen::Matrix<double, kH, 1> d2 =
      (VecMap(p + kW3) * (s * (1.0 - s))).array() * (1.0 - a.h2.array().square());
  const Eigen::Matrix<double, kH, 1> d1 =
      (W2Map(p + kW2).transpose() * d2).array() * (1.0 - a.h1.array().square());
  return W1Map(p + kW1).transpose() * d1;
}

namespace {

// Accumulates d(a3)/d(theta) scaled by `scale` into `grad`.
void accumulate_logit_gradient(const Eigen::VectorXd& theta, const FeatureVector& z,
                               const Eigen::Matrix<double, kH, 1>& h1, const Eigen::Matrix<double, kH, 1>& h2,
                               double scale, Eigen::VectorXd& grad) {
  const double* p = theta.data();
  double* g = grad.data();
  VecMapMut(g + kW3) += scale * h2;
  g[kB3] += scale;
  const Eigen::Matrix<double, kH, 1> d2 = (VecMap(p + kW3) * scale).array() * (1.0 - h2.array().square());
  W2MapMut(g + kW2) += d2 * h1.transpose();
  VecMapMut(g + kB2) += d2;
  const Eigen::Matrix<double, kH, 1> d1 =
      (W2Map(p + kW2).transpose() * d2).array() * (1.0 - h1.array().square());
  W1MapMut(g + kW1) += d1 * z.transpose();
  VecMapMut(g + kB1) += d1;
}

}  // namespace

Eigen::VectorXd HazardModel::output_parameter_gradient(const FeatureVector& z) const {
  const Activations a = run(z);
  const double s = sigmoid(a.a3);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(kParameterCount);
  accumulate_logit_gradient(theta_, z, a.h1, a.h2, s * (1.0 - s), grad);
  return grad;
}

std::pair<double, Eigen::VectorXd> HazardModel::loss_and_gradient(const std::vector<HazardSample>& batch) const {
  if (batch.empty()) throw Error("hazard model: empty batch");
  const double inv = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(kParameterCount);
  for (const HazardSample& s : batch) {
    const Activations a = run(s.z);
    // BCE with logits: softplus(a) - y * a.
    loss += softplus(a.a3) - s.y * a.a3;
    accumulate_logit_gradient(theta_, s.z, a.h1, a.h2, (sigmoid(a.a3) - s.y) * inv, grad);
  }
  return {loss * inv, std::move(grad)};
}

double HazardModel::train_step(const std::vector<HazardSample>& batch, double learning_rate) {
  auto [loss, grad] = loss_and_gradient(batch);
  if (!std::isfinite(loss) || !grad.allFinite()) throw Error("hazard model: non-finite training loss");
  ++step_;
  adam_m_ = adam_.beta1 * adam_m_ + (1.0 - adam_.beta1) * grad;
  adam_v_ = adam_.beta2 * adam_v_ + (1.0 - adam_.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(adam_.beta1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(adam_.beta2, static_cast<double>(step_));
  theta_.array() -= learning_rate * (adam_m_.array() / c1) / ((adam_v_.array() / c2).sqrt() + adam_.epsilon);
  if (!theta_.allFinite()) throw Error("hazard model: parameters diverged");
  return loss;
}

void HazardModel::save(std::ostream& out) const {
  out.write(kMagic, sizeof(kMagic));
  const std::uint32_t count = 6;
  out.write(reinterpret_cast<const char*>(&kVersion), sizeof(kVersion));
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (const Shape& s : kShapes) {
    out.write(reinterpret_cast<const char*>(&s.rows), sizeof(s.rows));
    out.write(reinterpret_cast<const char*>(&s.cols), sizeof(s.cols));
  }
  out.write(reinterpret_cast<const char*>(theta_.data()), sizeof(double) * kParameterCount);
  if (!out) throw Error("hazard checkpoint: write failed");
}

HazardModel HazardModel::load(std::istream& in) {
  char magic[4];
  std::uint32_t version = 0;
  std::uint32_t count = 0;
  in.read(magic, sizeof(magic));
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0 || version != kVersion || count != 6) {
    throw ParseError("hazard checkpoint: bad header");
  }
  for (const Shape& expected : kShapes) {
    Shape s{};
    in.read(reinterpret_cast<char*>(&s.rows), sizeof(s.rows));
    in.read(reinterpret_cast<char*>(&s.cols), sizeof(s.cols));
    if (!in || s.rows != expected.rows || s.cols != expected.cols) {
      throw ParseError("hazard checkpoint: unexpected tensor shape");
    }
  }
  Eigen::VectorXd theta(kParameterCount);
  in.read(reinterpret_cast<char*>(theta.data()), sizeof(double) * kParameterCount);
  if (!in) throw ParseError("hazard checkpoint: truncated parameter array");
  HazardModel m;
  m.set_parameters(theta);
  return m;
}

void HazardModel::save_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint: " + path);
  save(out);
}

HazardModel HazardModel::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint: " + path);
  return load(in);
}

}  // namespace steinseed
