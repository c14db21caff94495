#pragma once

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace steinseed {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class IntegrityError : public Error {
 public:
  using Error::Error;
};

// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

struct Pose {
  Vec2 position = Vec2::Zero();
  double heading = 0.0;
};

inline Vec2 heading_vector(double heading) {
  return {std::cos(heading), std::sin(heading)};
}

// Left-hand normal of a heading.
inline Vec2 left_normal(double heading) {
  return {-std::sin(heading), std::cos(heading)};
}

inline double cross(const Vec2& a, const Vec2& b) {
  return a.x() * b.y() - a.y() * b.x();
}

using Polyline = std::vector<Vec2>;

struct PolylineProjection {
  Vec2 closest = Vec2::Zero();
  double distance = 0.0;
  // Arc length along the polyline of the closest point.
  double arc = 0.0;
  // Signed lateral offset, positive to the left of the travel direction.
  double lateral = 0.0;
  std::size_t segment = 0;
};

PolylineProjection project_to_polyline(const Vec2& point, const Polyline& line);

double polyline_length(const Polyline& line);

// Point at arc length `arc` (clamped to the polyline) and the tangent heading there.
Pose point_at_arc(const Polyline& line, double arc);

// Polyline shifted by `offset` along its left normal (per-vertex averaged normals).
Polyline offset_polyline(const Polyline& line, double offset);

// Oriented rectangle: center, heading of the long axis, full length and width.
struct OrientedBox {
  Vec2 center = Vec2::Zero();
  double heading = 0.0;
  double length = 0.0;
  double width = 0.0;

  std::array<Vec2, 4> corners() const;
};

// Separating-axis test; touching edges count as overlap.
bool boxes_overlap(const OrientedBox& a, const OrientedBox& b);

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2);

// True when any segment of `line` crosses an edge of `box` or lies inside it.
bool polyline_touches_box(const Polyline& line, const OrientedBox& box);

bool point_in_box(const Vec2& p, const OrientedBox& box);

}  // namespace steinseed
