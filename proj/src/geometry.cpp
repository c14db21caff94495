#include "steinseed/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace steinseed {

double wrap_angle(double angle) {
  double r = std::remainder(angle, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  if (r > kPi) r -= kTwoPi;
  return r;
}

PolylineProjection project_to_polyline(const Vec2& point, const Polyline& line) {
  PolylineProjection best;
  best.distance = std::numeric_limits<double>::infinity();
  if (line.empty()) return best;
  if (line.size() == 1) {
    best.closest = line.front();
    best.distance = (point - line.front()).norm();
    return best;
  }
  double arc_start = 0.0;
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    const Vec2& a = line[i];
    const Vec2 ab = line[i + 1] - a;
    const double len2 = ab.squaredNorm();
    const double len = std::sqrt(len2);
    double t = len2 > 0.0 ? (point - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Vec2 c = a + t * ab;
    const double d = (point - c).norm();
    if (d < best.distance) {
      best.closest = c;
      best.distance = d;
      best.arc = arc_start + t * len;
      best.segment = i;
      const double side = len > 0.0 ? cross(ab, point - a) : 0.0;
      best.lateral = side >= 0.0 ? d : -d;
    }
    arc_start += len;
  }
  return best;
}

double polyline_length(const Polyline& line) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < line.size(); ++i) total += (line[i + 1] - line[i]).norm();
  return total;
}

Pose point_at_arc(const Polyline& line, double arc) {
  Pose pose;
  if (line.empty()) return pose;
  if (line.size() == 1) {
    pose.position = line.front();
    return pose;
  }
  arc = std::max(arc, 0.0);
  double walked = 0.0;
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    const Vec2 ab = line[i + 1] - line[i];
    const double len = ab.norm();
    if (walked + len >= arc || i + 2 == line.size()) {
      const double t = len > 0.0 ? std::clamp((arc - walked) / len, 0.0, 1.0) : 0.0;
      pose.position = line[i] + t * ab;
      pose.heading = std::atan2(ab.y(), ab.x());
      return pose;
    }
    walked += len;
  }
  return pose;
}

Polyline offset_polyline(const Polyline& line, double offset) {
  Polyline out;
  out.reserve(line.size());
  for (std::size_t i = 0; i < line.size(); ++i) {
    const std::size_t prev = i == 0 ? 0 : i - 1;
    const std::size_t next = std::min(i + 1, line.size() - 1);
    Vec2 t = line[next] - line[prev];
    const double n = t.norm();
    if (n == 0.0) {
      out.push_back(line[i]);
      continue;
    }
    t /= n;
    out.emplace_back(line[i] + offset * Vec2(-t.y(), t.x()));
  }
  return out;
}

std::array<Vec2, 4> OrientedBox::corners() const {
  const Vec2 f = heading_vector(heading) * (0.5 * length);
  const Vec2 l = left_normal(heading) * (0.5 * width);
  return {center + f + l, center - f + l, center - f - l, center + f - l};
}

namespace {

void project_on_axis(const std::array<Vec2, 4>& pts, const Vec2& axis, double& lo, double& hi) {
  lo = hi = pts[0].dot(axis);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double p = pts[i].dot(axis);
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
}

}  // namespace

bool boxes_overlap(const OrientedBox& a, const OrientedBox& b) {
  const auto ca = a.corners();
  const auto cb = b.corners();
  const std::array<Vec2, 4> axes = {heading_vector(a.heading), left_normal(a.heading),
                                    heading_vector(b.heading), left_normal(b.heading)};
  for (const Vec2& axis : axes) {
    double a_lo, a_hi, b_lo, b_hi;
    project_on_axis(ca, axis, a_lo, a_hi);
    project_on_axis(cb, axis, b_lo, b_hi);
    if (a_hi < b_lo || b_hi < a_lo) return false;
  }
  return true;
}

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  const Vec2 r = p2 - p1;
  const Vec2 s = q2 - q1;
  const double d1 = cross(r, q1 - p1);
  const double d2 = cross(r, q2 - p1);
  const double d3 = cross(s, p1 - q1);
  const double d4 = cross(s, p2 - q1);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  auto on_segment = [](const Vec2& a, const Vec2& b, const Vec2& p) {
    return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
           std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
  };
  if (d1 == 0 && on_segment(p1, p2, q1)) return true;
  if (d2 == 0 && on_segment(p1, p2, q2)) return true;
  if (d3 == 0 && on_segment(q1, q2, p1)) return true;
  if (d4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

bool point_in_box(const Vec2& p, const OrientedBox& box) {
  const Vec2 d = p - box.center;
  return std::abs(d.dot(heading_vector(box.heading))) <= 0.5 * box.length &&
         std::abs(d.dot(left_normal(box.heading))) <= 0.5 * box.width;
}

bool polyline_touches_box(const Polyline& line, const OrientedBox& box) {
  if (line.empty()) return false;
  const auto c = box.corners();
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    for (std::size_t e = 0; e < 4; ++e) {
      if (segments_intersect(line[i], line[i + 1], c[e], c[(e + 1) % 4])) return true;
    }
  }
  return point_in_box(line.front(), box);
}

}  // namespace steinseed
