#pragma once

#include <cmath>

namespace star {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, const Vec3& v) { return {s * v.x, s * v.y, s * v.z}; }

inline double norm(const Vec3& v) { return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z); }
inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }

// Axis-aligned box in meters.
struct Aabb {
  Vec3 min;
  Vec3 max;

  Vec3 center() const;
  bool valid() const;
  bool contains(const Vec3& p) const;

  friend bool operator==(const Aabb&, const Aabb&) = default;
};

// Planar robot pose: position in meters plus heading (yaw) in radians.
struct Pose {
  Vec3 position;
  double yaw = 0.0;

  friend bool operator==(const Pose&, const Pose&) = default;
};

}  // namespace star
