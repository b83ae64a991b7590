#pragma once

#include <cmath>

namespace terrashadow {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr bool operator==(const Vec2&) const = default;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3 operator+(Vec3 o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(Vec3 o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  constexpr bool operator==(const Vec3&) const = default;
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }
constexpr Vec3 operator*(double s, Vec3 v) { return v * s; }

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double length(Vec2 v) { return std::sqrt(dot(v, v)); }
inline double length(Vec3 v) { return std::sqrt(dot(v, v)); }

inline Vec2 normalize(Vec2 v) { return v / length(v); }
inline Vec3 normalize(Vec3 v) { return v / length(v); }

/// Object-space position in a face-local frame: the cube face plane sits at
/// z = 1 and lengths are in units of the body radius.
using ObjPoint = Vec3;

/// Ray in object space. `dir` is expected to be unit length.
struct Ray {
  Vec3 origin;
  Vec3 dir;

  constexpr Vec3 at(double t) const { return origin + dir * t; }
};

/// Parameter interval where the ray is inside the sphere of `radius` about
/// the origin. Returns false when the ray misses.
inline bool intersect_sphere(const Ray& ray, double radius, double& t_near, double& t_far) {
  const double b = dot(ray.origin, ray.dir);
  const double c = dot(ray.origin, ray.origin) - radius * radius;
  const double disc = b * b - c;
  if (disc < 0.0) return false;
  const double root = std::sqrt(disc);
  t_near = -b - root;
  t_far = -b + root;
  return true;
}

}  // namespace terrashadow
