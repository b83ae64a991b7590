#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "terrashadow/geometry.hpp"
#include "terrashadow/heightfield.hpp"

namespace terrashadow {

/// Terrain of a whole body: up to one height field per cube face. Faces
/// without a field are the bare sphere at h = 0. Positions are body-fixed
/// world coordinates in body radii.
class Body {
 public:
  /// All fields must share one relief (vertical scale over body radius).
  explicit Body(std::array<const HeightField*, 6> faces);
  /// Smooth sphere with the given relief and no terrain.
  explicit Body(double relief);

  double relief() const { return relief_; }
  /// Radius of the sphere enclosing all terrain, 1 + relief.
  double outer_radius() const { return 1.0 + relief_; }
  const HeightField* field(int face_id) const { return faces_[static_cast<std::size_t>(face_id)]; }

  /// Bilinear terrain height (units of h) under a face coordinate; edge
  /// clamped outside the field window, zero on bare faces.
  double height_at(int face_id, TexCoord face_uv) const;
  /// Terrain height under a world direction.
  double height_at(Vec3 world) const;
  /// Height of a world point above the body sphere in units of h.
  double altitude(Vec3 world) const { return (length(world) - 1.0) / relief_; }

  /// Unit outward normal of the bilinear surface from central differences
  /// at one base texel (world frame).
  Vec3 normal_at(int face_id, TexCoord face_uv) const;

  /// March step in body radii: half of the finest base texel.
  double base_step() const;

 private:
  std::array<const HeightField*, 6> faces_{};
  double relief_ = 0.0;
};

/// One gridded patch of a cube face: (subdiv + 1)^2 vertices in the face's
/// local frame. Vertex (i, j) sits over window coordinate (i, j) / subdiv.
struct MeshPatch {
  int face_id = 4;
  int subdiv = 1;
  FaceWindow window;  ///< whole face by default
  std::vector<Vec3> vertices;

  const Vec3& vertex(int i, int j) const { return vertices[static_cast<std::size_t>(j) * (subdiv + 1) + i]; }
  Vec3& vertex(int i, int j) { return vertices[static_cast<std::size_t>(j) * (subdiv + 1) + i]; }
  /// Face coordinate of vertex (i, j).
  TexCoord uv(int i, int j) const {
    return window.to_face({static_cast<double>(i) / subdiv, static_cast<double>(j) / subdiv});
  }
};

/// Cube sphere made of face patches. Vertices are not shared across patches.
struct CubesphereMesh {
  double radius = 1.0;  ///< radius of the undisplaced vertices
  std::vector<MeshPatch> patches;

  std::size_t vertex_count() const;
  std::size_t triangle_count() const;
};

/// Vertex count of a full six-face mesh, 6 (subdiv + 1)^2.
constexpr std::size_t vertex_count_for(int subdiv) {
  return 6u * static_cast<std::size_t>(subdiv + 1) * static_cast<std::size_t>(subdiv + 1);
}

/// Builds whole-face patches with every vertex on the sphere of `radius`.
/// Throws std::invalid_argument when subdiv < 1.
CubesphereMesh build_cubesphere(int subdiv, double radius, std::vector<int> faces = {0, 1, 2, 3, 4, 5});

/// Patch over a window of one face, vertices on the sphere of `radius`.
MeshPatch build_patch(int face_id, int subdiv, FaceWindow window, double radius);

/// Moves each vertex radially onto the terrain surface of the body.
CubesphereMesh displace_mesh(const CubesphereMesh& mesh, const Body& body);

/// Single-field convenience: displaces the field's face by (1 - h) V inward.
CubesphereMesh displace_mesh(const CubesphereMesh& mesh, const HeightField& hf);

struct MeshHit {
  double t = 0.0;
  int face_id = 0;
  Vec3 normal;  ///< geometric triangle normal, world frame
};

/// Nearest triangle hit along a world ray, found by walking each face's
/// projected grid cells in ray order.
std::optional<MeshHit> intersect_mesh(const Ray& ray, const CubesphereMesh& mesh);

struct ViewPolicy {
  bool predisplaced = true;
  /// Accept when |ray altitude - terrain height| falls below this (h units).
  double tolerance = 0.0;
  int budget = 4096;
  double oblique_max = 8.0;
  /// March step in body radii; Body::base_step() when zero.
  double step = 0.0;
};

/// Tolerance of a quarter base texel expressed in h units, 0.25 hs / V.
double default_tolerance(const HeightField& hf);

struct SurfaceHit {
  Vec3 p;       ///< world position
  Vec3 N;       ///< unit surface normal, world frame
  TexCoord uv;  ///< face coordinate
  int face_id = 0;
  int steps = 0;  ///< terrain evaluations spent refining
};

struct ViewResult {
  std::optional<SurfaceHit> hit;
  int steps = 0;  ///< also counted on a miss
};

/// Casts a normalized world ray against the terrain. With pre-displacement
/// the march starts at the displaced-mesh hit and runs forward or backward
/// from there; otherwise it starts where the ray enters the outer sphere.
ViewResult view_intersect(const Ray& ray, const CubesphereMesh& mesh, const Body& body, const ViewPolicy& policy);

/// Dense fixed-step march from the outer sphere with bisection at the first
/// crossing. Used as an accuracy oracle.
std::optional<Vec3> dense_march(const Ray& ray, const Body& body, int steps);

}  // namespace terrashadow
