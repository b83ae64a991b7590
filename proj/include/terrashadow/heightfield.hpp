#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "terrashadow/geometry.hpp"

namespace terrashadow {

/// Raised for malformed or invalid height field input.
class HeightFieldError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Texture-space coordinate on a face (or on a height field window), both
/// components nominally in [0, 1].
struct TexCoord {
  double u = 0.0;
  double v = 0.0;
};

/// Orthonormal right-handed frame of one cube face. Face-local (x, y, z) maps
/// to body-fixed world coordinates as x*right + y*up + z*normal.
struct FaceFrame {
  Vec3 right;
  Vec3 up;
  Vec3 normal;

  Vec3 to_world(Vec3 local) const { return right * local.x + up * local.y + normal * local.z; }
  Vec3 to_local(Vec3 world) const { return {dot(world, right), dot(world, up), dot(world, normal)}; }
};

/// Faces are ordered +X, -X, +Y, -Y, +Z, -Z.
const FaceFrame& face_frame(int face_id);

/// Cube face whose gnomonic projection contains the world direction.
int face_for_direction(Vec3 world_dir);

/// Gnomonic projection onto the face plane z = 1: (u, v) = (x/z, y/z)/2 + 1/2.
/// Throws std::domain_error when the point is on or behind the face plane.
TexCoord obj_to_tex(const ObjPoint& p);

/// Inverse of obj_to_tex. The returned point lies on the radial through
/// the face coordinate at distance 1 + h * relief, where relief is the
/// vertical scale in body radii.
ObjPoint tex_to_obj(TexCoord face_uv, double h, double relief);

/// Sub-rectangle of a cube face covered by a height field. A field texture
/// coordinate t maps to face coordinate origin + t * scale.
struct FaceWindow {
  double u0 = 0.0;
  double v0 = 0.0;
  double scale = 1.0;

  TexCoord to_face(TexCoord local) const { return {u0 + local.u * scale, v0 + local.v * scale}; }
  TexCoord to_local(TexCoord face) const { return {(face.u - u0) / scale, (face.v - v0) / scale}; }
};

/// Lunar mean radius in meters, used when metadata names no body.
inline constexpr double kDefaultBodyRadius = 1737.4e3;

/// Physical description carried alongside the samples.
struct HeightFieldMeta {
  int width = 0;
  int height = 0;
  double horizontal_scale = 1.0;  ///< meters per texel
  double vertical_scale = 1.0;    ///< meters per unit h
  double body_radius = kDefaultBodyRadius;  ///< meters
  int face_id = 4;
  /// Face-space origin of the field; centered on the face when absent.
  std::optional<TexCoord> face_offset;
};

HeightFieldMeta load_meta(const std::filesystem::path& path);
void save_meta(const std::filesystem::path& path, const HeightFieldMeta& meta);

enum class Filter { point, bilinear };

/// Square power-of-two elevation grid with values h in [0, 1]. Row j covers
/// v in [j/N, (j+1)/N) and column i covers u in [i/N, (i+1)/N). Immutable
/// after construction.
class HeightField {
 public:
  HeightField() = default;
  HeightField(int size, std::vector<float> values, const HeightFieldMeta& meta);

  int size() const { return size_; }
  float at(int i, int j) const { return values_[static_cast<std::size_t>(j) * size_ + i]; }
  std::span<const float> values() const { return values_; }

  double horizontal_scale() const { return horizontal_scale_; }
  double vertical_scale() const { return vertical_scale_; }
  double body_radius() const { return body_radius_; }
  int face_id() const { return face_id_; }
  const FaceWindow& window() const { return window_; }

  /// Vertical scale in body radii per unit h.
  double relief() const { return vertical_scale_ / body_radius_; }

  /// Metadata that reproduces this field on save/load.
  HeightFieldMeta meta() const;

  /// Field texture coordinate of an object-space point (face-local frame).
  TexCoord local_tex(const ObjPoint& p) const { return window_.to_local(obj_to_tex(p)); }
  /// Height of a point above the body sphere in units of h.
  double height_of(const ObjPoint& p) const { return (length(p) - 1.0) / relief(); }
  /// Object-space point on the radial through a field coordinate at height h.
  ObjPoint surface_point(TexCoord local, double h) const {
    return tex_to_obj(window_.to_face(local), h, relief());
  }
  bool contains(TexCoord local) const {
    return local.u >= 0.0 && local.u <= 1.0 && local.v >= 0.0 && local.v <= 1.0;
  }

 private:
  int size_ = 0;
  std::vector<float> values_;
  double horizontal_scale_ = 1.0;
  double vertical_scale_ = 1.0;
  double body_radius_ = kDefaultBodyRadius;
  int face_id_ = 4;
  FaceWindow window_;
};

/// Window a field of the given size occupies on its face, derived from the
/// texel footprint at face center.
FaceWindow window_for(const HeightFieldMeta& meta, int size);

bool is_power_of_two(int n);

/// Loads a 16-bit binary PGM (P5, maxval 65535) or a raw little-endian
/// float32 grid. Raw input takes its dimensions from `meta`; PGM input must
/// agree with them when they are non-zero.
HeightField load_heightfield(const std::filesystem::path& path, const HeightFieldMeta& meta);

/// Convenience overload reading `<path>.json` as the sidecar record.
HeightField load_heightfield(const std::filesystem::path& path);

/// Parses an in-memory PGM buffer.
HeightField parse_pgm(std::span<const std::uint8_t> bytes, const HeightFieldMeta& meta);

void save_pgm(const std::filesystem::path& path, const HeightField& hf);
void save_raw(const std::filesystem::path& path, const HeightField& hf);

/// Writes an arbitrary grid of [0, 1] values as a 16-bit PGM.
void save_pgm16(const std::filesystem::path& path, int width, int height, std::span<const float> values);

/// Point returns the containing texel, bilinear blends the four nearest texel
/// centers. Both clamp at the edges.
double sample_height(const HeightField& hf, TexCoord t, Filter filter);

struct TilePlacement {
  HeightField tile;
  int grid_x = 0;  ///< tile column in the tile grid
  int grid_y = 0;  ///< tile row in the tile grid
};

/// Rectangle in texels of the tile grid.
struct TexelRect {
  int x0 = 0;
  int y0 = 0;
  int width = 0;
  int height = 0;
};

struct StitchResult {
  HeightField field;
  /// Maps stitched-field coordinates into tile-grid coordinates measured
  /// in tiles: grid = offset + local * scale.
  TexCoord grid_offset;
  double grid_scale = 1.0;
};

/// Copies the region of interest out of a grid of equally sized tiles. Every
/// output texel is exactly one source texel.
StitchResult stitch_tiles(std::span<const TilePlacement> tiles, TexelRect roi);

/// Resamples a field to another power-of-two size over the same face window.
HeightField resample(const HeightField& hf, int size);

}  // namespace terrashadow
