#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "terrashadow/geometry.hpp"
#include "terrashadow/heightfield.hpp"
#include "terrashadow/maxmip.hpp"

namespace terrashadow {

/// Deterministic stratified sampler over the solid angle of a light disc.
struct LightDiscSampler {
  Vec3 direction;  ///< unit vector toward the disc center
  double angular_radius = 0.0;
  int samples = 64;
  std::uint64_t seed = 1;

  /// Unit directions inside the disc cone. Stable for a fixed seed.
  std::vector<Vec3> directions() const;
  /// Matching points on the unit disc, before mapping to directions.
  std::vector<Vec2> disc_points() const;
};

/// True when a ray leaving p along dir hits the bilinear terrain before it
/// climbs above `max_h` or leaves the field. Marches at half a base texel.
bool ray_occluded(const ObjPoint& p, Vec3 dir, const HeightField& hf, double max_h);

/// Occluded fraction of the light disc by brute-force ray casting.
double distributed_reference(const ObjPoint& p, std::span<const Vec3> directions, const HeightField& hf,
                             double max_h);
double distributed_reference(const ObjPoint& p, const LightDiscSampler& sampler, const HeightField& hf);

struct UniformStepConfig {
  int steps = 100;
  double dt = 0.0006;  ///< step in field texture units
};

struct UniformStepResult {
  double s = 0.0;
  double J = 1.0;  ///< min dh / t over the march, h per texture unit
  int samples = 0;
};

/// Constant-step march tracking the minimum dh/t, mapped through the same
/// disc occlusion as the DP trace.
UniformStepResult uniform_step_shadow(const ObjPoint& p, Vec3 L_hat, const HeightField& hf,
                                      const UniformStepConfig& cfg, double r_L, double n_dot_nL);

struct BruteForceResult {
  double min_dh = 1.0;  ///< H - h at the best texel center
  double tau = 0.0;     ///< ray parameter (object units) of the minimum
  double t = 0.0;       ///< the same, normalized to the searched range
  TexelIndex texel{};
  int texels = 0;       ///< texels evaluated
};

/// Exhaustive minimum of H - h over every base texel the ray crosses between
/// ray parameters tau0 and tau1, each texel evaluated at the ray point
/// closest to its center. `resolution` points locate the crossed texels.
BruteForceResult brute_force_min(const ObjPoint& p, Vec3 L_hat, const HeightField& hf, int resolution, double tau0,
                                 double tau1);

/// Every texel of a grid_size^2 grid whose closed square shares at least one
/// point with segment ab, found by testing each texel in the bounding box.
/// Sorted by (i, j).
std::vector<TexelIndex> conservative_raster(TexCoord a, TexCoord b, int grid_size);

}  // namespace terrashadow
