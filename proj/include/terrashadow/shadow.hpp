#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "terrashadow/geometry.hpp"
#include "terrashadow/heightfield.hpp"
#include "terrashadow/maxmip.hpp"

namespace terrashadow {

/// Immutable terrain inputs shared by every shadow query.
struct TerrainView {
  const HeightField& field;
  const MaxMipPyramid& pyramid;
};

/// How each level of the trace picks the texels it samples.
enum class TraversalMode {
  /// Three point samples per level at half-texel spacing, refinement at
  /// t* + 2^-k, exactly as the reference listing does it.
  literal,
  /// Every texel under the footprint of the current window is visited and
  /// the next level descends into the winning texel's children.
  conservative,
};

struct TraceConfig {
  /// Levels traced per concatenated interval; interval j starts at mip
  /// level schedule[j] - 1.
  std::vector<int> schedule{5, 5, 5};
  TraversalMode mode = TraversalMode::conservative;

  /// Throws std::invalid_argument unless every entry is in [1, log2 N].
  void validate(int base_size) const;
  int max_samples() const;
};

/// Shadow ray interval: tip(t) = p + L_hat * (start + t * T), t in [0, 1].
struct ShadowRay {
  ObjPoint p;
  Vec3 L_hat;
  double start = 0.0;  ///< offset of the interval origin along L_hat
  double T = 0.0;      ///< ray length covering one top-level texel
  ObjPoint origin() const { return p + L_hat * start; }
  ObjPoint tip(double t) const { return p + L_hat * (start + t * T); }
};

/// Evolving state of one interval trace.
struct ShadowTraceState {
  int k = 0;                     ///< completed levels
  int m = 0;                     ///< mip level of the next step
  double t = 1.0;                ///< first sample parameter of the next step
  double H = 0.0;                ///< ray tip height at t_star, units of h
  double delta_maxh_star = 1.0;  ///< best H - max h of the last level
  double t_star = -1.0;          ///< argmin parameter, -1 before any hit
  double J_star = 1.0;           ///< slope cost, h per field texture unit
  int samples = 0;               ///< pyramid reads
  bool face_edge = false;        ///< some sample fell off the field
};

/// Outcome of a full (multi-interval) shadow trace.
struct ShadowResult {
  double J_star = 1.0;
  double t_star = -1.0;          ///< parameter within the winning interval
  double delta_maxh_star = 1.0;  ///< of the winning interval
  double distance = 0.0;         ///< texture distance from p to the winning tip
  int interval = -1;             ///< winning interval, -1 when unshadowed
  int intervals_traced = 0;
  int samples = 0;
  bool face_edge = false;
  bool no_footprint = false;
};

/// Length of the ray starting at R along L_hat whose tip lands delta_M face
/// texture units downrange of R's projection. Returns nullopt when the ray
/// has no horizontal footprint (radial, or parallel to its target line).
std::optional<double> compute_T(const ObjPoint& R, Vec3 L_hat, double delta_M);

/// Ray parameter (along L_hat from R) whose tip projects onto the given face
/// coordinate, assuming the coordinate lies on the ray's projected line.
double ray_param_at_face_tex(const ObjPoint& R, Vec3 L_hat, TexCoord face_uv);

/// Texels of level m (on a grid of `grid_size` texels per side) touched by
/// the segment that starts at `start` and runs half a texel along `dir`,
/// including a texel the segment only reaches with its end point. Returns
/// 1..3 texels in traversal order; a zero direction yields the start texel
/// only.
std::vector<TexelIndex> dda_candidates(TexCoord start, Vec2 dir, int grid_size);

/// Texels crossed by an arbitrary segment, in traversal order. A texel the
/// segment enters exactly at b is kept only when `touch_end` is set.
std::vector<TexelIndex> segment_texels(TexCoord a, TexCoord b, int grid_size, bool touch_end = false);

/// Traces one interval with `n_prime` levels starting at mip n_prime - 1.
ShadowTraceState trace_shadow_interval(const ShadowRay& ray, TerrainView terrain, int n_prime,
                                       TraversalMode mode, ShadowTraceState state = {});

/// Concatenated intervals per the config schedule. The first interval
/// starts one base texel downrange of p.
ShadowResult trace_shadow(const ObjPoint& p, Vec3 L_hat, TerrainView terrain, const TraceConfig& cfg);

/// Object-space offset at which the first interval starts.
std::optional<double> first_interval_start(const ObjPoint& p, Vec3 L_hat, const HeightField& hf);

struct OcclusionInput {
  double J_star = 1.0;
  double r_L = 0.0;       ///< apparent light radius in the slope units of J*
  double n_dot_nL = 1.0;  ///< N . N_L, in [0, 1]
};

struct OcclusionResult {
  double s = 0.0;        ///< occluded fraction of the disc
  double d = 0.0;        ///< clamped signed chord distance, disc radii
  double segment = 0.0;  ///< circular-segment branch
  double linear = 0.0;   ///< 1 - J* branch
};

/// Area of the unit disc on the occluded side of a chord at signed distance
/// d from the center, as a fraction of the disc.
double segment_fraction(double d);

/// Fraction of the light disc hidden by terrain for a slope cost J*.
/// Throws std::invalid_argument when r_L <= 0.
OcclusionResult occlusion_fraction(const OcclusionInput& in);

/// Directional light with an angular radius in radians.
struct Light {
  Vec3 direction;  ///< unit vector toward the light center, world frame
  double angular_radius = 0.0;
};

/// Apparent light radius expressed as a slope in h per field texture unit.
double light_radius_slope(const Light& light, const HeightField& hf);

/// N . N_L with N_L the component of N perpendicular to L, normalized.
double normal_factor(Vec3 N_hat, Vec3 L_hat);

struct ShadowSample {
  double s = 0.0;
  ShadowResult trace;
  OcclusionResult occlusion;
};

/// Per-point soft shadow: DP trace followed by disc occlusion. p, N_hat and
/// L_hat are in the field's face-local frame.
ShadowSample shadow_term(const ObjPoint& p, Vec3 N_hat, Vec3 L_hat, TerrainView terrain, const TraceConfig& cfg,
                         double r_L);

}  // namespace terrashadow
