#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "terrashadow/heightfield.hpp"
#include "terrashadow/render.hpp"

namespace terrashadow {

/// Raised plateau strip along v with steep walls, centered on u = center.
std::vector<float> step_ridge(int n, double center = 0.5, double half_width = 0.08, double base = 0.1,
                              double top = 0.9, double wall_texels = 2.0);

/// Bowl with a raised rim at radius `radius` (field texture units) around
/// (cu, cv) on a plain of height `plain`.
std::vector<float> crater_bowl(int n, double cu = 0.5, double cv = 0.5, double radius = 0.3, double floor = 0.05,
                               double rim = 0.95, double plain = 0.3);

/// Value-noise fractal (fBm) normalized to span [0, 1].
std::vector<float> fractal_terrain(int n, std::uint64_t seed, int octaves = 7, double persistence = 0.55,
                                   int base_cells = 4);

/// One-dimensional fractal profile of n samples normalized to [0, 1].
std::vector<float> fractal_profile(int n, std::uint64_t seed, int octaves = 8, double persistence = 0.6,
                                   int base_cells = 2);

/// Field whose rows all repeat the given profile.
std::vector<float> extrude_rows(const std::vector<float>& profile);

/// Geometry knobs shared by the synthetic scenes.
struct SynthOptions {
  int size = 0;               ///< height field texels per side; scene default when 0
  int image = 512;            ///< image pixels per side
  double slope_ratio = 32.0;  ///< N * horizontal_scale / vertical_scale
  double body_radius = 1737.4e3;
  double horizontal_scale = 30.0;  ///< meters per texel for local scenes
  double sun_elevation = 0.0;      ///< radians above the local horizon; scene default when 0
  double sun_azimuth = 0.0;        ///< radians from +u toward +v
  double angular_radius = 0.015;
  std::uint64_t seed = 7;
};

/// Names accepted by make_scene: ridge, crater, fractal.
std::vector<std::string> synth_scene_names();

/// Step ridge on a 512^2 window at face center, sun low across the ridge.
Scene make_ridge_scene(const SynthOptions& opt = {});
/// Crater bowl on a 1024^2 field filling a whole face; the camera looks
/// toward the limb.
Scene make_crater_scene(const SynthOptions& opt = {});
/// Fractal terrain on a 512^2 window at face center.
Scene make_fractal_scene(const SynthOptions& opt = {});

Scene make_scene(const std::string& name, const SynthOptions& opt = {});

/// Light direction at the given elevation and azimuth above the tangent
/// plane at face-local point p (world frame of face `face_id`).
Vec3 sun_direction(int face_id, const ObjPoint& p, double elevation, double azimuth);

}  // namespace terrashadow
