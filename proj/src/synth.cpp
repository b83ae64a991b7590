#include "terrashadow/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace terrashadow {

namespace {

double smoothstep(double e0, double e1, double x) {
  const double t = std::clamp((x - e0) / (e1 - e0), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

void normalize_range(std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double a = *lo, span = *hi - *lo;
  for (double& x : v) x = span > 0.0 ? (x - a) / span : 0.0;
}

std::vector<float> to_float(const std::vector<double>& v) {
  std::vector<float> out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = static_cast<float>(std::clamp(v[k], 0.0, 1.0));
  return out;
}

int size_or(const SynthOptions& opt, int fallback) { return opt.size > 0 ? opt.size : fallback; }

HeightFieldMeta local_meta(const SynthOptions& opt, int n) {
  HeightFieldMeta m;
  m.width = m.height = n;
  m.horizontal_scale = opt.horizontal_scale;
  m.vertical_scale = n * opt.horizontal_scale / opt.slope_ratio;
  m.body_radius = opt.body_radius;
  m.face_id = 4;
  return m;
}

// Camera above the window center tilted `tilt` radians from the vertical,
// framing `cover` of the window half-width.
Camera window_camera(const HeightField& hf, const SynthOptions& opt, double tilt, double cover) {
  const double half = hf.window().scale;  // face-plane half-width in body radii
  const double top = 1.0 + hf.relief();
  const double dist = 2.5 * half;
  Camera c;
  c.look_at = {0.0, 0.0, 1.0 + 0.5 * hf.relief()};
  c.position = {0.0, -dist * std::sin(tilt), top + dist * std::cos(tilt)};
  c.up = {0.0, 1.0, 0.0};
  c.vfov = 2.0 * std::atan(cover * half * std::cos(tilt) / dist);
  c.width = c.height = opt.image;
  return c;
}

double elevation_or(const SynthOptions& opt, double fallback) {
  return opt.sun_elevation > 0.0 ? opt.sun_elevation : fallback;
}

}  // namespace

std::vector<float> step_ridge(int n, double center, double half_width, double base, double top, double wall_texels) {
  std::vector<double> v(static_cast<std::size_t>(n) * n);
  const double wall = wall_texels / n;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double d = std::abs((i + 0.5) / n - center);
      const double w = 1.0 - smoothstep(half_width - wall, half_width, d);
      v[static_cast<std::size_t>(j) * n + i] = base + (top - base) * w;
    }
  }
  return to_float(v);
}

std::vector<float> crater_bowl(int n, double cu, double cv, double radius, double floor, double rim, double plain) {
  std::vector<double> v(static_cast<std::size_t>(n) * n);
  const double wall = 0.25 * radius;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double r = std::hypot((i + 0.5) / n - cu, (j + 0.5) / n - cv);
      double h;
      if (r <= radius) {
        h = floor + (rim - floor) * smoothstep(radius - wall, radius, r);
      } else {
        const double x = (r - radius) / (0.6 * wall);
        h = plain + (rim - plain) * std::exp(-x * x);
      }
      v[static_cast<std::size_t>(j) * n + i] = h;
    }
  }
  return to_float(v);
}

std::vector<float> fractal_terrain(int n, std::uint64_t seed, int octaves, double persistence, int base_cells) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(n) * n, 0.0);
  double amp = 1.0;
  for (int o = 0, cells = base_cells; o < octaves; ++o, cells *= 2, amp *= persistence) {
    const int g = cells + 1;
    std::vector<double> lattice(static_cast<std::size_t>(g) * g);
    for (double& x : lattice) x = uni(rng);
    for (int j = 0; j < n; ++j) {
      const double y = (j + 0.5) / n * cells;
      const int y0 = std::min(static_cast<int>(y), cells - 1);
      const double fy = smoothstep(0.0, 1.0, y - y0);
      for (int i = 0; i < n; ++i) {
        const double x = (i + 0.5) / n * cells;
        const int x0 = std::min(static_cast<int>(x), cells - 1);
        const double fx = smoothstep(0.0, 1.0, x - x0);
        auto at = [&](int a, int b) { return lattice[static_cast<std::size_t>(b) * g + a]; };
        const double top = at(x0, y0) * (1 - fx) + at(x0 + 1, y0) * fx;
        const double bot = at(x0, y0 + 1) * (1 - fx) + at(x0 + 1, y0 + 1) * fx;
        v[static_cast<std::size_t>(j) * n + i] += amp * (top * (1 - fy) + bot * fy);
      }
    }
  }
  normalize_range(v);
  return to_float(v);
}

std::vector<float> fractal_profile(int n, std::uint64_t seed, int octaves, double persistence, int base_cells) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(n), 0.0);
  double amp = 1.0;
  for (int o = 0, cells = base_cells; o < octaves; ++o, cells *= 2, amp *= persistence) {
    std::vector<double> lattice(static_cast<std::size_t>(cells) + 1);
    for (double& x : lattice) x = uni(rng);
    for (int i = 0; i < n; ++i) {
      const double x = (i + 0.5) / n * cells;
      const int x0 = std::min(static_cast<int>(x), cells - 1);
      const double fx = smoothstep(0.0, 1.0, x - x0);
      v[static_cast<std::size_t>(i)] += amp * (lattice[x0] * (1 - fx) + lattice[x0 + 1] * fx);
    }
  }
  normalize_range(v);
  return to_float(v);
}

std::vector<float> extrude_rows(const std::vector<float>& profile) {
  const std::size_t n = profile.size();
  std::vector<float> out(n * n);
  for (std::size_t j = 0; j < n; ++j) std::copy(profile.begin(), profile.end(), out.begin() + j * n);
  return out;
}

Vec3 sun_direction(int face_id, const ObjPoint& p, double elevation, double azimuth) {
  const Vec3 up = normalize(p);
  const Vec3 east = normalize(Vec3{1, 0, 0} - up * up.x);
  const Vec3 north = cross(up, east);
  const Vec3 local = (east * std::cos(azimuth) + north * std::sin(azimuth)) * std::cos(elevation) +
                     up * std::sin(elevation);
  return face_frame(face_id).to_world(normalize(local));
}

std::vector<std::string> synth_scene_names() { return {"ridge", "crater", "fractal"}; }

Scene make_ridge_scene(const SynthOptions& opt) {
  Scene s;
  const int n = size_or(opt, 512);
  s.fields[4].emplace(n, step_ridge(n), local_meta(opt, n));
  const HeightField& hf = *s.fields[4];
  s.light = {sun_direction(4, {0, 0, 1}, elevation_or(opt, 0.47), opt.sun_azimuth), opt.angular_radius};
  s.camera = window_camera(hf, opt, 0.35, 0.6);
  s.seed = opt.seed;
  return s;
}

Scene make_crater_scene(const SynthOptions& opt) {
  Scene s;
  const int n = size_or(opt, 1024);
  HeightFieldMeta meta;
  meta.width = meta.height = n;
  meta.body_radius = opt.body_radius;
  meta.horizontal_scale = 2.0 * opt.body_radius / n;
  meta.vertical_scale = n * meta.horizontal_scale / opt.slope_ratio;
  meta.face_id = 4;
  meta.face_offset = TexCoord{0.0, 0.0};
  s.fields[4].emplace(n, crater_bowl(n, 0.5, 0.38, 0.16, 0.35, 0.9, 0.55), meta);

  const ObjPoint crater{0.0, -0.24, 1.0};
  s.light = {sun_direction(4, crater, elevation_or(opt, 0.44), opt.sun_azimuth), opt.angular_radius};

  // Tilted orbit view: the far limb crosses the face beyond the crater.
  const double tilt = 0.62, dist = 1.9;
  Camera& c = s.camera;
  c.position = Vec3{0.0, -std::sin(tilt), std::cos(tilt)} * dist;
  c.look_at = normalize(Vec3{0.0, 0.12, 1.0});
  c.up = {0.0, 0.0, 1.0};
  c.vfov = 0.62;
  c.width = c.height = opt.image;
  s.seed = opt.seed;
  return s;
}

Scene make_fractal_scene(const SynthOptions& opt) {
  Scene s;
  const int n = size_or(opt, 512);
  s.fields[4].emplace(n, fractal_terrain(n, opt.seed), local_meta(opt, n));
  const HeightField& hf = *s.fields[4];
  s.light = {sun_direction(4, {0, 0, 1}, elevation_or(opt, 0.175), opt.sun_azimuth + 0.6), opt.angular_radius};
  s.camera = window_camera(hf, opt, 0.35, 0.6);
  s.seed = opt.seed;
  return s;
}

Scene make_scene(const std::string& name, const SynthOptions& opt) {
  if (name == "ridge") return make_ridge_scene(opt);
  if (name == "crater") return make_crater_scene(opt);
  if (name == "fractal") return make_fractal_scene(opt);
  throw std::invalid_argument("unknown synthetic scene: " + name);
}

}  // namespace terrashadow
