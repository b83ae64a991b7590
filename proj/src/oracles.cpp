#include "terrashadow/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "terrashadow/shadow.hpp"

namespace terrashadow {

namespace {

double radical_inverse(unsigned k) {
  double inv = 0.5, x = 0.0;
  while (k != 0) {
    if (k & 1u) x += inv;
    inv *= 0.5;
    k >>= 1;
  }
  return x;
}

// Shirley-Chiu concentric map from the unit square onto the unit disc.
Vec2 concentric(double x, double y) {
  const double a = 2.0 * x - 1.0, b = 2.0 * y - 1.0;
  if (a == 0.0 && b == 0.0) return {0.0, 0.0};
  double r, phi;
  if (std::abs(a) > std::abs(b)) {
    r = a;
    phi = std::numbers::pi / 4.0 * (b / a);
  } else {
    r = b;
    phi = std::numbers::pi / 2.0 - std::numbers::pi / 4.0 * (a / b);
  }
  return {r * std::cos(phi), r * std::sin(phi)};
}

void tangent_frame(Vec3 n, Vec3& e1, Vec3& e2) {
  const Vec3 helper = std::abs(n.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  e1 = normalize(cross(helper, n));
  e2 = cross(n, e1);
}

// Ray parameter whose central projection hits the face-plane point q.
double param_through(const ObjPoint& p, Vec3 dir, Vec2 q) {
  const double ax = dir.x - q.x * dir.z, ay = dir.y - q.y * dir.z;
  if (std::abs(ax) >= std::abs(ay)) return (q.x * p.z - p.x) / ax;
  return (q.y * p.z - p.y) / ay;
}

Vec2 plane_point(const HeightField& hf, double u, double v) {
  const TexCoord f = hf.window().to_face({u, v});
  return {2.0 * f.u - 1.0, 2.0 * f.v - 1.0};
}

double texel_object_length(const HeightField& hf) { return 2.0 * hf.window().scale / hf.size(); }

}  // namespace

std::vector<Vec2> LightDiscSampler::disc_points() const {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double shift_x = uni(rng), shift_y = uni(rng);
  std::vector<Vec2> pts;
  pts.reserve(static_cast<std::size_t>(samples));
  for (int k = 0; k < samples; ++k) {
    const double x = std::fmod((k + 0.5) / samples + shift_x, 1.0);
    const double y = std::fmod(radical_inverse(static_cast<unsigned>(k)) + shift_y, 1.0);
    pts.push_back(concentric(x, y));
  }
  return pts;
}

std::vector<Vec3> LightDiscSampler::directions() const {
  Vec3 e1, e2;
  tangent_frame(direction, e1, e2);
  const double spread = std::tan(angular_radius);
  std::vector<Vec3> dirs;
  for (const Vec2 d : disc_points()) dirs.push_back(normalize(direction + (e1 * d.x + e2 * d.y) * spread));
  return dirs;
}

bool ray_occluded(const ObjPoint& p, Vec3 dir, const HeightField& hf, double max_h) {
  const auto start = first_interval_start(p, dir, hf);
  if (!start) return false;
  const double step = 0.5 * texel_object_length(hf);
  const int max_steps = 16 * hf.size();
  double tau = *start;
  for (int k = 0; k < max_steps; ++k, tau += step) {
    const ObjPoint tip = p + dir * tau;
    if (!(tip.z > 0.0)) return false;
    const double H = hf.height_of(tip);
    if (H > max_h) return false;
    const TexCoord t = hf.local_tex(tip);
    if (!hf.contains(t)) return false;
    if (H < sample_height(hf, t, Filter::bilinear)) return true;
  }
  return false;
}

double distributed_reference(const ObjPoint& p, std::span<const Vec3> directions, const HeightField& hf,
                             double max_h) {
  if (directions.empty()) return 0.0;
  int hits = 0;
  for (const Vec3& d : directions) hits += ray_occluded(p, d, hf, max_h) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(directions.size());
}

double distributed_reference(const ObjPoint& p, const LightDiscSampler& sampler, const HeightField& hf) {
  const double max_h = *std::max_element(hf.values().begin(), hf.values().end());
  const auto dirs = sampler.directions();
  return distributed_reference(p, dirs, hf, max_h);
}

UniformStepResult uniform_step_shadow(const ObjPoint& p, Vec3 L_hat, const HeightField& hf,
                                      const UniformStepConfig& cfg, double r_L, double n_dot_nL) {
  UniformStepResult out;
  const double scale = hf.window().scale;
  for (int i = 1; i <= cfg.steps; ++i) {
    const double dist = i * cfg.dt;
    const auto tau = compute_T(p, L_hat, dist * scale);
    if (!tau) break;
    const ObjPoint tip = p + L_hat * *tau;
    if (!(tip.z > 0.0)) break;
    const TexCoord t = hf.local_tex(tip);
    if (!hf.contains(t)) break;
    ++out.samples;
    const double dh = hf.height_of(tip) - sample_height(hf, t, Filter::bilinear);
    out.J = std::min(out.J, dh / dist);
  }
  out.s = occlusion_fraction({out.J, r_L, n_dot_nL}).s;
  return out;
}

BruteForceResult brute_force_min(const ObjPoint& p, Vec3 L_hat, const HeightField& hf, int resolution, double tau0,
                                 double tau1) {
  const int n = hf.size();
  const TexCoord a = hf.local_tex(p + L_hat * tau0);
  const TexCoord b = hf.local_tex(p + L_hat * tau1);
  const double du = b.u - a.u, dv = b.v - a.v;

  std::set<std::pair<int, int>> texels;
  for (int k = 0; k <= resolution; ++k) {
    const double s = static_cast<double>(k) / resolution;
    const double u = a.u + du * s, v = a.v + dv * s;
    const int i = static_cast<int>(std::floor(u * n)), j = static_cast<int>(std::floor(v * n));
    if (i >= 0 && j >= 0 && i < n && j < n) texels.insert({i, j});
  }

  BruteForceResult best;
  best.min_dh = std::numeric_limits<double>::infinity();
  const double len2 = du * du + dv * dv;
  for (const auto& [i, j] : texels) {
    // Portion of the projected segment inside the texel.
    double s_lo = 0.0, s_hi = 1.0;
    const double lo[2] = {static_cast<double>(i) / n, static_cast<double>(j) / n};
    const double org[2] = {a.u, a.v}, dir[2] = {du, dv};
    for (int ax = 0; ax < 2; ++ax) {
      if (dir[ax] == 0.0) continue;
      double e0 = (lo[ax] - org[ax]) / dir[ax], e1 = (lo[ax] + 1.0 / n - org[ax]) / dir[ax];
      if (e0 > e1) std::swap(e0, e1);
      s_lo = std::max(s_lo, e0);
      s_hi = std::min(s_hi, e1);
    }
    double s = 0.0;
    if (len2 > 0.0) {
      const double cu = (i + 0.5) / n, cv = (j + 0.5) / n;
      s = std::clamp(((cu - a.u) * du + (cv - a.v) * dv) / len2, s_lo, s_hi);
    }
    const double tau = len2 > 0.0 ? param_through(p, L_hat, plane_point(hf, a.u + du * s, a.v + dv * s)) : tau0;
    const double dh = hf.height_of(p + L_hat * tau) - hf.at(i, j);
    ++best.texels;
    if (dh < best.min_dh) {
      best.min_dh = dh;
      best.tau = tau;
      best.texel = {i, j};
    }
  }
  best.t = tau1 > tau0 ? (best.tau - tau0) / (tau1 - tau0) : 0.0;
  return best;
}

namespace {

// Separating-axis test between a segment and a closed axis-aligned box.
bool segment_touches_box(Vec2 a, Vec2 b, Vec2 lo, Vec2 hi) {
  if (std::max(a.x, b.x) < lo.x || std::min(a.x, b.x) > hi.x) return false;
  if (std::max(a.y, b.y) < lo.y || std::min(a.y, b.y) > hi.y) return false;
  const Vec2 d = b - a;
  if (d.x == 0.0 && d.y == 0.0) return true;
  const Vec2 n{-d.y, d.x};
  const double c[4] = {dot(n, lo - a), dot(n, Vec2{hi.x, lo.y} - a), dot(n, hi - a), dot(n, Vec2{lo.x, hi.y} - a)};
  const double mn = std::min({c[0], c[1], c[2], c[3]});
  const double mx = std::max({c[0], c[1], c[2], c[3]});
  return mn <= 0.0 && mx >= 0.0;
}

}  // namespace

std::vector<TexelIndex> conservative_raster(TexCoord a, TexCoord b, int grid_size) {
  const Vec2 pa{a.u * grid_size, a.v * grid_size}, pb{b.u * grid_size, b.v * grid_size};
  const int i0 = static_cast<int>(std::floor(std::min(pa.x, pb.x))) - 1;
  const int i1 = static_cast<int>(std::floor(std::max(pa.x, pb.x))) + 1;
  const int j0 = static_cast<int>(std::floor(std::min(pa.y, pb.y))) - 1;
  const int j1 = static_cast<int>(std::floor(std::max(pa.y, pb.y))) + 1;
  std::vector<TexelIndex> out;
  for (int i = i0; i <= i1; ++i) {
    for (int j = j0; j <= j1; ++j) {
      const Vec2 lo{static_cast<double>(i), static_cast<double>(j)};
      if (segment_touches_box(pa, pb, lo, lo + Vec2{1.0, 1.0})) out.push_back({i, j});
    }
  }
  return out;
}

}  // namespace terrashadow
