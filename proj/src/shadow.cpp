#include "terrashadow/shadow.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace terrashadow {

namespace {

// Squared cross-product magnitude below which the two lines of compute_T are
// treated as parallel, in body-radius units.
constexpr double kDegenerate = 1e-18;

struct Clip {
  double s0;
  double s1;
  bool hit;
};

// Liang-Barsky clip of X(s) = a + s*d, s in [0, 1], against a closed box.
Clip clip_segment(Vec2 a, Vec2 d, Vec2 lo, Vec2 hi) {
  double s0 = 0.0, s1 = 1.0;
  const double p[4] = {-d.x, d.x, -d.y, d.y};
  const double q[4] = {a.x - lo.x, hi.x - a.x, a.y - lo.y, hi.y - a.y};
  for (int e = 0; e < 4; ++e) {
    if (p[e] == 0.0) {
      if (q[e] < 0.0) return {0.0, 0.0, false};
      continue;
    }
    const double r = q[e] / p[e];
    if (p[e] < 0.0) {
      s0 = std::max(s0, r);
    } else {
      s1 = std::min(s1, r);
    }
  }
  return {s0, s1, s0 <= s1};
}

bool outside(const HeightField& hf, TexCoord t) { return !hf.contains(t); }

bool in_front(const ObjPoint& p) { return p.z > 1e-9; }

// Texture distance from the surface point to the tip at t.
double tip_distance(const ShadowRay& ray, const HeightField& hf, double t) {
  const TexCoord a = hf.local_tex(ray.p);
  const TexCoord b = hf.local_tex(ray.tip(t));
  return std::hypot(b.u - a.u, b.v - a.v);
}

double slope_cost(double delta, double distance) {
  if (distance <= 0.0) return delta <= 0.0 ? -std::numeric_limits<double>::infinity() : 1.0;
  return std::min(delta / distance, 1.0);
}

ShadowTraceState trace_literal(const ShadowRay& ray, TerrainView terrain, int n_prime, ShadowTraceState st) {
  const HeightField& hf = terrain.field;
  for (; st.k < n_prime; ++st.k, --st.m) {
    const double half = std::ldexp(1.0, -st.k - 1);
    double best = 1.0;
    double best_t = -1.0;
    double best_H = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double t = st.t - i * half;
      const ObjPoint tip = ray.tip(t);
      if (!in_front(tip)) {
        st.face_edge = true;
        continue;
      }
      const TexCoord tex = hf.local_tex(tip);
      if (outside(hf, tex)) {
        st.face_edge = true;
        continue;
      }
      const double H = hf.height_of(tip);
      const double delta = H - terrain.pyramid.sample_max(tex, st.m);
      ++st.samples;
      if (delta < best) {
        best = delta;
        best_t = t;
        best_H = H;
      }
    }
    st.delta_maxh_star = best;
    st.t_star = best_t;
    st.H = best_H;
    if (best_t > -1.0) st.t = std::min(best_t + std::ldexp(1.0, -(st.k + 1)), 1.0);
  }
  return st;
}

struct Candidate {
  TexelIndex texel;
  double t_center;
  double t_enter;
  double t_exit;
};

ShadowTraceState trace_conservative(const ShadowRay& ray, TerrainView terrain, int n_prime, ShadowTraceState st) {
  const HeightField& hf = terrain.field;
  const MaxMipPyramid& pyr = terrain.pyramid;
  const ObjPoint origin = ray.origin();

  // Window [a, b] of the current level; starts as the whole interval.
  double a = 0.0, b = 1.0;
  bool has_parent = false;
  TexelIndex parent{};

  auto param_at = [&](Vec2 x) {
    return ray_param_at_face_tex(origin, ray.L_hat, hf.window().to_face({x.x, x.y})) / ray.T;
  };

  for (; st.k < n_prime; ++st.k, --st.m) {
    const ObjPoint tip_a = ray.tip(a), tip_b = ray.tip(b);
    if (!in_front(tip_a) || !in_front(tip_b)) {
      st.face_edge = true;
      break;
    }
    const TexCoord ta = hf.local_tex(tip_a), tb = hf.local_tex(tip_b);
    const Vec2 xa{ta.u, ta.v};
    const Vec2 d = Vec2{tb.u, tb.v} - xa;
    const int n = pyr.size(st.m);
    const double cell = 1.0 / n;

    std::vector<Candidate> cands;
    for (const TexelIndex c : segment_texels(ta, tb, n)) {
      if (has_parent && (c.i >> 1 != parent.i || c.j >> 1 != parent.j)) continue;
      if (c.i < 0 || c.j < 0 || c.i >= n || c.j >= n) {
        st.face_edge = true;
        continue;
      }
      const Vec2 lo{c.i * cell, c.j * cell};
      const Clip clip = clip_segment(xa, d, lo, lo + Vec2{cell, cell});
      if (!clip.hit) continue;
      const double dd = dot(d, d);
      double s_center = 0.0;
      if (dd > 0.0) {
        const Vec2 center = lo + Vec2{0.5 * cell, 0.5 * cell};
        s_center = std::clamp(dot(center - xa, d) / dd, clip.s0, clip.s1);
      }
      Candidate cand{c, a, a, a};
      if (dd > 0.0) {
        cand.t_center = std::clamp(param_at(xa + d * s_center), a, b);
        cand.t_enter = std::clamp(param_at(xa + d * clip.s0), a, b);
        cand.t_exit = std::clamp(param_at(xa + d * clip.s1), a, b);
      }
      cands.push_back(cand);
    }
    // Visit in order of decreasing t so ties keep the farther texel.
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Candidate& l, const Candidate& r) { return l.t_center > r.t_center; });

    double best = 1.0;
    const Candidate* winner = nullptr;
    double best_H = 0.0;
    for (const Candidate& c : cands) {
      const double H = hf.height_of(ray.tip(c.t_center));
      const double delta = H - pyr.at(st.m, c.texel);
      ++st.samples;
      if (delta < best) {
        best = delta;
        winner = &c;
        best_H = H;
      }
    }
    st.delta_maxh_star = best;
    st.t_star = winner ? winner->t_center : -1.0;
    st.H = best_H;
    if (winner == nullptr) break;
    st.t = winner->t_exit;
    a = winner->t_enter;
    b = winner->t_exit;
    parent = winner->texel;
    has_parent = true;
  }
  return st;
}

}  // namespace

void TraceConfig::validate(int base_size) const {
  if (schedule.empty()) throw std::invalid_argument("trace schedule is empty");
  const int log_n = std::bit_width(static_cast<unsigned>(base_size)) - 1;
  for (const int levels : schedule) {
    if (levels < 1 || levels > log_n) {
      throw std::invalid_argument("schedule entry " + std::to_string(levels) + " outside [1, log2 N = " +
                                  std::to_string(log_n) + "]");
    }
  }
}

int TraceConfig::max_samples() const {
  int total = 0;
  for (const int levels : schedule) total += 3 * levels;
  return total;
}

std::optional<double> compute_T(const ObjPoint& R, Vec3 L_hat, double delta_M) {
  if (!(R.z > 0.0)) return std::nullopt;
  // Direction in which R's projection on z = 1 moves as the ray advances.
  const Vec2 w{L_hat.x * R.z - R.x * L_hat.z, L_hat.y * R.z - R.y * L_hat.z};
  const double wl = length(w);
  if (!(wl > 1e-15)) return std::nullopt;
  const Vec3 plane = R / R.z;
  const Vec3 b = plane + Vec3{w.x / wl, w.y / wl, 0.0} * (2.0 * delta_M);
  const Vec3 a = L_hat;
  const Vec3 c = -R;
  const Vec3 axb = cross(a, b);
  const double denom = dot(axb, axb);
  if (denom < kDegenerate) return std::nullopt;
  const double T = dot(cross(c, b), axb) / denom;
  if (!(T > 0.0)) return std::nullopt;
  return T;
}

double ray_param_at_face_tex(const ObjPoint& R, Vec3 L_hat, TexCoord face_uv) {
  const Vec3 q{2.0 * face_uv.u - 1.0, 2.0 * face_uv.v - 1.0, 1.0};
  const Vec3 lxq = cross(L_hat, q);
  return dot(cross(-R, q), lxq) / dot(lxq, lxq);
}

std::vector<TexelIndex> segment_texels(TexCoord a, TexCoord b, int n, bool touch_end) {
  const double x0 = a.u * n, y0 = a.v * n;
  const double dx = (b.u - a.u) * n, dy = (b.v - a.v) * n;
  TexelIndex cur{static_cast<int>(std::floor(x0)), static_cast<int>(std::floor(y0))};
  std::vector<TexelIndex> out{cur};

  constexpr double inf = std::numeric_limits<double>::infinity();
  const int step_x = dx > 0 ? 1 : -1;
  const int step_y = dy > 0 ? 1 : -1;
  const double delta_x = dx != 0.0 ? std::abs(1.0 / dx) : inf;
  const double delta_y = dy != 0.0 ? std::abs(1.0 / dy) : inf;
  double next_x = dx == 0.0 ? inf : (dx > 0 ? (cur.i + 1 - x0) : (x0 - cur.i)) / std::abs(dx);
  double next_y = dy == 0.0 ? inf : (dy > 0 ? (cur.j + 1 - y0) : (y0 - cur.j)) / std::abs(dy);

  while (true) {
    const double s = std::min(next_x, next_y);
    if (touch_end ? !(s <= 1.0) : !(s < 1.0)) break;
    if (next_x == next_y) {
      cur.i += step_x;
      cur.j += step_y;
      next_x += delta_x;
      next_y += delta_y;
    } else if (next_x < next_y) {
      cur.i += step_x;
      next_x += delta_x;
    } else {
      cur.j += step_y;
      next_y += delta_y;
    }
    out.push_back(cur);
  }
  return out;
}

std::vector<TexelIndex> dda_candidates(TexCoord start, Vec2 dir, int grid_size) {
  const double len = length(dir);
  if (!(len > 0.0)) return segment_texels(start, start, grid_size);
  const Vec2 step = dir * (0.5 / (grid_size * len));
  return segment_texels(start, {start.u + step.x, start.v + step.y}, grid_size, true);
}

ShadowTraceState trace_shadow_interval(const ShadowRay& ray, TerrainView terrain, int n_prime, TraversalMode mode,
                                       ShadowTraceState state) {
  if (n_prime < 1 || n_prime > terrain.pyramid.level_count()) {
    throw std::invalid_argument("interval level count outside the pyramid");
  }
  if (state.k == 0) {
    state.m = n_prime - 1;
    state.t = 1.0;
  }
  state = mode == TraversalMode::literal ? trace_literal(ray, terrain, n_prime, state)
                                         : trace_conservative(ray, terrain, n_prime, state);
  if (state.t_star > -1.0 && state.delta_maxh_star < 1.0) {
    state.J_star = slope_cost(state.delta_maxh_star, tip_distance(ray, terrain.field, state.t_star));
  }
  return state;
}

std::optional<double> first_interval_start(const ObjPoint& p, Vec3 L_hat, const HeightField& hf) {
  return compute_T(p, L_hat, hf.window().scale / hf.size());
}

ShadowResult trace_shadow(const ObjPoint& p, Vec3 L_hat, TerrainView terrain, const TraceConfig& cfg) {
  const HeightField& hf = terrain.field;
  ShadowResult result;
  const auto start = first_interval_start(p, L_hat, hf);
  if (!start) {
    result.no_footprint = true;
    return result;
  }
  double tau = *start;
  for (std::size_t j = 0; j < cfg.schedule.size(); ++j) {
    const int n_prime = cfg.schedule[j];
    const ObjPoint R = p + L_hat * tau;
    if (!in_front(R) || outside(hf, hf.local_tex(R))) {
      result.face_edge = true;
      break;
    }
    const double dm = hf.window().scale * terrain.pyramid.delta_M(n_prime - 1);
    const auto T = compute_T(R, L_hat, dm);
    if (!T) {
      result.no_footprint = true;
      break;
    }
    const ShadowRay ray{p, L_hat, tau, *T};
    const ShadowTraceState st = trace_shadow_interval(ray, terrain, n_prime, cfg.mode);
    result.samples += st.samples;
    result.face_edge = result.face_edge || st.face_edge;
    ++result.intervals_traced;
    if (st.t_star > -1.0 && st.delta_maxh_star < 1.0 && st.J_star < result.J_star) {
      result.J_star = st.J_star;
      result.t_star = st.t_star;
      result.delta_maxh_star = st.delta_maxh_star;
      result.distance = tip_distance(ray, hf, st.t_star);
      result.interval = static_cast<int>(j);
    }
    tau += *T;
  }
  return result;
}

double segment_fraction(double d) {
  d = std::clamp(d, -1.0, 1.0);
  return (std::numbers::pi - std::acos(d) + d * std::sqrt(1.0 - d * d)) / std::numbers::pi;
}

OcclusionResult occlusion_fraction(const OcclusionInput& in) {
  if (!(in.r_L > 0.0)) throw std::invalid_argument("light radius must be positive");
  OcclusionResult r;
  r.linear = 1.0 - in.J_star;
  // Chord offset grows as the cost shrinks: d = +1 hides the whole disc.
  r.d = std::clamp(2.0 * (in.r_L - in.J_star * in.n_dot_nL) / in.r_L, -1.0, 1.0);
  r.segment = segment_fraction(r.d);
  if (in.J_star >= 1.0) {
    r.s = 0.0;
  } else if (in.J_star <= 0.0) {
    r.s = 1.0;
  } else {
    r.s = std::clamp(std::max(r.segment, r.linear), 0.0, 1.0);
  }
  return r;
}

double light_radius_slope(const Light& light, const HeightField& hf) {
  return std::tan(light.angular_radius) * (hf.horizontal_scale() * hf.size() / hf.vertical_scale());
}

double normal_factor(Vec3 N_hat, Vec3 L_hat) {
  const double c = std::clamp(dot(N_hat, L_hat), -1.0, 1.0);
  return std::sqrt(1.0 - c * c);
}

ShadowSample shadow_term(const ObjPoint& p, Vec3 N_hat, Vec3 L_hat, TerrainView terrain, const TraceConfig& cfg,
                         double r_L) {
  ShadowSample out;
  out.trace = trace_shadow(p, L_hat, terrain, cfg);
  out.occlusion = occlusion_fraction({out.trace.J_star, r_L, normal_factor(N_hat, L_hat)});
  out.s = out.occlusion.s;
  return out;
}

}  // namespace terrashadow
