#include "terrashadow/viewray.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "terrashadow/shadow.hpp"

namespace terrashadow {

namespace {

// Keeps rays off the face's vanishing line when projecting.
constexpr double kMinDepth = 1e-6;
constexpr double kBarySlack = 1e-9;

std::optional<double> ray_triangle(const Vec3& o, const Vec3& d, const Vec3& v0, const Vec3& v1, const Vec3& v2) {
  const Vec3 e1 = v1 - v0, e2 = v2 - v0;
  const Vec3 pv = cross(d, e2);
  const double det = dot(e1, pv);
  if (std::abs(det) < 1e-300) return std::nullopt;
  const double inv = 1.0 / det;
  const Vec3 tv = o - v0;
  const double u = dot(tv, pv) * inv;
  if (u < -kBarySlack || u > 1.0 + kBarySlack) return std::nullopt;
  const Vec3 qv = cross(tv, e1);
  const double v = dot(d, qv) * inv;
  if (v < -kBarySlack || u + v > 1.0 + kBarySlack) return std::nullopt;
  const double t = dot(e2, qv) * inv;
  if (t < 0.0) return std::nullopt;
  return t;
}

// Clips the segment a + s (b - a), s in [0, 1], to the unit square.
bool clip_unit(TexCoord& a, TexCoord& b) {
  double s0 = 0.0, s1 = 1.0;
  const double du = b.u - a.u, dv = b.v - a.v;
  const double p[4] = {-du, du, -dv, dv};
  const double q[4] = {a.u, 1.0 - a.u, a.v, 1.0 - a.v};
  for (int e = 0; e < 4; ++e) {
    if (p[e] == 0.0) {
      if (q[e] < 0.0) return false;
      continue;
    }
    const double r = q[e] / p[e];
    if (p[e] < 0.0) {
      s0 = std::max(s0, r);
    } else {
      s1 = std::min(s1, r);
    }
  }
  if (s0 > s1) return false;
  const TexCoord a0 = a;
  a = {a0.u + du * s0, a0.v + dv * s0};
  b = {a0.u + du * s1, a0.v + dv * s1};
  return true;
}

TexCoord project(const Vec3& p) { return {0.5 * p.x / p.z + 0.5, 0.5 * p.y / p.z + 0.5}; }

struct CellHit {
  double t;
  Vec3 normal;
};

std::optional<CellHit> hit_cell(const MeshPatch& patch, int i, int j, const Vec3& o, const Vec3& d) {
  const Vec3& v00 = patch.vertex(i, j);
  const Vec3& v10 = patch.vertex(i + 1, j);
  const Vec3& v11 = patch.vertex(i + 1, j + 1);
  const Vec3& v01 = patch.vertex(i, j + 1);
  std::optional<CellHit> best;
  if (auto t = ray_triangle(o, d, v00, v10, v11)) best = CellHit{*t, cross(v10 - v00, v11 - v00)};
  if (auto t = ray_triangle(o, d, v00, v11, v01); t && (!best || *t < best->t)) {
    best = CellHit{*t, cross(v11 - v00, v01 - v00)};
  }
  return best;
}

std::optional<MeshHit> intersect_patch(const Ray& ray, const MeshPatch& patch, double radius) {
  const FaceFrame& frame = face_frame(patch.face_id);
  const Vec3 o = frame.to_local(ray.origin), d = frame.to_local(ray.dir);

  double t0, t1;
  if (!intersect_sphere({o, d}, radius * (1.0 + 1e-12), t0, t1)) return std::nullopt;
  t0 = std::max(t0, 0.0);
  if (d.z == 0.0) {
    if (o.z <= kMinDepth) return std::nullopt;
  } else {
    const double tz = (kMinDepth - o.z) / d.z;
    if (d.z > 0.0) {
      t0 = std::max(t0, tz);
    } else {
      t1 = std::min(t1, tz);
    }
  }
  if (!(t0 <= t1)) return std::nullopt;

  TexCoord a = patch.window.to_local(project(o + d * t0));
  TexCoord b = patch.window.to_local(project(o + d * t1));
  if (!clip_unit(a, b)) return std::nullopt;

  const int n = patch.subdiv;
  std::optional<CellHit> best;
  int cells_after_hit = 0;
  for (TexelIndex c : segment_texels(a, b, n)) {
    c.i = std::clamp(c.i, 0, n - 1);
    c.j = std::clamp(c.j, 0, n - 1);
    if (auto h = hit_cell(patch, c.i, c.j, o, d); h && (!best || h->t < best->t)) best = h;
    // Cells come in ray order; one more guards hits on a shared edge.
    if (best && ++cells_after_hit > 1) break;
  }
  if (!best) return std::nullopt;
  Vec3 nrm = normalize(best->normal);
  if (dot(nrm, o + d * best->t) < 0.0) nrm = -nrm;
  return MeshHit{best->t, patch.face_id, frame.to_world(nrm)};
}

double eval_gap(const Body& body, const Ray& ray, double t) {
  const Vec3 x = ray.at(t);
  return body.altitude(x) - body.height_at(x);
}

SurfaceHit make_hit(const Body& body, const Vec3& p, int steps) {
  SurfaceHit hit;
  hit.p = p;
  hit.face_id = face_for_direction(p);
  hit.uv = obj_to_tex(face_frame(hit.face_id).to_local(p));
  hit.N = body.normal_at(hit.face_id, hit.uv);
  hit.steps = steps;
  return hit;
}

// Marches from t_start toward the surface: forward while above it, backward
// while below, then bisects the bracketing step.
ViewResult refine(const Ray& ray, const Body& body, const ViewPolicy& policy, double t_start, Vec3 normal,
                  double t_exit, double tolerance) {
  ViewResult out;
  const double base = policy.step > 0.0 ? policy.step : body.base_step();
  const double ndv = std::abs(dot(normal, ray.dir));
  const double step = base * std::clamp(ndv > 0.0 ? 1.0 / ndv : policy.oblique_max, 1.0, policy.oblique_max);

  auto finish = [&](double t, double gap) {
    // Newton correction along the radial using the gap already evaluated.
    const Vec3 x = ray.at(t);
    const double k = dot(ray.dir, x) / length(x);
    if (std::abs(k) > 0.05) t -= gap * body.relief() / k;
    out.hit = make_hit(body, ray.at(t), out.steps);
    return out;
  };

  double t = t_start;
  double gap = eval_gap(body, ray, t);
  ++out.steps;
  if (std::abs(gap) < tolerance) return finish(t, gap);
  const double dir = gap > 0.0 ? 1.0 : -1.0;

  while (out.steps < policy.budget) {
    double t_next = t + dir * step;
    if (dir > 0.0 && t > t_exit) return out;
    if (dir < 0.0) t_next = std::max(t_next, 0.0);
    const double gap_next = eval_gap(body, ray, t_next);
    ++out.steps;
    if (std::abs(gap_next) < tolerance) return finish(t_next, gap_next);
    if ((gap_next > 0.0) != (gap > 0.0)) {
      double lo = t, hi = t_next, g_lo = gap;
      while (out.steps < policy.budget) {
        const double mid = 0.5 * (lo + hi);
        const double g = eval_gap(body, ray, mid);
        ++out.steps;
        if (std::abs(g) < tolerance) return finish(mid, g);
        if ((g > 0.0) == (g_lo > 0.0)) {
          lo = mid;
          g_lo = g;
        } else {
          hi = mid;
        }
      }
      return out;
    }
    if (dir < 0.0 && t_next <= 0.0) return out;
    t = t_next;
    gap = gap_next;
  }
  return out;
}

}  // namespace

Body::Body(std::array<const HeightField*, 6> faces) : faces_(faces) {
  bool any = false;
  for (int f = 0; f < 6; ++f) {
    const HeightField* hf = faces_[static_cast<std::size_t>(f)];
    if (hf == nullptr) continue;
    if (hf->face_id() != f) throw std::invalid_argument("height field assigned to the wrong face");
    if (!any) {
      relief_ = hf->relief();
      any = true;
    } else if (std::abs(hf->relief() - relief_) > 1e-12 * relief_) {
      throw std::invalid_argument("height fields disagree on relief");
    }
  }
  if (!any) throw std::invalid_argument("body needs at least one height field");
}

Body::Body(double relief) : relief_(relief) {
  if (!(relief > 0.0)) throw std::invalid_argument("relief must be positive");
}

double Body::height_at(int face_id, TexCoord face_uv) const {
  const HeightField* hf = field(face_id);
  if (hf == nullptr) return 0.0;
  TexCoord t = hf->window().to_local(face_uv);
  t.u = std::clamp(t.u, 0.0, 1.0);
  t.v = std::clamp(t.v, 0.0, 1.0);
  return sample_height(*hf, t, Filter::bilinear);
}

double Body::height_at(Vec3 world) const {
  const int f = face_for_direction(world);
  return height_at(f, obj_to_tex(face_frame(f).to_local(world)));
}

Vec3 Body::normal_at(int face_id, TexCoord uv) const {
  const HeightField* hf = field(face_id);
  const double e = hf != nullptr ? hf->window().scale / hf->size() : 1.0 / 1024.0;
  auto point = [&](double du, double dv) {
    const TexCoord q{uv.u + du, uv.v + dv};
    return tex_to_obj(q, height_at(face_id, q), relief_);
  };
  const Vec3 n = normalize(cross(point(e, 0) - point(-e, 0), point(0, e) - point(0, -e)));
  return face_frame(face_id).to_world(n);
}

double Body::base_step() const {
  double step = 1.0 / 1024.0;
  bool any = false;
  for (const HeightField* hf : faces_) {
    if (hf == nullptr) continue;
    const double s = hf->window().scale / hf->size();
    step = any ? std::min(step, s) : s;
    any = true;
  }
  return step;
}

std::size_t CubesphereMesh::vertex_count() const {
  std::size_t n = 0;
  for (const auto& p : patches) n += p.vertices.size();
  return n;
}

std::size_t CubesphereMesh::triangle_count() const {
  std::size_t n = 0;
  for (const auto& p : patches) n += 2u * static_cast<std::size_t>(p.subdiv) * p.subdiv;
  return n;
}

MeshPatch build_patch(int face_id, int subdiv, FaceWindow window, double radius) {
  if (subdiv < 1) throw std::invalid_argument("subdivision must be at least 1");
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  face_frame(face_id);
  MeshPatch patch;
  patch.face_id = face_id;
  patch.subdiv = subdiv;
  patch.window = window;
  patch.vertices.reserve(static_cast<std::size_t>(subdiv + 1) * (subdiv + 1));
  for (int j = 0; j <= subdiv; ++j) {
    for (int i = 0; i <= subdiv; ++i) patch.vertices.push_back(tex_to_obj(patch.uv(i, j), 0.0, 0.0) * radius);
  }
  return patch;
}

CubesphereMesh build_cubesphere(int subdiv, double radius, std::vector<int> faces) {
  CubesphereMesh mesh;
  mesh.radius = radius;
  for (const int f : faces) mesh.patches.push_back(build_patch(f, subdiv, {}, radius));
  return mesh;
}

CubesphereMesh displace_mesh(const CubesphereMesh& mesh, const Body& body) {
  CubesphereMesh out = mesh;
  for (auto& patch : out.patches) {
    for (int j = 0; j <= patch.subdiv; ++j) {
      for (int i = 0; i <= patch.subdiv; ++i) {
        const TexCoord uv = patch.uv(i, j);
        patch.vertex(i, j) = tex_to_obj(uv, body.height_at(patch.face_id, uv), body.relief());
      }
    }
  }
  return out;
}

CubesphereMesh displace_mesh(const CubesphereMesh& mesh, const HeightField& hf) {
  std::array<const HeightField*, 6> faces{};
  faces[static_cast<std::size_t>(hf.face_id())] = &hf;
  return displace_mesh(mesh, Body(faces));
}

std::optional<MeshHit> intersect_mesh(const Ray& ray, const CubesphereMesh& mesh) {
  std::optional<MeshHit> best;
  for (const auto& patch : mesh.patches) {
    if (auto h = intersect_patch(ray, patch, mesh.radius); h && (!best || h->t < best->t)) best = h;
  }
  return best;
}

double default_tolerance(const HeightField& hf) { return 0.25 * hf.horizontal_scale() / hf.vertical_scale(); }

ViewResult view_intersect(const Ray& ray, const CubesphereMesh& mesh, const Body& body, const ViewPolicy& policy) {
  double t_in, t_out;
  if (!intersect_sphere(ray, body.outer_radius(), t_in, t_out) || t_out < 0.0) return {};
  t_in = std::max(t_in, 0.0);
  const double tol = policy.tolerance;

  if (policy.predisplaced) {
    if (auto m = intersect_mesh(ray, mesh)) return refine(ray, body, policy, m->t, m->normal, t_out, tol);
  }
  // No usable bootstrap: march in from the outer sphere.
  const Vec3 entry = ray.at(t_in);
  return refine(ray, body, policy, t_in, entry / length(entry), t_out, tol);
}

std::optional<Vec3> dense_march(const Ray& ray, const Body& body, int steps) {
  double t0, t1;
  if (!intersect_sphere(ray, body.outer_radius(), t0, t1) || t1 < 0.0) return std::nullopt;
  t0 = std::max(t0, 0.0);
  const double dt = (t1 - t0) / steps;
  double prev_t = t0, prev_g = eval_gap(body, ray, t0);
  for (int k = 1; k <= steps; ++k) {
    const double t = t0 + k * dt;
    const double g = eval_gap(body, ray, t);
    if (g <= 0.0 && prev_g > 0.0) {
      double lo = prev_t, hi = t;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (eval_gap(body, ray, mid) > 0.0) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      return ray.at(0.5 * (lo + hi));
    }
    if (g <= 0.0 && k == 1 && prev_g <= 0.0) return ray.at(t0);
    prev_t = t;
    prev_g = g;
  }
  return std::nullopt;
}

}  // namespace terrashadow
