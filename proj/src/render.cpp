#include "terrashadow/render.hpp"

#include <png.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace terrashadow {

namespace {

using nlohmann::json;

Vec3 vec_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw SceneError("expected a 3-vector");
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

json vec_to(Vec3 v) { return json::array({v.x, v.y, v.z}); }

TraversalMode parse_mode(const std::string& s) {
  if (s == "conservative") return TraversalMode::conservative;
  if (s == "literal") return TraversalMode::literal;
  throw SceneError("unknown traversal mode: " + s);
}

const char* mode_name(TraversalMode m) { return m == TraversalMode::literal ? "literal" : "conservative"; }

bool host_little_endian() {
  const std::uint16_t probe = 1;
  std::uint8_t first;
  std::memcpy(&first, &probe, 1);
  return first == 1;
}

void write_png_bytes(const std::filesystem::path& path, int width, int height, int channels,
                     const std::vector<std::uint8_t>& bytes) {
  FILE* fp = std::fopen(path.string().c_str(), "wb");
  if (fp == nullptr) throw std::runtime_error("cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw std::runtime_error("PNG encoding failed for " + path.string());
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_sRGB(png, info, PNG_sRGB_INTENT_PERCEPTUAL);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, bytes.data() + static_cast<std::size_t>(y) * width * channels);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

int percentile(std::vector<int> values, double q) {
  if (values.empty()) return 0;
  const auto k = static_cast<std::size_t>(std::floor(q * static_cast<double>(values.size() - 1) + 0.5));
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end());
  return values[k];
}

}  // namespace

Ray Camera::ray(double x, double y) const {
  const Vec3 forward = normalize(look_at - position);
  const Vec3 right = normalize(cross(forward, up));
  const Vec3 true_up = cross(right, forward);
  const double tan_half = std::tan(0.5 * vfov);
  const double aspect = static_cast<double>(width) / height;
  const double px = (2.0 * x / width - 1.0) * tan_half * aspect;
  const double py = (1.0 - 2.0 * y / height) * tan_half;
  return {position, normalize(forward + right * px + true_up * py)};
}

Method parse_method(const std::string& name) {
  if (name == "dp") return Method::dp;
  if (name == "uniform") return Method::uniform;
  if (name == "reference") return Method::reference;
  throw std::invalid_argument("unknown method: " + name);
}

std::string to_string(Method m) {
  switch (m) {
    case Method::dp:
      return "dp";
    case Method::uniform:
      return "uniform";
    case Method::reference:
      return "reference";
  }
  return "dp";
}

void Scene::validate() const {
  bool any = false;
  for (const auto& f : fields) {
    if (!f) continue;
    any = true;
    try {
      trace.validate(f->size());
    } catch (const std::invalid_argument& e) {
      throw SceneError(e.what());
    }
  }
  if (!any) throw SceneError("scene has no height field");
  if (!(light.angular_radius > 0.0)) throw SceneError("light angular radius must be positive");
  if (!(std::abs(length(light.direction) - 1.0) < 1e-6)) throw SceneError("light direction must be unit length");
  if (!(camera.vfov > 0.0 && camera.vfov < 3.141592653589793)) throw SceneError("field of view outside (0, pi)");
  if (camera.width < 1 || camera.height < 1) throw SceneError("image dimensions must be positive");
  if (reference_samples < 1) throw SceneError("reference needs at least one sample");
  if (uniform.steps < 1 || !(uniform.dt > 0.0)) throw SceneError("uniform stepping needs steps >= 1 and dt > 0");
  if (view.budget < 1) throw SceneError("view step budget must be positive");
}

const HeightField& Scene::first_field() const {
  for (const auto& f : fields) {
    if (f) return *f;
  }
  throw SceneError("scene has no height field");
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SceneError("cannot open scene " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SceneError("malformed scene " + path.string() + ": " + e.what());
  }
  const auto base = path.parent_path();
  Scene s;
  try {
    for (const auto& face : j.at("faces")) {
      const auto hpath = base / face.at("heightmap").get<std::string>();
      HeightField hf;
      if (face.contains("meta")) {
        const auto& m = face.at("meta");
        HeightFieldMeta meta;
        meta.width = m.value("width", 0);
        meta.height = m.value("height", 0);
        meta.horizontal_scale = m.value("horizontal_scale", 1.0);
        meta.vertical_scale = m.value("vertical_scale", 1.0);
        meta.body_radius = m.value("body_radius", kDefaultBodyRadius);
        meta.face_id = m.value("face_id", face.value("face_id", 4));
        if (m.contains("face_offset")) {
          meta.face_offset = TexCoord{m.at("face_offset").at(0).get<double>(), m.at("face_offset").at(1).get<double>()};
        }
        hf = load_heightfield(hpath, meta);
      } else {
        hf = load_heightfield(hpath);
      }
      const int id = hf.face_id();
      if (face.contains("face_id") && face.at("face_id").get<int>() != id) {
        throw SceneError("face id of " + hpath.string() + " disagrees with its metadata");
      }
      s.fields[static_cast<std::size_t>(id)] = std::move(hf);
    }
    const auto& light = j.at("light");
    s.light.direction = normalize(vec_from(light.at("direction")));
    s.light.angular_radius = light.at("angular_radius").get<double>();

    const auto& cam = j.at("camera");
    s.camera.position = vec_from(cam.at("position"));
    s.camera.look_at = vec_from(cam.at("look_at"));
    if (cam.contains("up")) s.camera.up = vec_from(cam.at("up"));
    s.camera.vfov = cam.value("vfov", s.camera.vfov);
    s.camera.width = cam.value("width", s.camera.width);
    s.camera.height = cam.value("height", s.camera.height);

    if (j.contains("method")) s.method = parse_method(j.at("method").get<std::string>());
    if (j.contains("trace")) {
      const auto& t = j.at("trace");
      if (t.contains("schedule")) s.trace.schedule = t.at("schedule").get<std::vector<int>>();
      if (t.contains("mode")) s.trace.mode = parse_mode(t.at("mode").get<std::string>());
    }
    if (j.contains("uniform")) {
      s.uniform.steps = j.at("uniform").value("steps", s.uniform.steps);
      s.uniform.dt = j.at("uniform").value("dt", s.uniform.dt);
    }
    if (j.contains("reference")) {
      s.reference_samples = j.at("reference").value("samples", s.reference_samples);
      s.seed = j.at("reference").value("seed", s.seed);
    }
    if (j.contains("view")) {
      const auto& v = j.at("view");
      s.view.predisplaced = v.value("predisplaced", s.view.predisplaced);
      s.view.subdiv = v.value("subdiv", s.view.subdiv);
      s.view.bare_subdiv = v.value("bare_subdiv", s.view.bare_subdiv);
      s.view.budget = v.value("budget", s.view.budget);
      s.view.oblique_max = v.value("oblique_max", s.view.oblique_max);
      s.view.tolerance = v.value("tolerance", s.view.tolerance);
    }
  } catch (const json::exception& e) {
    throw SceneError("invalid scene " + path.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw SceneError(e.what());
  }
  s.validate();
  return s;
}

void save_scene(const std::filesystem::path& path, const Scene& scene) {
  json j;
  j["version"] = 1;
  j["faces"] = json::array();
  for (int f = 0; f < 6; ++f) {
    const auto& hf = scene.fields[static_cast<std::size_t>(f)];
    if (!hf) continue;
    const std::string name = path.stem().string() + "_face" + std::to_string(f) + ".f32";
    const auto target = path.parent_path() / name;
    save_raw(target, *hf);
    auto sidecar = target;
    sidecar += ".json";
    save_meta(sidecar, hf->meta());
    j["faces"].push_back({{"face_id", f}, {"heightmap", name}});
  }
  j["light"] = {{"direction", vec_to(scene.light.direction)}, {"angular_radius", scene.light.angular_radius}};
  j["camera"] = {{"position", vec_to(scene.camera.position)},
                 {"look_at", vec_to(scene.camera.look_at)},
                 {"up", vec_to(scene.camera.up)},
                 {"vfov", scene.camera.vfov},
                 {"width", scene.camera.width},
                 {"height", scene.camera.height}};
  j["method"] = to_string(scene.method);
  j["trace"] = {{"schedule", scene.trace.schedule}, {"mode", mode_name(scene.trace.mode)}};
  j["uniform"] = {{"steps", scene.uniform.steps}, {"dt", scene.uniform.dt}};
  j["reference"] = {{"samples", scene.reference_samples}, {"seed", scene.seed}};
  j["view"] = {{"predisplaced", scene.view.predisplaced}, {"subdiv", scene.view.subdiv},
               {"bare_subdiv", scene.view.bare_subdiv}, {"budget", scene.view.budget},
               {"oblique_max", scene.view.oblique_max}, {"tolerance", scene.view.tolerance}};
  std::ofstream out(path);
  if (!out) throw SceneError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void write_pfm(const std::filesystem::path& path, const Image& img) {
  if (img.channels != 1 && img.channels != 3) throw std::invalid_argument("PFM needs 1 or 3 channels");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << (img.channels == 3 ? "PF" : "Pf") << '\n' << img.width << ' ' << img.height << "\n-1.0\n";
  const bool swap = !host_little_endian();
  const std::size_t row = static_cast<std::size_t>(img.width) * img.channels;
  std::vector<char> buf(row * 4);
  for (int y = img.height - 1; y >= 0; --y) {
    std::memcpy(buf.data(), img.data.data() + static_cast<std::size_t>(y) * row, row * 4);
    if (swap) {
      for (std::size_t k = 0; k < row; ++k) std::reverse(buf.begin() + 4 * k, buf.begin() + 4 * k + 4);
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
}

Image read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string magic;
  int w = 0, h = 0;
  double scale = 0.0;
  in >> magic >> w >> h >> scale;
  in.get();
  if ((magic != "Pf" && magic != "PF") || w <= 0 || h <= 0 || scale == 0.0 || !in) {
    throw std::runtime_error("malformed PFM " + path.string());
  }
  Image img(w, h, magic == "PF" ? 3 : 1);
  const bool file_little = scale < 0.0;
  const bool swap = file_little != host_little_endian();
  const std::size_t row = static_cast<std::size_t>(w) * img.channels;
  std::vector<char> buf(row * 4);
  for (int y = h - 1; y >= 0; --y) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!in) throw std::runtime_error("truncated PFM " + path.string());
    if (swap) {
      for (std::size_t k = 0; k < row; ++k) std::reverse(buf.begin() + 4 * k, buf.begin() + 4 * k + 4);
    }
    std::memcpy(img.data.data() + static_cast<std::size_t>(y) * row, buf.data(), buf.size());
  }
  return img;
}

double srgb_encode(double v) {
  v = std::clamp(v, 0.0, 1.0);
  return v <= 0.0031308 ? 12.92 * v : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

void write_png(const std::filesystem::path& path, const Image& img) {
  std::vector<std::uint8_t> bytes(img.data.size());
  for (std::size_t k = 0; k < bytes.size(); ++k) bytes[k] = to_byte(srgb_encode(img.data[k]));
  write_png_bytes(path, img.width, img.height, img.channels, bytes);
}

void write_png_linear(const std::filesystem::path& path, const Image& img) {
  std::vector<std::uint8_t> bytes(img.data.size());
  for (std::size_t k = 0; k < bytes.size(); ++k) bytes[k] = to_byte(img.data[k]);
  write_png_bytes(path, img.width, img.height, img.channels, bytes);
}

PreparedScene::PreparedScene(const Scene& scene) : scene_(&scene) {
  scene.validate();
  std::array<const HeightField*, 6> ptrs{};
  for (int f = 0; f < 6; ++f) {
    const auto& hf = scene.fields[static_cast<std::size_t>(f)];
    if (!hf) continue;
    ptrs[static_cast<std::size_t>(f)] = &*hf;
    pyramids_[static_cast<std::size_t>(f)].emplace(*hf);
  }
  try {
    body_ = std::make_unique<Body>(ptrs);
  } catch (const std::invalid_argument& e) {
    throw SceneError(e.what());
  }

  mesh_.radius = body_->outer_radius();
  for (int f = 0; f < 6; ++f) {
    const auto& hf = scene.fields[static_cast<std::size_t>(f)];
    if (hf) {
      const int subdiv = scene.view.subdiv > 0 ? scene.view.subdiv : std::min(4096, hf->size());
      mesh_.patches.push_back(build_patch(f, subdiv, hf->window(), mesh_.radius));
    } else {
      mesh_.patches.push_back(build_patch(f, scene.view.bare_subdiv, {}, mesh_.radius));
    }
  }
  mesh_ = displace_mesh(mesh_, *body_);

  reference_dirs_ =
      LightDiscSampler{scene.light.direction, scene.light.angular_radius, scene.reference_samples, scene.seed}
          .directions();
}

const MaxMipPyramid* PreparedScene::pyramid(int face_id) const {
  const auto& p = pyramids_[static_cast<std::size_t>(face_id)];
  return p ? &*p : nullptr;
}

std::optional<TerrainView> PreparedScene::terrain(int face_id) const {
  const auto& hf = scene_->fields[static_cast<std::size_t>(face_id)];
  if (!hf) return std::nullopt;
  return TerrainView{*hf, *pyramid(face_id)};
}

ViewPolicy PreparedScene::view_policy() const {
  ViewPolicy p;
  p.predisplaced = scene_->view.predisplaced;
  p.budget = scene_->view.budget;
  p.oblique_max = scene_->view.oblique_max;
  double tol = scene_->view.tolerance;
  if (!(tol > 0.0)) {
    tol = std::numeric_limits<double>::infinity();
    for (const auto& hf : scene_->fields) {
      if (hf) tol = std::min(tol, default_tolerance(*hf));
    }
  }
  p.tolerance = tol;
  return p;
}

PixelSample shade_pixel(const PreparedScene& prepared, Method method, const Ray& ray) {
  return shade_pixel(prepared, method, ray, prepared.view_policy());
}

PixelSample shade_pixel(const PreparedScene& prepared, Method method, const Ray& ray, const ViewPolicy& policy) {
  PixelSample px;
  const ViewResult vr = view_intersect(ray, prepared.mesh(), prepared.body(), policy);
  px.view_steps = vr.steps;
  if (!vr.hit) return px;
  px.hit = true;
  const SurfaceHit& hit = *vr.hit;
  const Scene& scene = prepared.scene();
  const Vec3 L = scene.light.direction;
  const double ndl = dot(hit.N, L);
  if (ndl <= 0.0) return px;

  double s = 0.0;
  if (const auto terrain = prepared.terrain(hit.face_id)) {
    const HeightField& hf = terrain->field;
    const FaceFrame& frame = face_frame(hit.face_id);
    const ObjPoint p = frame.to_local(hit.p);
    const Vec3 N = frame.to_local(hit.N), Ll = frame.to_local(L);
    const double r_L = light_radius_slope(scene.light, hf);
    switch (method) {
      case Method::dp: {
        const ShadowSample sh = shadow_term(p, N, Ll, *terrain, scene.trace, r_L);
        s = sh.s;
        px.J = static_cast<float>(sh.trace.J_star);
        px.shadow_samples = sh.trace.samples;
        px.interval = sh.trace.interval;
        px.face_edge = sh.trace.face_edge;
        px.segment = sh.occlusion.segment;
        px.linear = sh.occlusion.linear;
        break;
      }
      case Method::uniform: {
        const UniformStepResult u = uniform_step_shadow(p, Ll, hf, scene.uniform, r_L, normal_factor(N, Ll));
        s = u.s;
        px.J = static_cast<float>(u.J);
        px.shadow_samples = u.samples;
        break;
      }
      case Method::reference: {
        std::vector<Vec3> local;
        local.reserve(prepared.reference_directions().size());
        for (const Vec3& d : prepared.reference_directions()) local.push_back(frame.to_local(d));
        s = distributed_reference(p, local, hf, terrain->pyramid.at(terrain->pyramid.top_level(), 0, 0));
        px.shadow_samples = static_cast<int>(local.size());
        break;
      }
    }
  }
  px.s = static_cast<float>(s);
  px.radiance = static_cast<float>(std::clamp(ndl * (1.0 - s), 0.0, 1.0));
  return px;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("TERRAIN_SHADOW_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

RenderResult render_scene(const Scene& scene, const RenderOptions& options) {
  const PreparedScene prepared(scene);
  return render_scene(prepared, options);
}

RenderResult render_scene(const PreparedScene& prepared, const RenderOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const Scene& scene = prepared.scene();
  const Camera& cam = scene.camera;
  const Method method = options.method.value_or(scene.method);
  ViewPolicy policy = prepared.view_policy();
  if (options.predisplaced) policy.predisplaced = *options.predisplaced;

  const int w = cam.width, h = cam.height;
  std::vector<PixelSample> pixels(static_cast<std::size_t>(w) * h);
  std::atomic<int> next_row{0};
  auto worker = [&] {
    for (int y = next_row++; y < h; y = next_row++) {
      for (int x = 0; x < w; ++x) {
        pixels[static_cast<std::size_t>(y) * w + x] = shade_pixel(prepared, method, cam.ray(x + 0.5, y + 0.5), policy);
      }
    }
  };
  const int threads = std::min(resolve_threads(options.threads), h);
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  RenderResult r;
  r.image = Image(w, h);
  r.shadow = Image(w, h);
  r.cost = Image(w, h);
  r.samples = Image(w, h);
  r.steps = Image(w, h);
  r.hit.assign(pixels.size(), 0);
  RenderStats& st = r.stats;
  st.pixels = w * h;
  st.threads = threads;
  std::vector<int> sample_counts;
  double step_sum = 0.0, seg_sum = 0.0, lin_sum = 0.0;
  for (std::size_t k = 0; k < pixels.size(); ++k) {
    const PixelSample& px = pixels[k];
    r.image.data[k] = px.radiance;
    r.shadow.data[k] = px.s;
    r.cost.data[k] = px.J;
    r.samples.data[k] = static_cast<float>(px.shadow_samples);
    r.steps.data[k] = static_cast<float>(px.view_steps);
    r.hit[k] = px.hit ? 1 : 0;
    step_sum += px.view_steps;
    st.max_view_steps = std::max(st.max_view_steps, px.view_steps);
    if (!px.hit) continue;
    ++st.hits;
    if (px.shadow_samples > 0) {
      sample_counts.push_back(px.shadow_samples);
      seg_sum += px.segment;
      lin_sum += px.linear;
    }
    if (px.face_edge) ++st.face_edge_pixels;
    if (px.s >= 1.0f) {
      ++st.umbra_pixels;
    } else if (px.s > 0.0f) {
      ++st.penumbra_pixels;
    }
  }
  st.shadow_tests = static_cast<int>(sample_counts.size());
  if (!sample_counts.empty()) {
    double sum = 0.0;
    for (const int c : sample_counts) {
      sum += c;
      st.max_samples = std::max(st.max_samples, c);
    }
    st.mean_samples = sum / static_cast<double>(sample_counts.size());
    st.mean_segment_branch = seg_sum / static_cast<double>(sample_counts.size());
    st.mean_linear_branch = lin_sum / static_cast<double>(sample_counts.size());
    st.p50_samples = percentile(sample_counts, 0.5);
    st.p95_samples = percentile(sample_counts, 0.95);
  }
  st.mean_view_steps = step_sum / static_cast<double>(st.pixels);
  st.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

ImageStats compare_images(const Image& a, const Image& b, double dark_offset) {
  if (a.width != b.width || a.height != b.height || a.channels != b.channels) {
    throw std::invalid_argument("image dimensions differ");
  }
  ImageStats st;
  st.pixels = static_cast<int>(a.data.size());
  st.dark_offset = dark_offset;
  if (a.data.empty()) return st;
  const double max_a = *std::max_element(a.data.begin(), a.data.end());
  const double max_b = *std::max_element(b.data.begin(), b.data.end());
  const double inv_a = max_a > 0.0 ? 1.0 / max_a : 0.0;
  const double inv_b = max_b > 0.0 ? 1.0 / max_b : 0.0;
  std::vector<double> err(a.data.size());
  double sum = 0.0, abs_sum = 0.0;
  for (std::size_t k = 0; k < err.size(); ++k) {
    err[k] = a.data[k] * inv_a - (b.data[k] * inv_b - dark_offset);
    sum += err[k];
    abs_sum += std::abs(err[k]);
    st.max_abs_error = std::max(st.max_abs_error, std::abs(err[k]));
  }
  const double n = static_cast<double>(err.size());
  st.mean_error = sum / n;
  st.mean_abs_error = abs_sum / n;
  double var = 0.0;
  for (const double e : err) var += (e - st.mean_error) * (e - st.mean_error);
  st.sigma = std::sqrt(var / n);
  std::size_t within = 0;
  for (const double e : err) within += std::abs(e - st.mean_error) <= 3.0 * st.sigma ? 1 : 0;
  st.within_3sigma = static_cast<double>(within) / n;
  return st;
}

DebugChannel parse_debug_channel(const std::string& name) {
  if (name == "J" || name == "cost") return DebugChannel::cost;
  if (name == "steps") return DebugChannel::steps;
  if (name == "penumbra") return DebugChannel::penumbra;
  throw std::invalid_argument("unknown debug channel: " + name);
}

const Image& debug_raster(const RenderResult& r, DebugChannel channel) {
  switch (channel) {
    case DebugChannel::cost:
      return r.cost;
    case DebugChannel::steps:
      return r.steps;
    case DebugChannel::penumbra:
      return r.shadow;
  }
  return r.cost;
}

Image render_debug(const RenderResult& r, DebugChannel channel) {
  const int w = r.image.width, h = r.image.height;
  Image out(w, h, 3);
  float max_steps = 1.0f;
  for (const float s : r.steps.data) max_steps = std::max(max_steps, s);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t k = static_cast<std::size_t>(y) * w + x;
      float rgb[3] = {0.0f, 0.0f, 0.0f};
      switch (channel) {
        case DebugChannel::cost: {
          if (!r.hit[k]) break;
          const float j = std::clamp(r.cost.data[k], 0.0f, 1.0f);
          rgb[0] = rgb[1] = rgb[2] = j;
          break;
        }
        case DebugChannel::steps: {
          const float v = r.steps.data[k] / max_steps;
          rgb[0] = std::sqrt(v);
          rgb[1] = v * v;
          rgb[2] = v > 0.0f ? 0.25f * (1.0f - v) : 0.0f;
          break;
        }
        case DebugChannel::penumbra: {
          if (!r.hit[k]) break;
          const float s = r.shadow.data[k];
          if (s >= 1.0f) {
            rgb[0] = 0.1f;
            rgb[1] = 0.2f;
            rgb[2] = 1.0f;
          } else if (s > 0.0f) {
            rgb[0] = 0.4f + 0.6f * s;
            rgb[1] = 0.1f;
            rgb[2] = 0.1f;
          } else {
            rgb[0] = rgb[1] = rgb[2] = static_cast<float>(srgb_encode(r.image.data[k])) * 0.8f;
          }
          break;
        }
      }
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = rgb[c];
    }
  }
  return out;
}

Image render_debug(const Scene& scene, DebugChannel channel, const RenderOptions& options) {
  return render_debug(render_scene(scene, options), channel);
}

std::string stats_json(const RenderStats& s, int indent) {
  const json j = {{"pixels", s.pixels},
                  {"hits", s.hits},
                  {"shadow_tests", s.shadow_tests},
                  {"mean_samples", s.mean_samples},
                  {"p50_samples", s.p50_samples},
                  {"p95_samples", s.p95_samples},
                  {"max_samples", s.max_samples},
                  {"mean_view_steps", s.mean_view_steps},
                  {"max_view_steps", s.max_view_steps},
                  {"face_edge_pixels", s.face_edge_pixels},
                  {"umbra_pixels", s.umbra_pixels},
                  {"penumbra_pixels", s.penumbra_pixels},
                  {"mean_segment_branch", s.mean_segment_branch},
                  {"mean_linear_branch", s.mean_linear_branch},
                  {"wall_ms", s.wall_ms},
                  {"threads", s.threads}};
  return j.dump(indent);
}

std::string stats_json(const ImageStats& s, int indent) {
  const json j = {{"pixels", s.pixels},           {"mean_error", s.mean_error},
                  {"mean_abs_error", s.mean_abs_error}, {"max_abs_error", s.max_abs_error},
                  {"sigma", s.sigma},             {"within_3sigma", s.within_3sigma},
                  {"dark_offset", s.dark_offset}};
  return j.dump(indent);
}

}  // namespace terrashadow
