#include "terrashadow/heightfield.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace terrashadow {

namespace {

const std::array<FaceFrame, 6> kFaces = {{
    {{0, 0, -1}, {0, 1, 0}, {1, 0, 0}},
    {{0, 0, 1}, {0, 1, 0}, {-1, 0, 0}},
    {{1, 0, 0}, {0, 0, -1}, {0, 1, 0}},
    {{1, 0, 0}, {0, 0, 1}, {0, -1, 0}},
    {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}},
    {{-1, 0, 0}, {0, 1, 0}, {0, 0, -1}},
}};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw HeightFieldError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void check_dims(int width, int height) {
  if (width <= 0 || height <= 0) throw HeightFieldError("invalid dimensions");
  if (width != height) throw HeightFieldError("non-square height field");
  if (!is_power_of_two(width)) throw HeightFieldError("non-power-of-two height field");
}

// Reads the next whitespace separated header token, skipping '#' comments.
std::string pgm_token(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  auto is_space = [](std::uint8_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
  while (pos < bytes.size()) {
    if (is_space(bytes[pos])) {
      ++pos;
    } else if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else {
      break;
    }
  }
  std::string token;
  while (pos < bytes.size() && !is_space(bytes[pos]) && bytes[pos] != '#') {
    token.push_back(static_cast<char>(bytes[pos++]));
  }
  if (token.empty()) throw HeightFieldError("malformed PGM header: truncated");
  return token;
}

int parse_int(const std::string& token, const char* what) {
  std::size_t used = 0;
  int value = 0;
  try {
    value = std::stoi(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != token.size()) throw HeightFieldError(std::string("malformed PGM header: bad ") + what);
  return value;
}

}  // namespace

const FaceFrame& face_frame(int face_id) {
  if (face_id < 0 || face_id > 5) throw std::out_of_range("face id must be in [0, 5]");
  return kFaces[static_cast<std::size_t>(face_id)];
}

int face_for_direction(Vec3 d) {
  const double ax = std::abs(d.x), ay = std::abs(d.y), az = std::abs(d.z);
  if (ax >= ay && ax >= az) return d.x >= 0 ? 0 : 1;
  if (ay >= az) return d.y >= 0 ? 2 : 3;
  return d.z >= 0 ? 4 : 5;
}

TexCoord obj_to_tex(const ObjPoint& p) {
  if (!(p.z > 0.0)) throw std::domain_error("behind face plane");
  return {0.5 * p.x / p.z + 0.5, 0.5 * p.y / p.z + 0.5};
}

ObjPoint tex_to_obj(TexCoord face_uv, double h, double relief) {
  const Vec3 on_plane{2.0 * face_uv.u - 1.0, 2.0 * face_uv.v - 1.0, 1.0};
  return normalize(on_plane) * (1.0 + h * relief);
}

bool is_power_of_two(int n) { return n > 0 && std::has_single_bit(static_cast<unsigned>(n)); }

FaceWindow window_for(const HeightFieldMeta& meta, int size) {
  const double scale = meta.horizontal_scale * size / (2.0 * meta.body_radius);
  if (!(scale > 0.0) || scale > 1.0 + 1e-9) {
    throw HeightFieldError("height field footprint exceeds its cube face");
  }
  FaceWindow w;
  w.scale = std::min(scale, 1.0);
  if (meta.face_offset) {
    w.u0 = meta.face_offset->u;
    w.v0 = meta.face_offset->v;
  } else {
    w.u0 = 0.5 - 0.5 * w.scale;
    w.v0 = 0.5 - 0.5 * w.scale;
  }
  return w;
}

HeightField::HeightField(int size, std::vector<float> values, const HeightFieldMeta& meta)
    : size_(size),
      values_(std::move(values)),
      horizontal_scale_(meta.horizontal_scale),
      vertical_scale_(meta.vertical_scale),
      body_radius_(meta.body_radius),
      face_id_(meta.face_id) {
  check_dims(size, size);
  if (values_.size() != static_cast<std::size_t>(size) * size) {
    throw HeightFieldError("sample count does not match dimensions");
  }
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!(values_[k] >= 0.0f && values_[k] <= 1.0f)) {
      throw HeightFieldError("sample out of [0,1] at texel " + std::to_string(k));
    }
  }
  if (!(vertical_scale_ > 0.0) || !(body_radius_ > 0.0) || !(horizontal_scale_ > 0.0)) {
    throw HeightFieldError("scales must be positive");
  }
  if (face_id_ < 0 || face_id_ > 5) throw HeightFieldError("face id must be in [0, 5]");
  window_ = window_for(meta, size);
}

HeightFieldMeta HeightField::meta() const {
  HeightFieldMeta m;
  m.width = m.height = size_;
  m.horizontal_scale = horizontal_scale_;
  m.vertical_scale = vertical_scale_;
  m.body_radius = body_radius_;
  m.face_id = face_id_;
  m.face_offset = TexCoord{window_.u0, window_.v0};
  return m;
}

HeightFieldMeta load_meta(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw HeightFieldError("cannot open metadata " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw HeightFieldError("malformed metadata " + path.string() + ": " + e.what());
  }
  HeightFieldMeta m;
  m.width = j.value("width", 0);
  m.height = j.value("height", 0);
  m.horizontal_scale = j.value("horizontal_scale", 1.0);
  m.vertical_scale = j.value("vertical_scale", 1.0);
  m.body_radius = j.value("body_radius", kDefaultBodyRadius);
  m.face_id = j.value("face_id", 4);
  if (j.contains("face_offset")) {
    const auto& o = j.at("face_offset");
    m.face_offset = TexCoord{o.at(0).get<double>(), o.at(1).get<double>()};
  }
  return m;
}

void save_meta(const std::filesystem::path& path, const HeightFieldMeta& m) {
  nlohmann::json j;
  j["width"] = m.width;
  j["height"] = m.height;
  j["horizontal_scale"] = m.horizontal_scale;
  j["vertical_scale"] = m.vertical_scale;
  j["body_radius"] = m.body_radius;
  j["face_id"] = m.face_id;
  if (m.face_offset) j["face_offset"] = {m.face_offset->u, m.face_offset->v};
  std::ofstream out(path);
  if (!out) throw HeightFieldError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

HeightField parse_pgm(std::span<const std::uint8_t> bytes, const HeightFieldMeta& meta) {
  std::size_t pos = 0;
  if (pgm_token(bytes, pos) != "P5") throw HeightFieldError("malformed PGM header: expected P5");
  const int width = parse_int(pgm_token(bytes, pos), "width");
  const int height = parse_int(pgm_token(bytes, pos), "height");
  const int maxval = parse_int(pgm_token(bytes, pos), "maxval");
  if (maxval != 65535) throw HeightFieldError("malformed PGM header: maxval must be 65535");
  ++pos;  // single whitespace byte before the raster
  check_dims(width, height);
  if ((meta.width != 0 && meta.width != width) || (meta.height != 0 && meta.height != height)) {
    throw HeightFieldError("PGM dimensions disagree with metadata");
  }
  const std::size_t count = static_cast<std::size_t>(width) * height;
  if (bytes.size() < pos + 2 * count) throw HeightFieldError("malformed PGM: truncated raster");
  std::vector<float> values(count);
  for (std::size_t k = 0; k < count; ++k) {
    const unsigned sample = (unsigned{bytes[pos + 2 * k]} << 8) | bytes[pos + 2 * k + 1];
    values[k] = static_cast<float>(sample / 65535.0);
  }
  return HeightField(width, std::move(values), meta);
}

HeightField load_heightfield(const std::filesystem::path& path, const HeightFieldMeta& meta) {
  const auto bytes = read_file(path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return parse_pgm(bytes, meta);

  check_dims(meta.width, meta.height);
  const std::size_t count = static_cast<std::size_t>(meta.width) * meta.height;
  if (bytes.size() != 4 * count) throw HeightFieldError("raw float file size does not match metadata");
  std::vector<float> values(count);
  for (std::size_t k = 0; k < count; ++k) {
    std::uint32_t bits = std::uint32_t{bytes[4 * k]} | (std::uint32_t{bytes[4 * k + 1]} << 8) |
                         (std::uint32_t{bytes[4 * k + 2]} << 16) | (std::uint32_t{bytes[4 * k + 3]} << 24);
    float f;
    std::memcpy(&f, &bits, sizeof f);
    if (std::isnan(f)) throw HeightFieldError("sample out of [0,1] at texel " + std::to_string(k));
    if (f < -1e-6f || f > 1.0f + 1e-6f) {
      throw HeightFieldError("sample out of [0,1] at texel " + std::to_string(k));
    }
    values[k] = std::clamp(f, 0.0f, 1.0f);
  }
  return HeightField(meta.width, std::move(values), meta);
}

HeightField load_heightfield(const std::filesystem::path& path) {
  auto sidecar = path;
  sidecar += ".json";
  return load_heightfield(path, load_meta(sidecar));
}

void save_pgm16(const std::filesystem::path& path, int width, int height, std::span<const float> values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw HeightFieldError("cannot write " + path.string());
  out << "P5\n" << width << ' ' << height << "\n65535\n";
  std::vector<char> raster(values.size() * 2);
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double v = std::clamp(static_cast<double>(values[k]), 0.0, 1.0);
    const auto sample = static_cast<unsigned>(std::lround(v * 65535.0));
    raster[2 * k] = static_cast<char>(sample >> 8);
    raster[2 * k + 1] = static_cast<char>(sample & 0xff);
  }
  out.write(raster.data(), static_cast<std::streamsize>(raster.size()));
}

void save_pgm(const std::filesystem::path& path, const HeightField& hf) {
  save_pgm16(path, hf.size(), hf.size(), hf.values());
}

void save_raw(const std::filesystem::path& path, const HeightField& hf) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw HeightFieldError("cannot write " + path.string());
  std::vector<char> raster(hf.values().size() * 4);
  for (std::size_t k = 0; k < hf.values().size(); ++k) {
    std::uint32_t bits;
    std::memcpy(&bits, &hf.values()[k], sizeof bits);
    for (int b = 0; b < 4; ++b) raster[4 * k + b] = static_cast<char>((bits >> (8 * b)) & 0xff);
  }
  out.write(raster.data(), static_cast<std::streamsize>(raster.size()));
}

double sample_height(const HeightField& hf, TexCoord t, Filter filter) {
  const int n = hf.size();
  if (filter == Filter::point) {
    const int i = std::clamp(static_cast<int>(std::floor(t.u * n)), 0, n - 1);
    const int j = std::clamp(static_cast<int>(std::floor(t.v * n)), 0, n - 1);
    return hf.at(i, j);
  }
  const double x = t.u * n - 0.5;
  const double y = t.v * n - 0.5;
  const double fx = std::floor(x), fy = std::floor(y);
  const double ax = x - fx, ay = y - fy;
  const int i0 = std::clamp(static_cast<int>(fx), 0, n - 1);
  const int j0 = std::clamp(static_cast<int>(fy), 0, n - 1);
  const int i1 = std::clamp(static_cast<int>(fx) + 1, 0, n - 1);
  const int j1 = std::clamp(static_cast<int>(fy) + 1, 0, n - 1);
  const double top = hf.at(i0, j0) * (1.0 - ax) + hf.at(i1, j0) * ax;
  const double bottom = hf.at(i0, j1) * (1.0 - ax) + hf.at(i1, j1) * ax;
  return top * (1.0 - ay) + bottom * ay;
}

StitchResult stitch_tiles(std::span<const TilePlacement> tiles, TexelRect roi) {
  if (tiles.empty()) throw HeightFieldError("no tiles to stitch");
  const int n = tiles.front().tile.size();
  const int face = tiles.front().tile.face_id();
  for (const auto& t : tiles) {
    if (t.tile.size() != n) throw HeightFieldError("mixed tile resolutions");
    if (t.tile.face_id() != face) throw HeightFieldError("tiles from different faces");
  }
  check_dims(roi.width, roi.height);

  std::vector<float> out(static_cast<std::size_t>(roi.width) * roi.height);
  for (int y = 0; y < roi.height; ++y) {
    for (int x = 0; x < roi.width; ++x) {
      const int gx = roi.x0 + x, gy = roi.y0 + y;
      const int tx = gx >= 0 ? gx / n : -1, ty = gy >= 0 ? gy / n : -1;
      const TilePlacement* src = nullptr;
      for (const auto& t : tiles) {
        if (t.grid_x == tx && t.grid_y == ty) {
          src = &t;
          break;
        }
      }
      if (src == nullptr) {
        std::ostringstream msg;
        msg << "coverage gap at texel (" << gx << ", " << gy << ")";
        throw HeightFieldError(msg.str());
      }
      out[static_cast<std::size_t>(y) * roi.width + x] = src->tile.at(gx - tx * n, gy - ty * n);
    }
  }

  // Face placement: the first tile anchors the grid on the face.
  const auto& anchor = tiles.front();
  const FaceWindow& aw = anchor.tile.window();
  HeightFieldMeta meta = anchor.tile.meta();
  meta.width = meta.height = roi.width;
  meta.face_offset = TexCoord{aw.u0 + (roi.x0 - anchor.grid_x * n) * aw.scale / n,
                              aw.v0 + (roi.y0 - anchor.grid_y * n) * aw.scale / n};

  StitchResult result;
  result.field = HeightField(roi.width, std::move(out), meta);
  result.grid_offset = {static_cast<double>(roi.x0) / n, static_cast<double>(roi.y0) / n};
  result.grid_scale = static_cast<double>(roi.width) / n;
  return result;
}

HeightField resample(const HeightField& hf, int size) {
  std::vector<float> out(static_cast<std::size_t>(size) * size);
  for (int j = 0; j < size; ++j) {
    for (int i = 0; i < size; ++i) {
      const TexCoord t{(i + 0.5) / size, (j + 0.5) / size};
      out[static_cast<std::size_t>(j) * size + i] = static_cast<float>(sample_height(hf, t, Filter::bilinear));
    }
  }
  HeightFieldMeta meta = hf.meta();
  meta.width = meta.height = size;
  meta.horizontal_scale = hf.horizontal_scale() * hf.size() / size;
  return HeightField(size, std::move(out), meta);
}

}  // namespace terrashadow
