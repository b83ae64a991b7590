#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "terrashadow/heightfield.hpp"
#include "terrashadow/maxmip.hpp"
#include "terrashadow/render.hpp"
#include "terrashadow/synth.hpp"

namespace fs = std::filesystem;
using namespace terrashadow;

namespace {

constexpr int kOk = 0;
constexpr int kBadArgs = 2;
constexpr int kAssetError = 3;
constexpr int kBudgetViolation = 4;

// Signals a usage problem detected after CLI11 parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double parse_fraction(const std::string& text) {
  const auto slash = text.find('/');
  try {
    if (slash == std::string::npos) return std::stod(text);
    return std::stod(text.substr(0, slash)) / std::stod(text.substr(slash + 1));
  } catch (const std::exception&) {
    throw UsageError("not a number: " + text);
  }
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, sep);) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text << '\n';
}

std::string schedule_text(const std::vector<int>& schedule) {
  std::string s;
  for (std::size_t k = 0; k < schedule.size(); ++k) s += (k ? "-" : "") + std::to_string(schedule[k]);
  return s;
}

Method method_arg(const std::string& name) {
  try {
    return parse_method(name);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

struct RenderArgs {
  std::string scene, method, out, pfm, debug, stats;
  int samples = 0;
  long long seed = -1;
  int threads = 0;
  bool no_predisplace = false;
};

int cmd_render(const RenderArgs& a) {
  Scene scene = load_scene(a.scene);
  if (!a.method.empty()) scene.method = method_arg(a.method);
  if (a.samples > 0) scene.reference_samples = a.samples;
  if (a.seed >= 0) scene.seed = static_cast<std::uint64_t>(a.seed);
  if (a.no_predisplace) scene.view.predisplaced = false;
  scene.validate();

  RenderOptions opt;
  opt.threads = a.threads;
  const RenderResult r = render_scene(scene, opt);
  if (!a.debug.empty()) {
    DebugChannel ch;
    try {
      ch = parse_debug_channel(a.debug);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    write_png_linear(a.out, render_debug(r, ch));
    if (!a.pfm.empty()) write_pfm(a.pfm, debug_raster(r, ch));
  } else {
    write_png(a.out, r.image);
    if (!a.pfm.empty()) write_pfm(a.pfm, r.image);
  }
  if (!a.stats.empty()) write_text(a.stats, stats_json(r.stats));
  return kOk;
}

struct BenchArgs {
  std::string scene, methods = "dp,uniform", out, sizes;
  int repeat = 1;
  int threads = 0;
  int samples = 0;
  bool no_error = false;
};

Scene scene_at_size(const Scene& base, int n) {
  Scene s = base;
  for (auto& f : s.fields) {
    if (f && f->size() != n) f = resample(*f, n);
  }
  return s;
}

int cmd_bench(const BenchArgs& a) {
  const Scene base = load_scene(a.scene);
  if (a.repeat < 1) throw UsageError("--repeat must be at least 1");
  std::vector<Method> methods;
  for (const auto& m : split(a.methods, ',')) methods.push_back(method_arg(m));
  if (methods.empty()) throw UsageError("--methods is empty");
  std::vector<int> sizes;
  for (const auto& s : split(a.sizes, ',')) {
    try {
      sizes.push_back(std::stoi(s));
    } catch (const std::exception&) {
      throw UsageError("bad size: " + s);
    }
    if (!is_power_of_two(sizes.back())) throw UsageError("sizes must be powers of two");
  }
  if (sizes.empty()) sizes.push_back(base.first_field().size());

  struct Row {
    Method method;
    int n;
    int rep;
    RenderStats st;
    ImageStats err;
    bool has_err;
  };
  std::vector<Row> rows;
  bool violated = false;
  for (const int n : sizes) {
    Scene scene = scene_at_size(base, n);
    if (a.samples > 0) scene.reference_samples = a.samples;
    scene.validate();
    const PreparedScene prepared(scene);
    RenderOptions opt;
    opt.threads = a.threads;
    std::optional<Image> reference;
    if (!a.no_error) {
      opt.method = Method::reference;
      reference = render_scene(prepared, opt).image;
    }
    for (const Method m : methods) {
      for (int rep = 0; rep < a.repeat; ++rep) {
        opt.method = m;
        const RenderResult r = render_scene(prepared, opt);
        Row row{m, n, rep, r.stats, {}, reference.has_value()};
        if (reference) row.err = compare_images(r.image, *reference);
        if (m == Method::dp && r.stats.max_samples > scene.trace.max_samples()) {
          std::cerr << "DP sample budget exceeded at N=" << n << ": " << r.stats.max_samples << " > "
                    << scene.trace.max_samples() << '\n';
          violated = true;
        }
        rows.push_back(row);
      }
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& l, const Row& r) {
    const auto lm = to_string(l.method), rm = to_string(r.method);
    return lm != rm ? lm < rm : l.n < r.n;
  });

  std::ostringstream csv;
  csv << "method,N,schedule,repeat,mean_samples,p50_samples,p95_samples,max_samples,wall_ms,mean_abs_error,sigma,"
         "within_3sigma\n";
  for (const Row& r : rows) {
    csv << to_string(r.method) << ',' << r.n << ',' << schedule_text(base.trace.schedule) << ',' << r.rep << ','
        << r.st.mean_samples << ',' << r.st.p50_samples << ',' << r.st.p95_samples << ',' << r.st.max_samples << ','
        << r.st.wall_ms << ',';
    if (r.has_err) {
      csv << r.err.mean_abs_error << ',' << r.err.sigma << ',' << r.err.within_3sigma;
    } else {
      csv << ",,";
    }
    csv << '\n';
  }
  if (a.out.empty() || a.out == "-") {
    std::cout << csv.str();
  } else {
    std::ofstream out(a.out);
    if (!out) throw std::runtime_error("cannot write " + a.out);
    out << csv.str();
  }
  return violated ? kBudgetViolation : kOk;
}

int cmd_mipdump(const std::string& height, int level, const std::string& out) {
  fs::path sidecar = height;
  sidecar += ".json";
  const HeightField hf = fs::exists(sidecar) ? load_heightfield(height) : load_heightfield(height, HeightFieldMeta{});
  const MaxMipPyramid pyr(hf);
  if (level < 0 || level >= pyr.level_count()) {
    throw UsageError("level must be in [0, " + std::to_string(pyr.top_level()) + "]");
  }
  save_pgm16(out, pyr.size(level), pyr.size(level), pyr.level(level));
  return kOk;
}

int cmd_compare(const std::string& a, const std::string& b, const std::string& dark, const std::string& report) {
  const double offset = dark.empty() ? 0.0 : parse_fraction(dark);
  const Image ia = read_pfm(a), ib = read_pfm(b);
  ImageStats st;
  try {
    st = compare_images(ia, ib, offset);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const std::string text = stats_json(st);
  if (!report.empty()) write_text(report, text);
  std::cout << text << '\n';
  return kOk;
}

int cmd_synth(const std::string& name, const std::string& out, const SynthOptions& opt) {
  Scene scene;
  try {
    scene = make_scene(name, opt);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const fs::path path(out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  save_scene(path, scene);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Soft terrain shadows over maximum mipmaps"};
  app.require_subcommand(1);

  RenderArgs ra;
  auto* render = app.add_subcommand("render", "Render a scene to PNG/PFM");
  render->add_option("--scene", ra.scene, "Scene file")->required();
  render->add_option("--method", ra.method, "dp, uniform or reference");
  render->add_option("--out", ra.out, "Output PNG")->required();
  render->add_option("--pfm", ra.pfm, "Float32 PFM output");
  render->add_option("--debug", ra.debug, "Debug channel: J, steps or penumbra");
  render->add_option("--stats", ra.stats, "Statistics JSON output");
  render->add_option("--samples", ra.samples, "Reference light samples");
  render->add_option("--seed", ra.seed, "Reference sampler seed");
  render->add_option("--threads", ra.threads, "Worker threads");
  render->add_flag("--no-predisplace", ra.no_predisplace, "March view rays from the bounding sphere");

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Compare shadow methods by samples, time and error");
  bench->add_option("--scene", ba.scene, "Scene file")->required();
  bench->add_option("--methods", ba.methods, "Comma separated methods");
  bench->add_option("--repeat", ba.repeat, "Timed repetitions per method");
  bench->add_option("--sizes", ba.sizes, "Comma separated field sizes to resample to");
  bench->add_option("--out", ba.out, "CSV output, stdout when omitted");
  bench->add_option("--samples", ba.samples, "Reference light samples");
  bench->add_option("--threads", ba.threads, "Worker threads");
  bench->add_flag("--no-error", ba.no_error, "Skip the reference render");

  std::string mip_height, mip_out;
  int mip_level = 0;
  auto* mipdump = app.add_subcommand("mipdump", "Write one maximum mipmap level as PGM");
  mipdump->add_option("--height", mip_height, "Height field")->required();
  mipdump->add_option("--level", mip_level, "Mip level")->required();
  mipdump->add_option("--out", mip_out, "Output PGM")->required();

  std::string cmp_a, cmp_b, cmp_dark, cmp_report;
  auto* compare = app.add_subcommand("compare", "Normalized error statistics of two PFM images");
  compare->add_option("a", cmp_a, "Test image")->required();
  compare->add_option("b", cmp_b, "Reference image")->required();
  compare->add_option("--dark-offset", cmp_dark, "Dark value subtracted from the reference, e.g. 7/255");
  compare->add_option("--report", cmp_report, "JSON report output");

  std::string syn_name, syn_out;
  SynthOptions syn;
  double syn_elev_deg = 0.0;
  long long syn_seed = static_cast<long long>(syn.seed);
  auto* synth = app.add_subcommand("synth", "Generate a synthetic scene");
  synth->add_option("--scene", syn_name, "ridge, crater or fractal")->required();
  synth->add_option("--out", syn_out, "Scene file to write")->required();
  synth->add_option("--size", syn.size, "Height field size, scene default when omitted");
  synth->add_option("--image", syn.image, "Image size");
  synth->add_option("--seed", syn_seed, "Terrain and sampler seed");
  synth->add_option("--sun-elevation", syn_elev_deg, "Sun elevation in degrees");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return e.get_exit_code() == 0 ? code : kBadArgs;
  }

  try {
    if (*render) return cmd_render(ra);
    if (*bench) return cmd_bench(ba);
    if (*mipdump) return cmd_mipdump(mip_height, mip_level, mip_out);
    if (*compare) return cmd_compare(cmp_a, cmp_b, cmp_dark, cmp_report);
    if (*synth) {
      if ((syn.size != 0 && !is_power_of_two(syn.size)) || syn.image < 1) {
        throw UsageError("size must be a power of two");
      }
      syn.seed = static_cast<std::uint64_t>(syn_seed);
      syn.sun_elevation = syn_elev_deg * 3.14159265358979323846 / 180.0;
      return cmd_synth(syn_name, syn_out, syn);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadArgs;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kAssetError;
  }
  return kBadArgs;
}
