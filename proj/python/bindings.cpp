#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "terrashadow/maxmip.hpp"
#include "terrashadow/render.hpp"
#include "terrashadow/shadow.hpp"
#include "terrashadow/synth.hpp"

namespace py = pybind11;
using namespace terrashadow;

namespace {

py::array_t<float> to_array(const Image& img) {
  std::vector<py::ssize_t> shape{img.height, img.width};
  if (img.channels > 1) shape.push_back(img.channels);
  py::array_t<float> out(shape);
  std::copy(img.data.begin(), img.data.end(), out.mutable_data());
  return out;
}

Image from_array(const py::array_t<float, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
  Image img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::copy(a.data(), a.data() + a.size(), img.data.begin());
  return img;
}

HeightField field_from_array(const py::array_t<float, py::array::c_style | py::array::forcecast>& a,
                             double horizontal_scale, double vertical_scale) {
  if (a.ndim() != 2 || a.shape(0) != a.shape(1)) throw std::invalid_argument("expected a square 2-D array");
  const int n = static_cast<int>(a.shape(0));
  HeightFieldMeta meta;
  meta.width = meta.height = n;
  meta.horizontal_scale = horizontal_scale;
  meta.vertical_scale = vertical_scale;
  return {n, std::vector<float>(a.data(), a.data() + a.size()), meta};
}

py::dict render_dict(const Scene& scene, const std::string& method, int threads) {
  RenderOptions opt;
  opt.threads = threads;
  if (!method.empty()) opt.method = parse_method(method);
  const RenderResult r = render_scene(scene, opt);
  py::dict d;
  d["image"] = to_array(r.image);
  d["shadow"] = to_array(r.shadow);
  d["cost"] = to_array(r.cost);
  d["samples"] = to_array(r.samples);
  d["steps"] = to_array(r.steps);
  d["stats"] = py::module_::import("json").attr("loads")(stats_json(r.stats));
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Soft terrain shadows over maximum mipmaps";

  py::register_exception<SceneError>(m, "SceneError");

  py::class_<Scene>(m, "Scene")
      .def_property(
          "method", [](const Scene& s) { return to_string(s.method); },
          [](Scene& s, const std::string& v) { s.method = parse_method(v); })
      .def_readwrite("reference_samples", &Scene::reference_samples)
      .def_readwrite("seed", &Scene::seed)
      .def_property_readonly("image_size", [](const Scene& s) { return py::make_tuple(s.camera.width, s.camera.height); })
      .def_property_readonly("field_size", [](const Scene& s) { return s.first_field().size(); })
      .def("render", &render_dict, py::arg("method") = "", py::arg("threads") = 0)
      .def("save", [](const Scene& s, const std::filesystem::path& p) { save_scene(p, s); });

  m.def("load_scene", &load_scene, py::arg("path"));
  m.def(
      "synth_scene",
      [](const std::string& name, int image, int size, std::uint64_t seed) {
        SynthOptions o;
        o.image = image;
        o.size = size;
        o.seed = seed;
        return make_scene(name, o);
      },
      py::arg("name"), py::arg("image") = 128, py::arg("size") = 0, py::arg("seed") = 7);
  m.def("synth_scene_names", &synth_scene_names);

  m.def(
      "max_mipmap",
      [](const py::array_t<float, py::array::c_style | py::array::forcecast>& heights) {
        const MaxMipPyramid pyr(field_from_array(heights, 30.0, 1.0));
        py::list levels;
        for (int k = 0; k < pyr.level_count(); ++k) {
          const auto lv = pyr.level(k);
          py::array_t<float> a({pyr.size(k), pyr.size(k)});
          std::copy(lv.begin(), lv.end(), a.mutable_data());
          levels.append(a);
        }
        return levels;
      },
      py::arg("heights"));

  m.def(
      "occlusion_fraction",
      [](double J, double r_L, double n_dot_nL) {
        const OcclusionResult r = occlusion_fraction({J, r_L, n_dot_nL});
        return py::make_tuple(r.s, r.d);
      },
      py::arg("J"), py::arg("r_L"), py::arg("n_dot_nL") = 1.0);
  m.def("segment_fraction", &segment_fraction, py::arg("d"));

  m.def(
      "compare_images",
      [](const py::array_t<float, py::array::c_style | py::array::forcecast>& a,
         const py::array_t<float, py::array::c_style | py::array::forcecast>& b, double dark_offset) {
        return py::module_::import("json").attr("loads")(stats_json(compare_images(from_array(a), from_array(b), dark_offset)));
      },
      py::arg("a"), py::arg("b"), py::arg("dark_offset") = 0.0);
}
