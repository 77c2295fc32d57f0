#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "prismmap/error.hpp"
#include "prismmap/geometry.hpp"
#include "prismmap/labels.hpp"
#include "prismmap/metrics.hpp"
#include "prismmap/reproject.hpp"

namespace py = pybind11;
using namespace prismmap;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

EquirectImage to_equirect(const U8Array& array) {
  if (array.ndim() != 3) throw Error(ErrorKind::kInvalidArgument, "expected an H x W x C uint8 array");
  const auto h = static_cast<int>(array.shape(0));
  const auto w = static_cast<int>(array.shape(1));
  const auto c = static_cast<int>(array.shape(2));
  std::vector<std::uint8_t> px(array.data(), array.data() + array.size());
  return EquirectImage::validate(Image(w, h, c, std::move(px)));
}

U8Array to_array(const Image& img) {
  U8Array out({img.height(), img.width(), img.channels()});
  std::copy(img.pixels().begin(), img.pixels().end(), out.mutable_data());
  return out;
}

PrismMapConfig make_config(int n, double fov, int face_size, const std::string& sampling, bool allow_narrow) {
  PrismMapConfig cfg;
  cfg.n = n;
  cfg.fov_deg = fov;
  cfg.face_size = face_size;
  cfg.sampling = sampling_from_string(sampling);
  cfg.allow_narrow_fov = allow_narrow;
  return cfg;
}

py::object optional_float(const std::optional<double>& v) { return v ? py::object(py::float_(*v)) : py::none(); }

}  // namespace

PYBIND11_MODULE(prismmap, m) {
  m.doc() = "Equirectangular photospheres to n-gonal prism maps, plus label metrics";

  // prismmap.Error subclasses ValueError; the message starts with "[<kind>]".
  static py::exception<Error> error(m, "Error", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const std::string msg = std::string("[") + to_string(e.kind()) + "] " + e.what();
      PyErr_SetString(error.ptr(), msg.c_str());
    }
  });

  m.def("central_angle", &geometry::central_angle, py::arg("n"), "360 / n in degrees");

  m.def(
      "face_pixel_to_spherical",
      [](int i, int j, int face_size, int n, double fov_deg, int face_index) {
        const auto s = geometry::face_pixel_to_spherical(i, j, face_size, geometry::FaceGeometry(n, fov_deg, face_index));
        return py::make_tuple(s.longitude(), s.latitude());
      },
      py::arg("i"), py::arg("j"), py::arg("face_size"), py::arg("n"), py::arg("fov_deg"), py::arg("face_index"),
      "(longitude, latitude) in radians of a face pixel centre");

  m.def(
      "spherical_to_equirect",
      [](double lon, double lat, int width, int height) {
        const auto p = geometry::spherical_to_equirect(geometry::SphericalCoord(lon, lat), width, height);
        return py::make_tuple(p.x, p.y);
      },
      py::arg("longitude"), py::arg("latitude"), py::arg("width"), py::arg("height"));

  m.def(
      "render_face",
      [](const U8Array& image, int n, double fov_deg, int face_index, int face_size, const std::string& sampling,
         bool allow_narrow_fov) {
        const auto eq = to_equirect(image);
        const auto cfg = make_config(n, fov_deg, face_size, sampling, allow_narrow_fov);
        Image face;
        {
          py::gil_scoped_release release;
          face = render_face(eq, cfg, face_index);
        }
        return to_array(face);
      },
      py::arg("image"), py::arg("n") = 8, py::arg("fov_deg") = 52.0, py::arg("face_index") = 0,
      py::arg("face_size") = 1024, py::arg("sampling") = "bilinear", py::arg("allow_narrow_fov") = false);

  m.def(
      "render_prism_map",
      [](const U8Array& image, int n, double fov_deg, int face_size, const std::string& sampling, int workers,
         bool allow_narrow_fov) {
        const auto eq = to_equirect(image);
        const auto cfg = make_config(n, fov_deg, face_size, sampling, allow_narrow_fov);
        PrismMap map;
        {
          py::gil_scoped_release release;
          map = render_prism_map(eq, cfg, workers);
        }
        py::list faces;
        for (const auto& f : map.faces) faces.append(to_array(f));
        return faces;
      },
      py::arg("image"), py::arg("n") = 8, py::arg("fov_deg") = 52.0, py::arg("face_size") = 1024,
      py::arg("sampling") = "bilinear", py::arg("workers") = 1, py::arg("allow_narrow_fov") = false,
      "List of n faces as H x W x C uint8 arrays");

  m.def("normalize_label", &normalize_label, py::arg("label"));

  m.def(
      "positives_for_map",
      [](const std::vector<std::vector<std::pair<std::string, double>>>& faces, double threshold) {
        std::vector<std::vector<LabelObservation>> obs;
        for (const auto& f : faces) {
          auto& row = obs.emplace_back();
          for (const auto& [label, conf] : f) row.emplace_back(label, conf);
        }
        return positives_for_map(obs, threshold).provenance;
      },
      py::arg("faces"), py::arg("threshold"),
      "Labels with confidence > threshold on any face, mapped to their highest confidence");

  m.def(
      "vocabulary", [](const std::vector<LabelSet>& lists) { return vocabulary(lists); }, py::arg("positive_lists"));
  m.def("negatives", &negatives, py::arg("vocabulary"), py::arg("positives"));
  m.def(
      "confusion",
      [](const LabelSet& pos, const LabelSet& neg, const LabelSet& truth) {
        const auto c = confusion(pos, neg, truth);
        return py::make_tuple(c.tp, c.fp, c.fn);
      },
      py::arg("positives"), py::arg("negatives"), py::arg("truth"), "(tp, fp, fn) label sets");
  m.def(
      "prf1",
      [](std::size_t tp, std::size_t fp, std::size_t fn) {
        const auto s = prf1(tp, fp, fn);
        return py::make_tuple(optional_float(s.precision), optional_float(s.recall), optional_float(s.f1));
      },
      py::arg("tp"), py::arg("fp"), py::arg("fn"), "(precision, recall, f1); None where undefined");
}
