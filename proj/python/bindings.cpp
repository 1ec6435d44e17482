#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "json.hpp"
#include "tofmpi/error.hpp"
#include "tofmpi/eval.hpp"
#include "tofmpi/features.hpp"
#include "tofmpi/filters.hpp"
#include "tofmpi/forest.hpp"
#include "tofmpi/pipeline.hpp"
#include "tofmpi/scene.hpp"
#include "tofmpi/scene_io.hpp"
#include "tofmpi/tofsim.hpp"

namespace py = pybind11;
using namespace tofmpi;

namespace {

using Array2 = py::array_t<double, py::array::c_style | py::array::forcecast>;

Raster ToRaster(const Array2& a) {
  if (a.ndim() != 2) throw Error(ErrorCode::kDimensionMismatch, "expected a 2-D array");
  Raster r(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::memcpy(r.values().data(), a.data(), r.size() * sizeof(double));
  return r;
}

template <typename T>
py::array_t<T> ToArray(const Grid<T>& g) {
  py::array_t<T> a({g.height(), g.width()});
  std::memcpy(a.mutable_data(), g.values().data(), g.size() * sizeof(T));
  return a;
}

py::dict FramesToDict(const FrameSet& f) {
  py::dict d;
  d["depth"] = ToArray(f.depth);
  d["amplitude"] = ToArray(f.amplitude);
  d["intensity"] = ToArray(f.intensity);
  d["ground_truth"] = ToArray(f.ground_truth);
  d["valid"] = ToArray(f.valid);
  return d;
}

FrameSet FramesFromDict(const py::dict& d) {
  FrameSet f;
  f.depth = ToRaster(d["depth"].cast<Array2>());
  f.amplitude = ToRaster(d["amplitude"].cast<Array2>());
  f.intensity = ToRaster(d["intensity"].cast<Array2>());
  f.ground_truth = ToRaster(d["ground_truth"].cast<Array2>());
  const auto valid = d["valid"].cast<py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>>();
  f.valid = Mask(f.depth.width(), f.depth.height());
  if (static_cast<std::size_t>(valid.size()) != f.valid.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "valid mask differs in shape");
  }
  std::memcpy(f.valid.values().data(), valid.data(), f.valid.size());
  f.CheckShapes();
  return f;
}

FeatureMatrix ToMatrix(const Array2& X, const std::vector<std::string>& columns) {
  if (X.ndim() != 2) throw Error(ErrorCode::kDimensionMismatch, "expected an N x F array");
  FeatureMatrix m(static_cast<std::size_t>(X.shape(0)), static_cast<std::size_t>(X.shape(1)));
  std::memcpy(m.data.data(), X.data(), m.data.size() * sizeof(double));
  m.columns = columns;
  return m;
}

py::object JsonToPython(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_tofmpi, m) {
  m.doc() = "Simulated time-of-flight multipath correction";

  static py::exception<Error> error(m, "TofmpiError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
      exc.attr("code") = py::str(std::string(ErrorCodeName(e.code())));
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  py::enum_<WardNormalization>(m, "WardNormalization")
      .value("CLASSIC", WardNormalization::kClassic)
      .value("BOUNDED", WardNormalization::kBoundedAlbedo);

  py::class_<WardMaterial>(m, "WardMaterial")
      .def(py::init<double, double, double, double>(), py::arg("sigma"), py::arg("mu"),
           py::arg("kd"), py::arg("ks") = 1.0)
      .def_readwrite("sigma", &WardMaterial::sigma)
      .def_readwrite("mu", &WardMaterial::mu)
      .def_readwrite("kd", &WardMaterial::kd)
      .def_readwrite("ks", &WardMaterial::ks)
      .def("__eq__", &WardMaterial::operator==)
      .def("__repr__", [](const WardMaterial& w) {
        return "WardMaterial(sigma=" + std::to_string(w.sigma) + ", mu=" + std::to_string(w.mu) +
               ", kd=" + std::to_string(w.kd) + ", ks=" + std::to_string(w.ks) + ")";
      });

  py::enum_<CornerKind>(m, "CornerKind")
      .value("TWO_PLANE", CornerKind::kTwoPlane)
      .value("THREE_PLANE", CornerKind::kThreePlane);

  py::class_<CornerScene>(m, "CornerScene")
      .def(py::init<>())
      .def_readwrite("kind", &CornerScene::kind)
      .def_readwrite("alpha", &CornerScene::alpha)
      .def_readwrite("theta", &CornerScene::theta)
      .def_readwrite("phi", &CornerScene::phi)
      .def_readwrite("gamma", &CornerScene::gamma)
      .def_readwrite("camera_distance", &CornerScene::camera_distance)
      .def_readwrite("materials", &CornerScene::materials)
      .def_property(
          "resolution",
          [](const CornerScene& s) { return py::make_tuple(s.resolution.width, s.resolution.height); },
          [](CornerScene& s, std::pair<int, int> wh) { s.resolution = {wh.first, wh.second}; })
      .def_readwrite("fov", &CornerScene::fov)
      .def_readwrite("seed", &CornerScene::seed)
      .def("__eq__", &CornerScene::operator==)
      .def("to_json", [](const CornerScene& s) { return SceneToJson(s).dump(2); })
      .def_static("from_json",
                  [](const std::string& text) { return SceneFromJson(nlohmann::json::parse(text)); });

  m.def("builtin_materials", [] {
    std::vector<std::pair<std::string, WardMaterial>> out;
    for (const auto& n : BuiltinMaterials()) out.emplace_back(n.name, n.material);
    return out;
  });
  m.def("sample_simple_scene", &SampleSimpleScene, py::arg("seed"));
  m.def("sample_challenging_scene", &SampleChallengingScene, py::arg("seed"), py::arg("kind"));

  py::class_<ToFConfig>(m, "ToFConfig")
      .def(py::init<>())
      .def_readwrite("modulation_frequency", &ToFConfig::modulation_frequency)
      .def_readwrite("bounce_samples", &ToFConfig::bounce_samples)
      .def_readwrite("multipath_enabled", &ToFConfig::multipath_enabled)
      .def_readwrite("noise_stddev", &ToFConfig::noise_stddev)
      .def_readwrite("source_intensity", &ToFConfig::source_intensity)
      .def_readwrite("normalization", &ToFConfig::normalization)
      .def_readwrite("threads", &ToFConfig::threads)
      .def_property_readonly("unambiguous_range", &ToFConfig::UnambiguousRange);

  m.def(
      "render",
      [](const CornerScene& scene, const ToFConfig& cfg) {
        FrameSet f;
        {
          py::gil_scoped_release release;
          f = Render(scene, cfg);
        }
        return FramesToDict(f);
      },
      py::arg("scene"), py::arg("config") = ToFConfig{},
      "Render a scene; returns a dict of depth, amplitude, intensity, ground_truth and valid arrays.");

  m.def(
      "combine_phasors",
      [](const std::vector<std::pair<double, double>>& returns, const ToFConfig& cfg) {
        std::vector<PhasorReturn> r;
        for (const auto& [a, d] : returns) r.push_back({a, d});
        const PhasorSum s = CombinePhasors(r, cfg);
        return py::make_tuple(s.depth, s.amplitude);
      },
      py::arg("returns"), py::arg("config") = ToFConfig{});

  m.def("laplacian", [](const Array2& img, int k) { return ToArray(Laplacian(ToRaster(img), k)); },
        py::arg("image"), py::arg("ksize") = 3);
  m.def("canny", [](const Array2& img, int k) { return ToArray(Canny(ToRaster(img), k)); },
        py::arg("image"), py::arg("aperture") = 3);
  m.def("gabor_bank", [](const Array2& img) {
    py::list out;
    for (const Raster& r : GaborBank(ToRaster(img))) out.append(ToArray(r));
    return out;
  });
  m.def("gradients", [](const Array2& img) {
    const Gradients g = ComputeGradients(ToRaster(img));
    py::dict d;
    d["grad_x"] = ToArray(g.grad_x);
    d["grad_y"] = ToArray(g.grad_y);
    d["grad_xy"] = ToArray(g.grad_xy);
    d["magnitude"] = ToArray(g.magnitude);
    d["angle"] = ToArray(g.angle);
    return d;
  });
  m.def("lbp", [](const Array2& img) { return ToArray(Lbp(ToRaster(img))); });

  m.def("confidence", &Confidence, py::arg("depth"));
  m.def(
      "feature_layout",
      [](bool amplitude_depth, bool include_norm_y) {
        return FeatureLayout({amplitude_depth ? ConfidenceMode::kAmplitudeDepth : ConfidenceMode::kLiteral,
                              include_norm_y});
      },
      py::arg("amplitude_depth_confidence") = false, py::arg("include_norm_y") = true);
  m.def(
      "extract_features",
      [](const py::dict& frames, bool amplitude_depth, bool include_norm_y) {
        const FeatureConfig cfg{
            amplitude_depth ? ConfidenceMode::kAmplitudeDepth : ConfidenceMode::kLiteral,
            include_norm_y};
        const FeatureTensor t = ExtractFeatures(FramesFromDict(frames), cfg);
        py::array_t<double> a({t.height, t.width, t.channels()});
        std::memcpy(a.mutable_data(), t.data.data(), t.data.size() * sizeof(double));
        return py::make_tuple(a, t.layout);
      },
      py::arg("frames"), py::arg("amplitude_depth_confidence") = false,
      py::arg("include_norm_y") = true,
      "Per-pixel features as an H x W x C array plus the channel names.");

  py::class_<ForestConfig>(m, "ForestConfig")
      .def(py::init<>())
      .def_readwrite("n_trees", &ForestConfig::n_trees)
      .def_readwrite("max_depth", &ForestConfig::max_depth)
      .def_readwrite("min_samples_split", &ForestConfig::min_samples_split)
      .def_readwrite("max_features", &ForestConfig::max_features)
      .def_readwrite("bootstrap", &ForestConfig::bootstrap)
      .def_readwrite("seed", &ForestConfig::seed)
      .def_readwrite("threads", &ForestConfig::threads);

  py::class_<RegressionForest>(m, "RegressionForest")
      .def_readonly("config", &RegressionForest::config)
      .def_readonly("layout", &RegressionForest::layout)
      .def_readonly("importances", &RegressionForest::importances)
      .def_property_readonly("n_trees", [](const RegressionForest& f) { return f.trees.size(); })
      .def(
          "predict",
          [](const RegressionForest& f, const Array2& X) {
            const FeatureMatrix m = ToMatrix(X, {});
            std::vector<double> p;
            {
              py::gil_scoped_release release;
              p = f.Predict(m);
            }
            return py::array_t<double>(static_cast<py::ssize_t>(p.size()), p.data());
          },
          py::arg("X"))
      .def("save",
           [](const RegressionForest& f) {
             const auto bytes = SaveForest(f);
             return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
           })
      .def_static("load", [](const py::bytes& b) {
        const std::string s = b;
        return LoadForest(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
      });

  m.def(
      "train_forest",
      [](const Array2& X, const std::vector<double>& y, const ForestConfig& cfg,
         const std::vector<std::string>& columns) {
        const FeatureMatrix m = ToMatrix(X, columns);
        py::gil_scoped_release release;
        return TrainForest(m, y, cfg);
      },
      py::arg("X"), py::arg("y"), py::arg("config") = ForestConfig{},
      py::arg("columns") = std::vector<std::string>{});

  m.def("rpe", &Rpe, py::arg("d_gt"), py::arg("d"));
  m.def(
      "evaluate",
      [](const std::vector<py::dict>& frames, const std::vector<Array2>& corrected) {
        std::vector<FrameSet> f;
        std::vector<Raster> c;
        for (const auto& d : frames) f.push_back(FramesFromDict(d));
        for (const auto& a : corrected) c.push_back(ToRaster(a));
        return JsonToPython(ReportToJson(Evaluate(f, c)));
      },
      py::arg("frames"), py::arg("corrected"));

  m.def(
      "run_pipeline",
      [](const std::string& out_dir, const std::string& profile, std::uint64_t seed,
         int bounce_samples) {
        RunOptions opt;
        opt.profile = GetProfile(profile);
        opt.seed = seed;
        opt.tof.bounce_samples = bounce_samples;
        EvalReport r;
        {
          py::gil_scoped_release release;
          r = RunPipeline(opt, out_dir);
        }
        return JsonToPython(ReportToJson(r));
      },
      py::arg("out_dir"), py::arg("profile") = "desk", py::arg("seed") = 0,
      py::arg("bounce_samples") = 64);
}
