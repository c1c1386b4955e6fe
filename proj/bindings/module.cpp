#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "keypose/activations.hpp"
#include "keypose/estimator.hpp"
#include "keypose/eval.hpp"
#include "keypose/geometry.hpp"
#include "keypose/synth.hpp"

namespace py = pybind11;
using namespace keypose;

namespace {

JointConfiguration make_config(const std::vector<std::pair<double, double>>& joints, int frame) {
    JointConfiguration c;
    c.frame_index = frame;
    for (const auto& [x, y] : joints) c.joints.push_back({x, y});
    return c;
}

} // namespace

PYBIND11_MODULE(_keypose, m) {
    m.doc() = "key-pose prediction for cyclic motion";

    py::enum_<Mode>(m, "Mode")
        .value("anti_symmetric", Mode::anti_symmetric)
        .value("symmetric", Mode::symmetric);

    py::class_<JointConfiguration>(m, "JointConfiguration")
        .def(py::init(&make_config), py::arg("joints"), py::arg("frame") = 0)
        .def_readonly("frame_index", &JointConfiguration::frame_index)
        .def_property_readonly("joints", [](const JointConfiguration& c) {
            std::vector<std::pair<double, double>> out;
            for (const auto& p : c.joints) out.emplace_back(p.x, p.y);
            return out;
        });

    py::class_<AlignmentResult>(m, "AlignmentResult")
        .def_readonly("scale", &AlignmentResult::scale)
        .def_readonly("distance", &AlignmentResult::distance)
        .def_property_readonly("translation", [](const AlignmentResult& r) {
            return std::make_pair(r.translation.x, r.translation.y);
        });

    py::class_<ConfigurationCluster>(m, "ConfigurationCluster")
        .def_readonly("members", &ConfigurationCluster::members)
        .def_readonly("cost", &ConfigurationCluster::cost)
        .def_readonly("centroid", &ConfigurationCluster::centroid);

    m.def("procrustes_distance", &procrustes_distance, py::arg("a"), py::arg("b"));
    m.def("mean_correct", &mean_correct);
    m.def("kmeans_temporal", &kmeans_temporal, py::arg("configs"), py::arg("k"), py::arg("seed"),
          py::arg("max_iter") = 100);

    m.def("smooth",
          [](const std::vector<double>& series, double sigma) { return smooth(series, sigma); },
          py::arg("series"), py::arg("sigma"));
    m.def("detect_activations",
          [](const std::vector<double>& series) { return detect_activations(series).activations; },
          py::arg("series"));

    py::class_<ActivationSeries>(m, "ActivationSeries")
        .def(py::init([](int poselet, const std::vector<int>& acts, Mode mode) {
                 ActivationSeries s;
                 s.poselet = poselet;
                 s.activations = acts;
                 s.mode = mode;
                 return s;
             }),
             py::arg("poselet"), py::arg("activations"), py::arg("mode"))
        .def_readonly("poselet", &ActivationSeries::poselet)
        .def_readonly("activations", &ActivationSeries::activations)
        .def_readonly("mode", &ActivationSeries::mode);

    m.def("estimate_stroke_frequency",
          [](const std::vector<ActivationSeries>& acts, double window, double bin_width) {
              return estimate_stroke_frequency(acts, window, bin_width).f_stroke;
          },
          py::arg("series"), py::arg("window") = 0.0, py::arg("bin_width") = 4.0);
    m.def("prune_activations", &prune_activations, py::arg("series"), py::arg("f_stroke"),
          py::arg("min_frac") = 0.5);

    py::class_<RegularInterval>(m, "RegularInterval")
        .def_readonly("poselet", &RegularInterval::poselet)
        .def_readonly("start", &RegularInterval::start)
        .def_readonly("end", &RegularInterval::end);
    m.def("regular_intervals", &regular_intervals, py::arg("series"), py::arg("f_stroke"),
          py::arg("lambda_"));
    m.def("goodness_rank", &goodness_rank, py::arg("series"), py::arg("f_stroke"));

    py::class_<KeyPoseModel>(m, "KeyPoseModel")
        .def_readonly("keypose", &KeyPoseModel::keypose)
        .def_property_readonly("likelihoods", [](const KeyPoseModel& m_) {
            std::vector<std::tuple<int, double, double, int>> out;
            for (const auto& lk : m_.likelihoods)
                out.emplace_back(lk.poselet, lk.mu, lk.sigma, lk.samples);
            return out;
        });
    m.def("fit_likelihoods", &fit_likelihoods, py::arg("intervals"), py::arg("ground_truth"),
          py::arg("mode"), py::arg("keypose") = 0, py::arg("sigma_min") = kSigmaMin);

    py::class_<OccurrencePrediction>(m, "OccurrencePrediction")
        .def_readonly("frame", &OccurrencePrediction::frame)
        .def_readonly("support", &OccurrencePrediction::support)
        .def_readonly("log_score", &OccurrencePrediction::log_score);
    m.def("map_estimate",
          [](const KeyPoseModel& model, const std::vector<RegularInterval>& intervals,
             double f_stroke, double subwindow_width, int min_support, double density_sigma) {
              return map_estimate(model, nullptr, intervals, f_stroke, subwindow_width, min_support,
                                  density_sigma);
          },
          py::arg("model"), py::arg("intervals"), py::arg("f_stroke"), py::arg("subwindow_width"),
          py::arg("min_support") = kDefaultMinSupport, py::arg("density_sigma") = 5.0);
    m.def("postprocess_predictions", &postprocess_predictions, py::arg("predictions"),
          py::arg("f_stroke"), py::arg("mode"), py::arg("min_frac") = 0.5);

    m.def("evaluate",
          [](const std::vector<int>& preds, const std::vector<int>& gts, double f_stroke,
             double window) {
              const auto r = match(preds, gts, window);
              const auto c = curve(r, f_stroke, default_deviation_grid());
              py::dict d;
              d["recall_at_003"] = c.recall_at(0.03);
              d["precision"] = c.precision;
              d["tp"] = c.tp;
              d["fp"] = c.fp;
              d["fn"] = c.fn;
              return d;
          },
          py::arg("predictions"), py::arg("ground_truth"), py::arg("f_stroke"),
          py::arg("window") = 10.0);

    py::class_<SyntheticMotionSpec>(m, "SyntheticMotionSpec")
        .def(py::init<>())
        .def_readwrite("period", &SyntheticMotionSpec::period)
        .def_readwrite("mode", &SyntheticMotionSpec::mode)
        .def_readwrite("n_poselets", &SyntheticMotionSpec::n_poselets)
        .def_readwrite("noise_sigma", &SyntheticMotionSpec::noise_sigma)
        .def_readwrite("dropout_rate", &SyntheticMotionSpec::dropout_rate)
        .def_readwrite("spurious_rate", &SyntheticMotionSpec::spurious_rate)
        .def_readwrite("jitter_frames", &SyntheticMotionSpec::jitter_frames)
        .def_readwrite("keypose_phases", &SyntheticMotionSpec::keypose_phases)
        .def_readwrite("duration", &SyntheticMotionSpec::duration)
        .def_readwrite("seed", &SyntheticMotionSpec::seed);

    py::class_<SyntheticDataset>(m, "SyntheticDataset")
        .def_readonly("gt_activations", &SyntheticDataset::gt_activations)
        .def_readonly("keypose_frames", &SyntheticDataset::keypose_frames)
        .def_property_readonly("scores", [](const SyntheticDataset& ds) {
            std::vector<std::vector<double>> out;
            for (int i = 0; i < ds.scores.poselets; ++i) out.push_back(ds.scores.column(i));
            return out;
        });
    m.def("generate_synthetic", &generate, py::arg("spec"));
}
