#include "crisp/data.hpp"
#include "crisp/errors.hpp"
#include "crisp/eval.hpp"
#include "crisp/experiment.hpp"
#include "crisp/model.hpp"
#include "crisp/pretrain.hpp"
#include "crisp/rng.hpp"
#include "crisp/serialize.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace crisp;

namespace {

HippocampusModel build_model(const ModelConfig& config, std::uint64_t seed) {
  if (config.variant == Variant::StandardFramework) {
    return HippocampusModel::standard_framework(config, derive_seed(seed, "init"));
  }
  Ca3PretrainConfig ca3;
  ca3.dim = config.ca3_dim();
  ca3.length = config.cycle_length();
  ca3.activity = config.ca3_activity;
  std::optional<AutoEncoderPathway> dentate;
  if (config.variant == Variant::ModelB) {
    DgPretrainConfig dg;
    dg.ec_dim = config.ec_dim();
    dg.dg_dim = config.dg_dim();
    dg.ec_activity = config.ec_activity;
    dg.dg_activity = config.dg_activity;
    dentate = pretrain_dg(dg, derive_seed(seed, "dg"));
  }
  return HippocampusModel(config, pretrain_ca3(ca3, derive_seed(seed, "ca3")), dentate,
                          std::nullopt, derive_seed(seed, "init"));
}

py::bytes to_py(const Bytes& b) {
  return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
}

Bytes from_py(const py::bytes& b) {
  const std::string s = b;
  return Bytes(s.begin(), s.end());
}

}  // namespace

PYBIND11_MODULE(_crisp, m) {
  m.doc() = "CRISP hippocampus sequence memory";

  // Later registrations are tried first, so the base class goes first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<UndefinedCorrelation>(m, "UndefinedCorrelation", PyExc_ArithmeticError);
  py::register_exception<IntegrityError>(m, "IntegrityError", PyExc_IOError);
  py::register_exception<IoError>(m, "IoError", PyExc_IOError);

  py::enum_<Variant>(m, "Variant")
      .value("ModelA", Variant::ModelA)
      .value("ModelB", Variant::ModelB)
      .value("StandardFramework", Variant::StandardFramework);
  py::enum_<DreamOrder>(m, "DreamOrder")
      .value("Sequential", DreamOrder::Sequential)
      .value("Random", DreamOrder::Random);
  py::enum_<Relaxation>(m, "Relaxation")
      .value("Correct", Relaxation::Correct)
      .value("ShiftedPosition", Relaxation::ShiftedPosition)
      .value("Spurious", Relaxation::Spurious)
      .value("Unlabeled", Relaxation::Unlabeled);

  py::class_<ModelConfig>(m, "ModelConfig")
      .def(py::init<>())
      .def_readwrite("n", &ModelConfig::n)
      .def_readwrite("variant", &ModelConfig::variant)
      .def_readwrite("ca3_activity", &ModelConfig::ca3_activity)
      .def_readwrite("dg_activity", &ModelConfig::dg_activity)
      .def_readwrite("ec_activity", &ModelConfig::ec_activity)
      .def_readwrite("eta", &ModelConfig::eta)
      .def_readwrite("intrinsic_length", &ModelConfig::intrinsic_length)
      .def_readwrite("init_std", &ModelConfig::init_std)
      .def_property_readonly("ec_dim", &ModelConfig::ec_dim)
      .def_property_readonly("ca3_dim", &ModelConfig::ca3_dim)
      .def_property_readonly("dg_dim", &ModelConfig::dg_dim)
      .def("validate", &ModelConfig::validate);

  py::class_<SequenceStore>(m, "SequenceStore")
      .def_readonly("ec", &SequenceStore::ec)
      .def_readonly("intrinsic", &SequenceStore::intrinsic)
      .def_readonly("start", &SequenceStore::start)
      .def_readonly("length", &SequenceStore::length)
      .def("ca3_aligned", &SequenceStore::ca3_aligned);

  py::class_<RecallTrace>(m, "RecallTrace")
      .def_readonly("cue_index", &RecallTrace::cue_index)
      .def_readonly("transitions", &RecallTrace::transitions)
      .def_property_readonly("ca3",
                             [](const RecallTrace& t) {
                               std::vector<Vector> out;
                               for (const auto& s : t.steps) out.push_back(s.ca3);
                               return out;
                             })
      .def_property_readonly("ec", [](const RecallTrace& t) {
        std::vector<Vector> out;
        for (const auto& s : t.steps) out.push_back(s.ec);
        return out;
      });

  py::class_<ForgettingCurve>(m, "ForgettingCurve")
      .def_readonly("name", &ForgettingCurve::name)
      .def_readonly("pattern_index", &ForgettingCurve::pattern_index)
      .def_readonly("correlation", &ForgettingCurve::correlation)
      .def_readonly("baseline", &ForgettingCurve::baseline)
      .def_readonly("undefined", &ForgettingCurve::undefined)
      .def_property_readonly("slope", [](const ForgettingCurve& c) { return c.trend.slope; })
      .def("mean", &ForgettingCurve::mean)
      .def("mean_newest", &ForgettingCurve::mean_newest)
      .def("mean_oldest", &ForgettingCurve::mean_oldest);

  py::class_<HippocampusModel>(m, "HippocampusModel")
      .def(py::init(&build_model), py::arg("config"), py::arg("seed") = 1,
           "Pre-trains the scaffolding for `config` and returns a fresh model.")
      .def_property_readonly("variant", &HippocampusModel::variant)
      .def_property_readonly("stored_count", &HippocampusModel::stored_count)
      .def("store_sequence", &HippocampusModel::store_sequence, py::arg("ec"),
           py::arg("start_index") = 0)
      .def(
          "store_standard",
          [](HippocampusModel& model, const Matrix& ca3, double eta) {
            return model.store_standard(ca3, LearningRate(eta));
          },
          py::arg("ca3"), py::arg("eta") = 0.01)
      .def("encode", &HippocampusModel::encode_batch)
      .def("transition", &HippocampusModel::transition_batch, py::arg("ca3"), py::arg("steps"))
      .def("decode", &HippocampusModel::decode_batch)
      .def("recall", &HippocampusModel::recall, py::arg("cue"), py::arg("transitions"),
           py::arg("emit_si") = false, py::arg("cue_index") = -1)
      .def(
          "dream",
          [](HippocampusModel& model, int loops, DreamOrder order, std::uint64_t seed) {
            model.dream(loops, order, std::nullopt, seed);
          },
          py::arg("loops"), py::arg("order") = DreamOrder::Sequential, py::arg("seed") = 0)
      .def("to_bytes", [](const HippocampusModel& model) { return to_py(serialize(model)); })
      .def_static("from_bytes",
                  [](const py::bytes& b) { return deserialize_model(from_py(b)); });

  m.def("gen_rand",
        [](Index count, Index dim, double activity, std::uint64_t seed) {
          return gen_rand(count, dim, activity, seed).patterns;
        },
        py::arg("count"), py::arg("dim"), py::arg("activity"), py::arg("seed"),
        "Binary patterns, one per column.");
  m.def("gen_rand_corr",
        [](Index count, Index dim, double activity, double flip, std::uint64_t seed) {
          return gen_rand_corr(count, dim, activity, flip, seed).patterns;
        },
        py::arg("count"), py::arg("dim"), py::arg("activity"), py::arg("flip_fraction"),
        py::arg("seed"));
  m.def("corrupt",
        [](const Vector& p, double fraction, std::uint64_t seed) {
          return corrupt(p, NoiseSpec{fraction, seed});
        },
        py::arg("pattern"), py::arg("flip_fraction"), py::arg("seed"));
  m.def("pearson", &pearson);
  m.def("max_correlation_profile", &max_correlation_profile);
  m.def(
      "forgetting_curve",
      [](const HippocampusModel& model, const SequenceStore& store, const std::string& mode,
         std::optional<double> noise, std::uint64_t noise_seed) {
        std::optional<CueNoise> cue;
        if (noise) cue = CueNoise{*noise, noise_seed};
        return forgetting_curve(model, store, CurveMode::parse(mode), cue);
      },
      py::arg("model"), py::arg("store"), py::arg("mode"), py::arg("noise") = std::nullopt,
      py::arg("noise_seed") = 0);
  m.def("classify_relaxation", &classify_relaxation, py::arg("trace"), py::arg("store"),
        py::arg("threshold") = 0.5, py::arg("window") = 5);
  m.def("presets", [] {
    std::vector<std::string> names;
    for (const auto& p : presets()) names.push_back(p.name);
    return names;
  });
  m.def(
      "run_experiment",
      [](const std::string& ini, const std::optional<std::filesystem::path>& out) {
        ExperimentSpec spec = parse_spec(ini);
        RunOptions options;
        options.write_files = out.has_value();
        if (out) spec.out = *out;
        const Report report = run_experiment(spec, options);
        py::dict curves;
        for (const auto& c : report.curves) curves[py::str(c.name)] = c;
        py::dict result;
        result["curves"] = curves;
        result["metrics"] = report.metrics;
        return result;
      },
      py::arg("ini"), py::arg("out") = std::nullopt,
      "Runs the experiment described by INI text; writes files only when `out` is given.");
  m.def("render_preset", [](const std::string& name) { return render_spec(preset_spec(name)); });
}
