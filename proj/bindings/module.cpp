#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "nesyvit/asp_runtime.hpp"
#include "nesyvit/fold_sem.hpp"
#include "nesyvit/io.hpp"
#include "nesyvit/labeller.hpp"
#include "nesyvit/losses.hpp"
#include "nesyvit/pipeline.hpp"
#include "nesyvit/synthdata.hpp"
#include "nesyvit/trainer.hpp"

namespace py = pybind11;
using namespace nesyvit;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_numpy(const Matrix& m) {
  Array a({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), a.mutable_data());
  return a;
}

Matrix from_numpy(const Array& a) {
  if (a.ndim() != 2) throw DimensionError("expected a 2-d array, got " + std::to_string(a.ndim()) + " dimensions");
  Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), m.data().begin());
  return m;
}

py::array_t<std::uint8_t> bits_array(const BinaryConceptTable& t) {
  py::array_t<std::uint8_t> a({t.rows, t.columns()});
  std::copy(t.bits.begin(), t.bits.end(), a.mutable_data());
  return a;
}

std::vector<std::uint8_t> bits_of(const std::vector<int>& v) {
  std::vector<std::uint8_t> out;
  for (int b : v) {
    if (b != 0 && b != 1) throw std::invalid_argument("bits must be 0 or 1");
    out.push_back(static_cast<std::uint8_t>(b));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_nesyvit, m) {
  m.doc() = "Concept-layer training, rule learning and rule evaluation";

  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  py::class_<EmbeddingDataset>(m, "EmbeddingDataset")
      .def(py::init([](const Array& features, std::vector<ClassId> labels, std::vector<std::string> names) {
             EmbeddingDataset d{from_numpy(features), std::move(labels), std::move(names)};
             d.validate();
             return d;
           }),
           py::arg("features"), py::arg("labels"), py::arg("class_names"))
      .def_property_readonly("features", [](const EmbeddingDataset& d) { return to_numpy(d.features); })
      .def_readonly("labels", &EmbeddingDataset::labels)
      .def_readonly("class_names", &EmbeddingDataset::class_names)
      .def("__len__", &EmbeddingDataset::size)
      .def("subset", [](const EmbeddingDataset& d, std::vector<std::size_t> idx) { return d.subset(idx); });

  py::class_<SparseConceptLayer>(m, "SparseConceptLayer")
      .def_static("initialize", &SparseConceptLayer::initialize, py::arg("concepts"), py::arg("input_dim"),
                  py::arg("seed") = 0)
      .def_property(
          "weights", [](const SparseConceptLayer& l) { return to_numpy(l.weights); },
          [](SparseConceptLayer& l, const Array& a) { l.weights = from_numpy(a); })
      .def_readwrite("bias", &SparseConceptLayer::bias)
      .def_property_readonly("concepts", &SparseConceptLayer::concepts)
      .def_property_readonly("input_dim", &SparseConceptLayer::input_dim);

  py::class_<ActivationBatch>(m, "ActivationBatch")
      .def(py::init([](const Array& z, std::vector<ClassId> labels) { return ActivationBatch{from_numpy(z), labels}; }),
           py::arg("z"), py::arg("labels"))
      .def_property_readonly("z", [](const ActivationBatch& a) { return to_numpy(a.z); })
      .def_readonly("labels", &ActivationBatch::labels);

  py::class_<BinaryConceptTable>(m, "BinaryConceptTable")
      .def_property_readonly("bits", &bits_array)
      .def_readonly("labels", &BinaryConceptTable::labels)
      .def_readonly("neuron_names", &BinaryConceptTable::neuron_names)
      .def_readonly("class_names", &BinaryConceptTable::class_names)
      .def("__len__", [](const BinaryConceptTable& t) { return t.rows; })
      .def("to_csv", [](const BinaryConceptTable& t) {
        std::ostringstream out;
        write_table(out, t);
        return out.str();
      });

  py::class_<LossConfig>(m, "LossConfig")
      .def(py::init<>())
      .def_readwrite("alpha", &LossConfig::alpha)
      .def_readwrite("beta", &LossConfig::beta)
      .def_readwrite("gamma", &LossConfig::gamma)
      .def_readwrite("tau", &LossConfig::tau)
      .def_readwrite("epsilon", &LossConfig::epsilon);

  py::class_<LossBreakdown>(m, "LossBreakdown")
      .def_readonly("supcon", &LossBreakdown::supcon)
      .def_readonly("entropy", &LossBreakdown::entropy)
      .def_readonly("sparsity", &LossBreakdown::sparsity)
      .def_readonly("total", &LossBreakdown::total);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("concepts", &TrainConfig::concepts)
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("weight_decay", &TrainConfig::weight_decay)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("plateau_patience", &TrainConfig::plateau_patience)
      .def_readwrite("lr_decay_factor", &TrainConfig::lr_decay_factor)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("loss", &TrainConfig::loss);

  py::class_<FoldParams>(m, "FoldParams")
      .def(py::init<>())
      .def_readwrite("ratio", &FoldParams::ratio)
      .def_readwrite("tail", &FoldParams::tail)
      .def_readwrite("max_exception_depth", &FoldParams::max_exception_depth);

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("layer", &TrainResult::layer)
      .def_property_readonly("losses", [](const TrainResult& r) {
        std::vector<double> v;
        for (const auto& e : r.history.epochs) v.push_back(e.loss.total);
        return v;
      });

  py::class_<RuleSet>(m, "RuleSet")
      .def_readonly("neuron_names", &RuleSet::neuron_names)
      .def_readonly("class_names", &RuleSet::class_names)
      .def("__len__", [](const RuleSet& rs) { return rs.rules.size(); })
      .def("__str__", [](const RuleSet& rs) { return serialize(rs); })
      .def("__eq__", [](const RuleSet& a, const RuleSet& b) { return a == b; });

  py::class_<Prediction>(m, "Prediction")
      .def_readonly("cls", &Prediction::cls)
      .def_readonly("fired_rule", &Prediction::fired_rule)
      .def_property_readonly("abstained", &Prediction::abstained);

  py::class_<RuleSetStats>(m, "RuleSetStats")
      .def_readonly("rules", &RuleSetStats::rules)
      .def_readonly("unique_predicates", &RuleSetStats::unique_predicates)
      .def_readonly("size", &RuleSetStats::size)
      .def("as_tuple", [](const RuleSetStats& s) { return py::make_tuple(s.rules, s.unique_predicates, s.size); });

  py::class_<Evaluation>(m, "Evaluation")
      .def_readonly("total", &Evaluation::total)
      .def_readonly("correct", &Evaluation::correct)
      .def_readonly("abstained", &Evaluation::abstained)
      .def_readonly("accuracy", &Evaluation::accuracy)
      .def_readonly("confusion", &Evaluation::confusion);

  py::class_<SynthConfig>(m, "SynthConfig")
      .def(py::init<>())
      .def_readwrite("classes", &SynthConfig::classes)
      .def_readwrite("dim", &SynthConfig::dim)
      .def_readwrite("per_class", &SynthConfig::per_class)
      .def_readwrite("separation", &SynthConfig::separation)
      .def_readwrite("seed", &SynthConfig::seed);

  py::class_<PipelineConfig>(m, "PipelineConfig")
      .def(py::init<>())
      .def_readwrite("train", &PipelineConfig::train)
      .def_readwrite("fold", &PipelineConfig::fold)
      .def_readwrite("threshold", &PipelineConfig::threshold)
      .def_readwrite("test_fraction", &PipelineConfig::test_fraction)
      .def_readwrite("seed", &PipelineConfig::seed);

  py::class_<PipelineResult>(m, "PipelineResult")
      .def_readonly("rules", &PipelineResult::rules)
      .def_readonly("train_eval", &PipelineResult::train_eval)
      .def_readonly("test_eval", &PipelineResult::test_eval)
      .def_readonly("stats", &PipelineResult::stats)
      .def_readonly("binarization_gap", &PipelineResult::binarization_gap)
      .def_property_readonly("layer", [](const PipelineResult& r) { return r.trained.layer; })
      .def("report", [](const PipelineResult& r) {
        std::ostringstream out;
        write_pipeline_report(out, r);
        return out.str();
      });

  m.def("generate", &generate, py::arg("config") = SynthConfig{});
  m.def("forward", &forward, py::arg("layer"), py::arg("data"));
  m.def("binarize", py::overload_cast<const ActivationBatch&, const std::vector<std::string>&, double>(&binarize),
        py::arg("acts"), py::arg("class_names"), py::arg("threshold") = 0.5);
  m.def("supcon_loss", &supcon_loss, py::arg("acts"), py::arg("config") = LossConfig{});
  m.def("entropy_loss", &entropy_loss, py::arg("acts"), py::arg("config") = LossConfig{});
  m.def("l1_loss", &l1_loss, py::arg("acts"));
  m.def("total_loss", py::overload_cast<const ActivationBatch&, const LossConfig&>(&total_loss), py::arg("acts"),
        py::arg("config") = LossConfig{});
  m.def("train", py::overload_cast<const EmbeddingDataset&, const TrainConfig&>(&train), py::arg("data"),
        py::arg("config") = TrainConfig{});
  m.def("learn", &learn, py::arg("table"), py::arg("params") = FoldParams{});
  m.def("parse_rules", py::overload_cast<std::string_view>(&parse_rules), py::arg("text"));
  m.def("serialize", [](const RuleSet& rs) { return serialize(rs); }, py::arg("rules"));
  m.def("classify", [](const RuleSet& rs, const std::vector<int>& bits) { return classify(rs, bits_of(bits)); },
        py::arg("rules"), py::arg("bits"));
  m.def("justify", [](const RuleSet& rs, const std::vector<int>& bits) { return render(justify(rs, bits_of(bits)), rs); },
        py::arg("rules"), py::arg("bits"));
  m.def("stats", &stats, py::arg("rules"));
  m.def("evaluate", &evaluate, py::arg("rules"), py::arg("table"));
  m.def("rename_ruleset", &rename_ruleset, py::arg("rules"), py::arg("names"));
  m.def("run_pipeline", &run_pipeline, py::arg("data"), py::arg("config"));
  m.def("read_table", [](const std::string& text) {
    std::istringstream in(text);
    return read_table(in);
  });
  m.def("read_embeddings", [](const std::string& text) {
    std::istringstream in(text);
    return read_embeddings(in);
  });
  m.def("write_embeddings", [](const EmbeddingDataset& d) {
    std::ostringstream out;
    write_embeddings(out, d);
    return out.str();
  });
}
