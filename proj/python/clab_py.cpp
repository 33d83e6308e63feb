#include <optional>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "clab/bounds.hpp"
#include "clab/embedding_set.hpp"
#include "clab/error.hpp"
#include "clab/fewshot.hpp"
#include "clab/geometry.hpp"
#include "clab/losses.hpp"
#include "clab/report.hpp"
#include "clab/ufm.hpp"

namespace py = pybind11;
using namespace clab;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

py::object to_py(const nlohmann::json& j) {
  switch (j.type()) {
    case nlohmann::json::value_t::null: return py::none();
    case nlohmann::json::value_t::boolean: return py::bool_(j.get<bool>());
    case nlohmann::json::value_t::number_integer: return py::int_(j.get<long long>());
    case nlohmann::json::value_t::number_unsigned: return py::int_(j.get<unsigned long long>());
    case nlohmann::json::value_t::number_float: return py::float_(j.get<double>());
    case nlohmann::json::value_t::string: return py::str(j.get<std::string>());
    case nlohmann::json::value_t::array: {
      py::list out;
      for (const auto& v : j) out.append(to_py(v));
      return std::move(out);
    }
    default: {
      py::dict out;
      for (const auto& [k, v] : j.items()) out[py::str(k)] = to_py(v);
      return std::move(out);
    }
  }
}

std::optional<Labeling> make_labeling(const std::optional<std::vector<int>>& labels, std::optional<int> n_classes) {
  if (!labels) return std::nullopt;
  int c = n_classes.value_or(0);
  if (!n_classes)
    for (int y : *labels) c = std::max(c, y + 1);
  return Labeling(*labels, c);
}

// (N, K, d) or (N, d) array -> embedding set.
EmbeddingSet make_set(const Array& z, const std::optional<std::vector<int>>& labels = std::nullopt,
                      std::optional<int> n_classes = std::nullopt) {
  if (z.ndim() != 2 && z.ndim() != 3) throw DomainError("embeddings must have shape (N, K, d) or (N, d)");
  const auto n = static_cast<std::size_t>(z.shape(0));
  const auto k = z.ndim() == 3 ? static_cast<std::size_t>(z.shape(1)) : 1;
  const auto d = static_cast<Eigen::Index>(z.shape(z.ndim() - 1));
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::MatrixXd data = Eigen::Map<const RowMajor>(z.data(), static_cast<Eigen::Index>(n * k), d);
  return EmbeddingSet(n, k, std::move(data), make_labeling(labels, n_classes));
}

// Rows i*K + l of `rows` -> (N, K, d) array.
Array to_array(const Eigen::MatrixXd& rows, std::size_t n, std::size_t k) {
  const auto d = static_cast<std::size_t>(rows.cols());
  Array out({n, k, d});
  auto view = out.mutable_unchecked<3>();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < k; ++l)
      for (std::size_t c = 0; c < d; ++c)
        view(i, l, c) = rows(static_cast<Eigen::Index>(i * k + l), static_cast<Eigen::Index>(c));
  return out;
}

Array to_array(const EmbeddingSet& set) { return to_array(set.data(), set.n_samples(), set.n_augs()); }

BoundInputs inputs(int n_way, int shots, double dir_cdnv, double cdnv, std::optional<double> sqrt_cdnv) {
  return {n_way, shots, dir_cdnv, cdnv, sqrt_cdnv.value_or(std::sqrt(cdnv))};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Contrastive-loss geometry toolkit";

  const auto& error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", error);
  py::register_exception<DegenerateError>(m, "DegenerateError", error);
  py::register_exception<FormatError>(m, "FormatError", error);
  py::register_exception<IoError>(m, "IoError", error);

  m.def(
      "contrastive_loss",
      [](const Array& z, const std::string& kind, std::optional<std::vector<int>> labels, double inverse_temperature) {
        const auto set = make_set(z, labels);
        return contrastive_loss(set, parse_loss_kind(kind), nullptr, {inverse_temperature});
      },
      py::arg("z"), py::arg("kind"), py::arg("labels") = py::none(), py::arg("inverse_temperature") = 1.0);

  m.def(
      "loss_and_gradient",
      [](const Array& z, const std::string& kind, std::optional<std::vector<int>> labels) {
        const auto set = make_set(z, labels);
        const auto lg = loss_and_gradient(set, parse_loss_kind(kind));
        return py::make_tuple(lg.loss, to_array(lg.gradient, set.n_samples(), set.n_augs()));
      },
      py::arg("z"), py::arg("kind"), py::arg("labels") = py::none(),
      "Loss and its gradient, the gradient shaped (N, K, d).");

  m.def(
      "loss_gap",
      [](const Array& z, const std::vector<int>& labels, std::optional<int> n_classes) {
        const auto set = make_set(z, labels, n_classes);
        return to_py(to_json(loss_gap(set, *set.labeling()), true));
      },
      py::arg("z"), py::arg("labels"), py::arg("n_classes") = py::none());

  m.def("thm1_gap_bound", [](std::size_t n, std::size_t n_max) { return thm1_gap_bound(n, n_max).log_form; },
        py::arg("n_samples"), py::arg("n_max"));
  m.def("batch_gap_bound", [](std::size_t b, int c, double eps) { return to_py(to_json(batch_gap_bound(b, c, eps))); },
        py::arg("batch_size"), py::arg("n_classes"), py::arg("epsilon"));
  m.def(
      "batch_gap_estimate",
      [](const Array& z, const std::vector<int>& labels, std::size_t batch_size, double epsilon, std::size_t n_trials,
         std::uint64_t seed) {
        const auto set = make_set(z, labels);
        const auto est = batch_gap_estimate(set, *set.labeling(), {batch_size, epsilon, n_trials, seed});
        return py::make_tuple(est.mean, est.std_error);
      },
      py::arg("z"), py::arg("labels"), py::arg("batch_size"), py::arg("epsilon"), py::arg("n_trials") = 1000,
      py::arg("seed") = 0, "Returns (mean, standard error).");

  m.def(
      "class_dispersion",
      [](const Array& z, const std::vector<int>& labels) {
        const auto set = make_set(z, labels);
        return to_py(to_json(dispersion(class_stats(set, *set.labeling()))));
      },
      py::arg("z"), py::arg("labels"));
  m.def(
      "etf_report",
      [](const Array& z, const std::vector<int>& labels) {
        const auto set = make_set(z, labels);
        return to_py(to_json(etf_report(set, *set.labeling())));
      },
      py::arg("z"), py::arg("labels"));
  m.def("cka", [](const Array& a, const Array& b) { return cka(make_set(a), make_set(b)); });
  m.def("rsa", [](const Array& a, const Array& b) { return rsa(make_set(a), make_set(b)); });

  m.def("baseline_bound", [](int w, int m_, double v) { return baseline_bound(inputs(w, m_, 0.0, v, std::nullopt)); },
        py::arg("n_way"), py::arg("shots"), py::arg("cdnv"));
  m.def(
      "prop1_bound",
      [](int w, int m_, double dv, double v, std::optional<double> s) { return prop1_bound(inputs(w, m_, dv, v, s)); },
      py::arg("n_way"), py::arg("shots"), py::arg("dir_cdnv"), py::arg("cdnv"), py::arg("sqrt_cdnv") = py::none());
  m.def(
      "general_bound",
      [](int w, int m_, double dv, double v, double a, std::optional<double> s) {
        return general_bound(inputs(w, m_, dv, v, s), a).value;
      },
      py::arg("n_way"), py::arg("shots"), py::arg("dir_cdnv"), py::arg("cdnv"), py::arg("a"),
      py::arg("sqrt_cdnv") = py::none());
  m.def(
      "cor1_bound",
      [](int w, int m_, double dv, double v, std::optional<double> s) {
        return to_py(to_json(cor1_bound(inputs(w, m_, dv, v, s))));
      },
      py::arg("n_way"), py::arg("shots"), py::arg("dir_cdnv"), py::arg("cdnv"), py::arg("sqrt_cdnv") = py::none());
  m.def("solve_stationary_cubic", &solve_stationary_cubic, py::arg("F"), py::arg("A"));

  m.def(
      "mshot_error",
      [](const Array& z, const std::vector<int>& labels, std::size_t shots, int n_way, const std::string& classifier,
         std::size_t n_tasks, std::size_t n_support_draws, std::uint64_t seed) {
        const auto set = make_set(z, labels);
        FewShotConfig cfg;
        cfg.shots = shots;
        cfg.n_way = n_way;
        cfg.classifier = parse_classifier(classifier);
        cfg.n_tasks = n_tasks;
        cfg.n_support_draws = n_support_draws;
        cfg.seed = seed;
        return to_py(to_json(estimate_mshot_error(set, *set.labeling(), cfg)));
      },
      py::arg("z"), py::arg("labels"), py::arg("shots"), py::arg("n_way") = 2, py::arg("classifier") = "ncc",
      py::arg("n_tasks") = 0, py::arg("n_support_draws") = 5, py::arg("seed") = 0);

  m.def("ufm_target_loss", &ufm_target_loss, py::arg("n_classes"), py::arg("per_class"), py::arg("n_augs") = 1);
  m.def(
      "ufm_train",
      [](int n_classes, std::size_t per_class, std::size_t n_augs, std::size_t dim, const std::string& loss,
         std::size_t steps, double learning_rate, const std::string& optimizer, const std::string& renorm,
         std::uint64_t seed) {
        UfmConfig cfg;
        cfg.n_classes = n_classes;
        cfg.per_class = per_class;
        cfg.n_augs = n_augs;
        cfg.dim = dim;
        cfg.loss_kind = parse_loss_kind(loss);
        cfg.steps = steps;
        cfg.learning_rate = learning_rate;
        cfg.optimizer = parse_optimizer(optimizer);
        cfg.renorm = parse_renorm(renorm);
        cfg.seed = seed;
        std::optional<UfmResult> result;
        {
          py::gil_scoped_release release;
          result = ufm_train(cfg);
        }
        py::dict out = to_py(to_json(result->trace)).cast<py::dict>();
        out["embeddings"] = to_array(result->embeddings);
        out["labels"] = result->embeddings.labeling()->labels();
        return out;
      },
      py::arg("n_classes") = 5, py::arg("per_class") = 20, py::arg("n_augs") = 2, py::arg("dim") = 8,
      py::arg("loss") = "nscl", py::arg("steps") = 5000, py::arg("learning_rate") = 0.1,
      py::arg("optimizer") = "adam", py::arg("renorm") = "none", py::arg("seed") = 0);

  m.def(
      "simplex_etf", [](int c, std::size_t d, std::optional<std::uint64_t> seed) { return simplex_etf(c, d, seed); },
      py::arg("n_classes"), py::arg("dim"), py::arg("seed") = py::none());

  m.def(
      "save_bundle",
      [](const std::string& path, const Array& z, std::optional<std::vector<int>> labels, std::optional<int> n_classes) {
        save_bundle(make_set(z, labels, n_classes), path);
      },
      py::arg("path"), py::arg("z"), py::arg("labels") = py::none(), py::arg("n_classes") = py::none());
  m.def(
      "load_bundle",
      [](const std::string& path) {
        const auto set = load_bundle(path);
        py::object labels = py::none();
        if (set.labeled()) labels = py::cast(set.labeling()->labels());
        return py::make_tuple(to_array(set), labels);
      },
      py::arg("path"), "Returns (embeddings of shape (N, K, d), labels or None).");
}
