#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pixelrl/attack.hpp"
#include "pixelrl/builtin_victims.hpp"
#include "pixelrl/campaign.hpp"
#include "pixelrl/image.hpp"
#include "pixelrl/image_io.hpp"
#include "pixelrl/metrics.hpp"
#include "pixelrl/victim.hpp"

namespace py = pybind11;
using namespace pixelrl;

PYBIND11_MODULE(_core, m) {
  m.doc() = "query-based black-box pixel attack engine";

  py::class_<Image>(m, "Image")
      .def(py::init<int, int, int, double>(), py::arg("channels"),
           py::arg("height"), py::arg("width"), py::arg("fill") = 0.0)
      .def_static("from_data", &Image::from_data)
      .def_property_readonly("channels", &Image::channels)
      .def_property_readonly("height", &Image::height)
      .def_property_readonly("width", &Image::width)
      .def("at", &Image::at)
      .def("set", &Image::set)
      .def("data", [](const Image& x) { return x.data(); })
      .def("__eq__", [](const Image& a, const Image& b) { return a == b; });

  py::class_<PixelAction>(m, "PixelAction")
      .def(py::init<>())
      .def_readwrite("row", &PixelAction::row)
      .def_readwrite("col", &PixelAction::col)
      .def_readwrite("values", &PixelAction::values);

  py::class_<Perturbation>(m, "Perturbation")
      .def_readonly("channels", &Perturbation::channels)
      .def_readonly("height", &Perturbation::height)
      .def_readonly("width", &Perturbation::width)
      .def_readonly("entries", &Perturbation::entries);

  m.def("apply_actions", &apply_actions);
  m.def("diff_perturbation", &diff_perturbation);
  m.def("apply_perturbation", &apply_perturbation);
  m.def("load_image", &load_image);
  m.def("save_image", &save_image);

  py::class_<ClassifierOutput>(m, "ClassifierOutput")
      .def_readonly("probs", &ClassifierOutput::probs);
  py::class_<Box>(m, "Box")
      .def_readonly("x1", &Box::x1)
      .def_readonly("y1", &Box::y1)
      .def_readonly("x2", &Box::x2)
      .def_readonly("y2", &Box::y2);
  py::class_<Detection>(m, "Detection")
      .def_readonly("box", &Detection::box)
      .def_readonly("class_id", &Detection::class_id)
      .def_readonly("confidence", &Detection::confidence);
  py::class_<DetectorOutput>(m, "DetectorOutput")
      .def_readonly("candidates", &DetectorOutput::candidates);

  py::enum_<VictimTask>(m, "VictimTask")
      .value("classify", VictimTask::classify)
      .value("detect", VictimTask::detect);

  py::class_<Victim, std::unique_ptr<Victim>>(m, "Victim")
      .def("task", &Victim::task)
      .def("classify", &Victim::classify)
      .def("detect", &Victim::detect);
  py::class_<TinyCnnVictim, Victim, std::unique_ptr<TinyCnnVictim>>(
      m, "TinyCnnVictim")
      .def(py::init<const std::string&>());
  py::class_<GridDetectorVictim, Victim, std::unique_ptr<GridDetectorVictim>>(
      m, "GridDetectorVictim")
      .def(py::init<int, double, double>(), py::arg("cell_size"),
           py::arg("channel_threshold"), py::arg("steepness") = 30.0);

  m.def("predicted_class", &predicted_class);
  m.def("detected_count", &detected_count);
  m.def("iou", &iou);
  m.def("match_confidences", &match_confidences);

  m.def("pixel_budget", &pixel_budget);
  m.def("reward_classification", &reward_classification);
  m.def("reward_detection", &reward_detection);
  m.def("bound_check", &bound_check);

  py::class_<RewardSpec>(m, "RewardSpec")
      .def(py::init<>())
      .def_readwrite("task", &RewardSpec::task)
      .def_readwrite("true_label", &RewardSpec::true_label)
      .def_readwrite("clean_true_prob", &RewardSpec::clean_true_prob)
      .def_readwrite("clean_detections", &RewardSpec::clean_detections);

  py::class_<AttackConfig>(m, "AttackConfig")
      .def(py::init<>())
      .def_readwrite("alpha", &AttackConfig::alpha)
      .def_readwrite("eta", &AttackConfig::eta)
      .def_readwrite("convergence_duration", &AttackConfig::convergence_duration)
      .def_readwrite("max_cycles", &AttackConfig::max_cycles)
      .def_readwrite("max_epochs_per_cycle", &AttackConfig::max_epochs_per_cycle)
      .def_readwrite("learning_rate", &AttackConfig::learning_rate)
      .def_readwrite("seed", &AttackConfig::seed)
      .def_readwrite("use_memory", &AttackConfig::use_memory)
      .def_readwrite("use_initialization", &AttackConfig::use_initialization)
      .def_readwrite("min_objects_removed", &AttackConfig::min_objects_removed)
      .def_readwrite("max_total_queries", &AttackConfig::max_total_queries);

  py::class_<AttackResult>(m, "AttackResult")
      .def_readonly("success", &AttackResult::success)
      .def_readonly("adversarial", &AttackResult::adversarial)
      .def_readonly("delta", &AttackResult::delta)
      .def_readonly("queries", &AttackResult::queries)
      .def_readonly("cycles_used", &AttackResult::cycles_used)
      .def_readonly("pixel_budget", &AttackResult::pixel_budget)
      .def_readonly("reward_trace", &AttackResult::reward_trace)
      .def_readonly("cycle_best_rewards", &AttackResult::cycle_best_rewards);

  m.def("run_attack",
        [](const Image& x, const Victim& victim, const RewardSpec& spec,
           const AttackConfig& cfg) {
          QueryCounter counter;
          return run_attack(x, victim, spec, cfg, counter);
        });

  m.def("l0_elements", &l0_elements);
  m.def("l0_pixels", &l0_pixels);
  m.def("ata", &ata);
  m.def("removal_rate", &removal_rate);

  m.def("run_campaign", [](const std::string& config_path) {
    return run_campaign(load_config(config_path)).to_json();
  });
  m.def("run_random_baseline", [](const std::string& config_path) {
    return run_random_baseline(load_config(config_path)).to_json();
  });
}
