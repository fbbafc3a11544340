#include "pixelrl/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "pixelrl/builtin_victims.hpp"
#include "pixelrl/errors.hpp"
#include "pixelrl/image_io.hpp"
#include "pixelrl/remote_victim.hpp"

namespace fs = std::filesystem;

namespace pixelrl {

namespace {

double get_positive(const nlohmann::json& j, const char* field, double dflt) {
  if (!j.contains(field)) return dflt;
  double v = j[field].get<double>();
  if (v <= 0.0) {
    throw ConfigError(std::string("config field '") + field +
                      "' must be > 0");
  }
  return v;
}

int get_min1(const nlohmann::json& j, const char* field, int dflt) {
  if (!j.contains(field)) return dflt;
  int v = j[field].get<int>();
  if (v < 1) {
    throw ConfigError(std::string("config field '") + field +
                      "' must be >= 1");
  }
  return v;
}

std::string stem_of(const std::string& name) {
  return fs::path(name).stem().string();
}

std::map<std::string, int> load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open labels file '" + path + "'");
  std::map<std::string, int> labels;
  std::string name;
  int label;
  while (in >> name >> label) labels[name] = label;
  return labels;
}

Image delta_visualization(const Image& x, const Image& xbar) {
  std::vector<double> data(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    data[i] = std::abs(xbar.data()[i] - x.data()[i]);
  }
  return Image::from_data(x.channels(), x.height(), x.width(),
                          std::move(data));
}

struct PerImage {
  ImageSummary summary;
  // detection bookkeeping for mAP
  std::vector<Detection> clean_dets;
  std::vector<Detection> adv_dets;
};

PerImage attack_one(const CampaignConfig& cfg, const Victim& victim,
                    const std::map<std::string, int>& labels,
                    const std::string& path, std::size_t index,
                    ActionSource source, std::uint64_t query_budget) {
  PerImage out;
  const std::string name = fs::path(path).filename().string();
  out.summary.name = name;

  Image x = load_image(path);
  QueryCounter counter;
  RewardSpec spec;
  AttackConfig attack = cfg.attack;
  attack.seed = per_image_seed(cfg.attack.seed, index);
  attack.source = source;
  attack.max_total_queries = query_budget;

  if (cfg.task == "classify") {
    auto it = labels.find(name);
    if (it == labels.end()) it = labels.find(stem_of(name));
    if (it == labels.end()) {
      out.summary.attacked = false;
      out.summary.skip_reason = "no label";
      return out;
    }
    ClassifierOutput clean = query_classifier(victim, x, counter);
    if (predicted_class(clean) != it->second) {
      out.summary.attacked = false;
      out.summary.skip_reason = "misclassified clean image";
      out.summary.queries = counter.count();
      return out;
    }
    spec.task = VictimTask::classify;
    spec.true_label = it->second;
    spec.clean_true_prob = clean.probs[it->second];
  } else {
    DetectorOutput clean = query_detector(victim, x, counter);
    spec.task = VictimTask::detect;
    spec.clean_detections = detected_objects(clean);
    if (spec.clean_detections.empty()) {
      out.summary.attacked = false;
      out.summary.skip_reason = "no detected objects";
      out.summary.queries = counter.count();
      return out;
    }
    attack.min_objects_removed =
        cfg.removal_target == "all"
            ? static_cast<int>(spec.clean_detections.size())
            : 1;
    out.clean_dets = spec.clean_detections;
    out.summary.clean_objects = static_cast<int>(spec.clean_detections.size());
  }

  AttackResult result = run_attack(x, victim, spec, attack, counter);

  out.summary.attacked = true;
  out.summary.success = result.success;
  out.summary.queries = counter.count();
  out.summary.cycles_used = result.cycles_used;
  out.summary.l0_elements = l0_elements(result.delta);
  out.summary.l0_pixels = l0_pixels(result.delta);
  out.summary.ata = ata(result.delta);

  if (cfg.task == "detect") {
    // one extra evaluation for reporting, outside the query count
    DetectorOutput adv = victim.detect(result.adversarial);
    out.adv_dets = detected_objects(adv);
    out.summary.adv_objects = static_cast<int>(out.adv_dets.size());
  }

  if (cfg.write_artifacts && !cfg.output_dir.empty()) {
    const std::string ext = fs::path(path).extension().string() == ".pxr"
                                ? ".pxr"
                                : ".png";
    const std::string stem = stem_of(name);
    fs::path dir(cfg.output_dir);
    save_image(result.adversarial, (dir / (stem + "_adv" + ext)).string());
    save_image(delta_visualization(x, result.adversarial),
               (dir / (stem + "_delta" + ext)).string());
    nlohmann::ordered_json row;
    row["name"] = name;
    row["success"] = result.success;
    row["queries"] = out.summary.queries;
    row["cycles_used"] = result.cycles_used;
    row["l0_elements"] = out.summary.l0_elements;
    row["l0_pixels"] = out.summary.l0_pixels;
    row["ata"] = out.summary.ata;
    std::ofstream f((dir / (stem + ".json")).string());
    f << row.dump(2) << "\n";
  }
  return out;
}

CampaignReport run_internal(const CampaignConfig& cfg, ActionSource source,
                            const std::map<std::string, std::uint64_t>&
                                budgets) {
  std::unique_ptr<Victim> victim = make_victim(cfg.victim);

  std::vector<std::string> files = cfg.inputs;
  if (files.empty() && !cfg.input_dir.empty()) {
    for (const auto& entry : fs::directory_iterator(cfg.input_dir)) {
      if (!entry.is_regular_file()) continue;
      std::string ext = entry.path().extension().string();
      if (ext == ".png" || ext == ".pxr") files.push_back(entry.path().string());
    }
  }
  std::sort(files.begin(), files.end(),
            [](const std::string& a, const std::string& b) {
              return fs::path(a).filename().string() <
                     fs::path(b).filename().string();
            });

  CampaignReport report;
  report.task = cfg.task;
  if (files.empty()) {
    std::cerr << "warning: no input images found\n";
  }

  std::map<std::string, int> labels;
  if (cfg.task == "classify" && !cfg.labels_path.empty()) {
    labels = load_labels(cfg.labels_path);
  }

  if (cfg.write_artifacts && !cfg.output_dir.empty()) {
    fs::create_directories(cfg.output_dir);
  }

  std::vector<PerImage> results(files.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  auto worker = [&]() {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= files.size()) break;
      std::uint64_t budget = 0;
      if (source == ActionSource::uniform_random) {
        auto it = budgets.find(fs::path(files[i]).filename().string());
        budget = it != budgets.end() ? it->second
                                     : cfg.baseline_query_budget;
      }
      try {
        results[i] = attack_one(cfg, *victim, labels, files[i], i, source,
                                budget);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(err_mutex);
        results[i].summary.name = fs::path(files[i]).filename().string();
        results[i].summary.attacked = false;
        results[i].summary.skip_reason = std::string("error: ") + e.what();
        std::cerr << "image " << files[i] << " failed: " << e.what() << "\n";
      }
    }
  };
  int n_workers = std::max(1, cfg.workers);
  std::vector<std::thread> threads;
  for (int w = 0; w < n_workers; ++w) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  // aggregate (files are already sorted by name)
  std::vector<int> clean_counts, adv_counts;
  std::vector<DetectionFrame> clean_frames, adv_frames;
  double sum_l0e = 0, sum_l0p = 0, sum_q = 0, sum_ata = 0;
  int successes = 0;
  for (const PerImage& r : results) {
    report.images.push_back(r.summary);
    if (!r.summary.attacked) {
      ++report.skipped_images;
      continue;
    }
    ++report.attacked_images;
    if (r.summary.success) ++successes;
    sum_l0e += static_cast<double>(r.summary.l0_elements);
    sum_l0p += static_cast<double>(r.summary.l0_pixels);
    sum_q += static_cast<double>(r.summary.queries);
    sum_ata += r.summary.ata;
    if (cfg.task == "detect") {
      clean_counts.push_back(r.summary.clean_objects);
      adv_counts.push_back(r.summary.adv_objects);
      DetectionFrame clean_frame, adv_frame;
      for (const Detection& d : r.clean_dets) {
        clean_frame.ground_truth.push_back({d.box, d.class_id});
        adv_frame.ground_truth.push_back({d.box, d.class_id});
      }
      clean_frame.detections = r.clean_dets;
      adv_frame.detections = r.adv_dets;
      clean_frames.push_back(std::move(clean_frame));
      adv_frames.push_back(std::move(adv_frame));
    }
  }
  if (report.attacked_images > 0) {
    double n = report.attacked_images;
    report.success_rate = successes / n;
    report.mean_l0_elements = sum_l0e / n;
    report.mean_l0_pixels = sum_l0p / n;
    report.mean_queries = sum_q / n;
    report.mean_ata = sum_ata / n;
  }
  if (cfg.task == "detect" && !clean_counts.empty()) {
    report.rm = removal_rate(clean_counts, adv_counts);
    report.map_clean = mean_average_precision(clean_frames);
    report.map_adv = mean_average_precision(adv_frames);
    report.rd = report.map_clean - report.map_adv;
  }

  if (cfg.write_artifacts && !cfg.output_dir.empty()) {
    const char* base =
        source == ActionSource::uniform_random ? "baseline_report" : "report";
    std::ofstream jf((fs::path(cfg.output_dir) /
                      (std::string(base) + ".json")).string());
    jf << report.to_json();
    std::ofstream cf((fs::path(cfg.output_dir) /
                      (std::string(base) + ".csv")).string());
    cf << report.to_csv();
  }
  return report;
}

}  // namespace

std::uint64_t per_image_seed(std::uint64_t campaign_seed, std::size_t index) {
  std::uint64_t z = campaign_seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::unique_ptr<Victim> make_victim(const VictimSpec& spec) {
  if (spec.type == "linear_softmax") {
    auto tensors = load_weights(spec.weights);
    if (tensors.size() != 3 || tensors[0].numel() != 4) {
      throw ConfigError("linear_softmax weights: expected meta, w, b tensors");
    }
    int c = static_cast<int>(tensors[0].data[0]);
    int h = static_cast<int>(tensors[0].data[1]);
    int w = static_cast<int>(tensors[0].data[2]);
    int classes = static_cast<int>(tensors[0].data[3]);
    std::size_t n = static_cast<std::size_t>(c) * h * w;
    if (tensors[1].numel() != n * classes ||
        tensors[2].numel() != (unsigned)classes) {
      throw ConfigError("linear_softmax weights: tensor shape mismatch");
    }
    std::vector<std::vector<double>> weights(classes);
    for (int k = 0; k < classes; ++k) {
      weights[k].assign(tensors[1].data.begin() + k * n,
                        tensors[1].data.begin() + (k + 1) * n);
    }
    return std::make_unique<LinearSoftmaxVictim>(c, h, w, std::move(weights),
                                                 tensors[2].data);
  }
  if (spec.type == "tiny_cnn") {
    return std::make_unique<TinyCnnVictim>(spec.weights);
  }
  if (spec.type == "grid_detector") {
    return std::make_unique<GridDetectorVictim>(spec.cell_size, spec.threshold,
                                                spec.steepness);
  }
  if (spec.type == "remote") {
    if (spec.port <= 0) throw ConfigError("remote victim: 'port' required");
    return std::make_unique<RemoteVictim>(spec.host, spec.port,
                                          spec.task == "detect"
                                              ? VictimTask::detect
                                              : VictimTask::classify);
  }
  throw ConfigError("unknown victim type '" + spec.type + "'");
}

CampaignConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config is not valid JSON");

  CampaignConfig cfg;
  if (!j.contains("task")) throw ConfigError("missing config field 'task'");
  cfg.task = j["task"].get<std::string>();
  if (cfg.task != "classify" && cfg.task != "detect") {
    throw ConfigError("config field 'task' must be 'classify' or 'detect'");
  }
  if (!j.contains("victim") || !j["victim"].contains("type")) {
    throw ConfigError("missing config field 'victim.type'");
  }
  const auto& v = j["victim"];
  cfg.victim.type = v["type"].get<std::string>();
  if (cfg.victim.type != "linear_softmax" && cfg.victim.type != "tiny_cnn" &&
      cfg.victim.type != "grid_detector" && cfg.victim.type != "remote") {
    throw ConfigError("config field 'victim.type': unknown type '" +
                      cfg.victim.type + "'");
  }
  if (v.contains("weights")) cfg.victim.weights = v["weights"];
  if (v.contains("cell_size")) cfg.victim.cell_size = v["cell_size"];
  if (v.contains("threshold")) cfg.victim.threshold = v["threshold"];
  if (v.contains("steepness")) cfg.victim.steepness = v["steepness"];
  if (v.contains("host")) cfg.victim.host = v["host"];
  if (v.contains("port")) cfg.victim.port = v["port"];
  cfg.victim.task = cfg.task;

  if (j.contains("inputs")) {
    cfg.inputs = j["inputs"].get<std::vector<std::string>>();
    for (const auto& f : cfg.inputs) {
      if (!fs::exists(f)) {
        throw ConfigError("config field 'inputs': missing file '" + f + "'");
      }
    }
  } else if (j.contains("input")) {
    cfg.input_dir = j["input"].get<std::string>();
    if (!fs::exists(cfg.input_dir)) {
      throw ConfigError("config field 'input': path does not exist");
    }
  } else {
    throw ConfigError("missing config field 'input' (or 'inputs')");
  }
  if (j.contains("labels")) {
    cfg.labels_path = j["labels"].get<std::string>();
    if (!fs::exists(cfg.labels_path)) {
      throw ConfigError("config field 'labels': path does not exist");
    }
  }
  if (cfg.task == "classify" && cfg.labels_path.empty()) {
    throw ConfigError("missing config field 'labels' for classify task");
  }
  if (j.contains("output_dir")) cfg.output_dir = j["output_dir"];

  nlohmann::json a = j.value("attack", nlohmann::json::object());
  cfg.attack.alpha = get_positive(a, "alpha", 0.01);
  cfg.attack.eta = get_positive(a, "eta", 0.05);
  cfg.attack.convergence_duration =
      get_min1(a, "T", cfg.task == "detect" ? 20 : 3);
  cfg.attack.max_cycles = get_min1(a, "max_cycles", 100);
  cfg.attack.max_epochs_per_cycle = get_min1(a, "max_epochs_per_cycle", 500);
  cfg.attack.learning_rate = get_positive(a, "learning_rate", 0.05);
  if (a.contains("seed")) cfg.attack.seed = a["seed"].get<std::uint64_t>();

  if (j.contains("removal_target")) {
    cfg.removal_target = j["removal_target"].get<std::string>();
    if (cfg.removal_target != "any" && cfg.removal_target != "all") {
      throw ConfigError("config field 'removal_target' must be any|all");
    }
  }
  if (j.contains("workers")) cfg.workers = get_min1(j, "workers", 1);
  if (j.contains("baseline_query_budget")) {
    cfg.baseline_query_budget = j["baseline_query_budget"].get<std::uint64_t>();
  }
  return cfg;
}

CampaignReport run_campaign(const CampaignConfig& cfg) {
  return run_internal(cfg, ActionSource::policy, {});
}

CampaignReport run_random_baseline(
    const CampaignConfig& cfg,
    const std::map<std::string, std::uint64_t>& budgets) {
  return run_internal(cfg, ActionSource::uniform_random, budgets);
}

}  // namespace pixelrl
