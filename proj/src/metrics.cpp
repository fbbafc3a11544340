#include "pixelrl/metrics.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace pixelrl {

std::size_t l0_elements(const Perturbation& delta) {
  return delta.entries.size();
}

std::size_t l0_pixels(const Perturbation& delta) {
  std::set<std::pair<int, int>> pixels;
  for (const auto& [coord, v] : delta.entries) {
    pixels.insert({std::get<1>(coord), std::get<2>(coord)});
  }
  return pixels.size();
}

double ata(const Perturbation& delta) {
  return static_cast<double>(l0_pixels(delta)) /
         (static_cast<double>(delta.height) * delta.width);
}

namespace {

// AP for one class at one IoU threshold, 101-point interpolation.
double average_precision(const std::vector<DetectionFrame>& frames,
                         int class_id, double thr) {
  struct Ranked {
    double conf;
    int frame;
    int det;  // index within the frame, preserves stable tie order
  };
  std::vector<Ranked> ranked;
  int total_gt = 0;
  for (int fi = 0; fi < static_cast<int>(frames.size()); ++fi) {
    for (const auto& gt : frames[fi].ground_truth) {
      if (gt.class_id == class_id) ++total_gt;
    }
    for (int di = 0; di < static_cast<int>(frames[fi].detections.size());
         ++di) {
      if (frames[fi].detections[di].class_id == class_id) {
        ranked.push_back({frames[fi].detections[di].confidence, fi, di});
      }
    }
  }
  if (total_gt == 0) return -1.0;  // caller skips this class
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const Ranked& a, const Ranked& b) {
                     return a.conf > b.conf;
                   });

  // per-frame per-GT usage, one use per threshold
  std::vector<std::vector<bool>> used(frames.size());
  for (std::size_t fi = 0; fi < frames.size(); ++fi) {
    used[fi].assign(frames[fi].ground_truth.size(), false);
  }

  std::vector<double> precision, recall;
  int tp = 0, fp = 0;
  for (const Ranked& r : ranked) {
    const Detection& d = frames[r.frame].detections[r.det];
    int best_gt = -1;
    double best_iou = 0.0;
    const auto& gts = frames[r.frame].ground_truth;
    for (int gi = 0; gi < static_cast<int>(gts.size()); ++gi) {
      if (gts[gi].class_id != class_id || used[r.frame][gi]) continue;
      double v = iou(d.box, gts[gi].box);
      if (v >= thr && v > best_iou) {
        best_iou = v;
        best_gt = gi;
      }
    }
    if (best_gt >= 0) {
      used[r.frame][best_gt] = true;
      ++tp;
    } else {
      ++fp;
    }
    precision.push_back(static_cast<double>(tp) / (tp + fp));
    recall.push_back(static_cast<double>(tp) / total_gt);
  }

  double ap = 0.0;
  for (int i = 0; i <= 100; ++i) {
    double r_level = i / 100.0;
    double best = 0.0;
    for (std::size_t k = 0; k < recall.size(); ++k) {
      if (recall[k] >= r_level - 1e-12) best = std::max(best, precision[k]);
    }
    ap += best;
  }
  return ap / 101.0;
}

}  // namespace

double mean_average_precision(const std::vector<DetectionFrame>& frames) {
  std::set<int> classes;
  for (const auto& f : frames) {
    for (const auto& gt : f.ground_truth) classes.insert(gt.class_id);
    for (const auto& d : f.detections) classes.insert(d.class_id);
  }
  double total = 0.0;
  int counted = 0;
  for (int cls : classes) {
    double class_sum = 0.0;
    bool has_gt = false;
    for (int i = 0; i < 10; ++i) {
      double thr = 0.5 + 0.05 * i;
      double ap = average_precision(frames, cls, thr);
      if (ap < 0.0) break;  // no ground truth for this class
      has_gt = true;
      class_sum += ap;
    }
    if (has_gt) {
      total += class_sum / 10.0;
      ++counted;
    }
  }
  if (counted == 0) return 0.0;
  return total / counted;
}

double removal_rate(const std::vector<int>& clean_counts,
                    const std::vector<int>& adv_counts) {
  if (clean_counts.size() != adv_counts.size() || clean_counts.empty()) {
    throw std::invalid_argument("removal_rate: count vectors mismatch");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < clean_counts.size(); ++i) {
    if (clean_counts[i] < 1) {
      throw std::invalid_argument("removal_rate: clean count must be >= 1");
    }
    double frac = static_cast<double>(clean_counts[i] - adv_counts[i]) /
                  clean_counts[i];
    sum += std::max(0.0, frac);
  }
  return sum / clean_counts.size();
}

std::string CampaignReport::to_json() const {
  nlohmann::ordered_json j;
  j["task"] = task;
  j["attacked_images"] = attacked_images;
  j["skipped_images"] = skipped_images;
  j["success_rate"] = success_rate;
  j["mean_l0_elements"] = mean_l0_elements;
  j["mean_l0_pixels"] = mean_l0_pixels;
  j["mean_queries"] = mean_queries;
  j["mean_ata"] = mean_ata;
  if (task == "detect") {
    j["rm"] = rm;
    j["map_clean"] = map_clean;
    j["map_adv"] = map_adv;
    j["rd"] = rd;
  }
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& s : images) {
    nlohmann::ordered_json row;
    row["name"] = s.name;
    row["attacked"] = s.attacked;
    if (!s.attacked) row["skip_reason"] = s.skip_reason;
    row["success"] = s.success;
    row["queries"] = s.queries;
    row["cycles_used"] = s.cycles_used;
    row["l0_elements"] = s.l0_elements;
    row["l0_pixels"] = s.l0_pixels;
    row["ata"] = s.ata;
    if (task == "detect") {
      row["clean_objects"] = s.clean_objects;
      row["adv_objects"] = s.adv_objects;
    }
    rows.push_back(row);
  }
  j["images"] = rows;
  return j.dump(2) + "\n";
}

std::string CampaignReport::to_csv() const {
  std::ostringstream out;
  out << "name,attacked,success,queries,cycles_used,l0_elements,l0_pixels,"
         "ata,clean_objects,adv_objects\n";
  for (const auto& s : images) {
    out << s.name << ',' << (s.attacked ? 1 : 0) << ',' << (s.success ? 1 : 0)
        << ',' << s.queries << ',' << s.cycles_used << ',' << s.l0_elements
        << ',' << s.l0_pixels << ',' << s.ata << ',' << s.clean_objects << ','
        << s.adv_objects << '\n';
  }
  return out.str();
}

}  // namespace pixelrl
