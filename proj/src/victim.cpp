#include "pixelrl/victim.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

namespace pixelrl {

ClassifierOutput Victim::classify(const Image&) const {
  throw std::logic_error("victim does not support classification");
}

DetectorOutput Victim::detect(const Image&) const {
  throw std::logic_error("victim does not support detection");
}

ClassifierOutput query_classifier(const Victim& victim, const Image& x,
                                  QueryCounter& counter) {
  ClassifierOutput out = victim.classify(x);
  counter.increment();
  return out;
}

DetectorOutput query_detector(const Victim& victim, const Image& x,
                              QueryCounter& counter) {
  DetectorOutput out = victim.detect(x);
  counter.increment();
  return out;
}

int predicted_class(const ClassifierOutput& out) {
  if (out.probs.empty()) {
    throw std::invalid_argument("predicted_class: empty probability vector");
  }
  return static_cast<int>(
      std::max_element(out.probs.begin(), out.probs.end()) -
      out.probs.begin());
}

std::vector<Detection> detected_objects(const DetectorOutput& out) {
  std::vector<Detection> kept;
  for (const Detection& d : out.candidates) {
    if (d.confidence > 0.5) kept.push_back(d);
  }
  return kept;
}

double iou(const Box& a, const Box& b) {
  double ix = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  double iy = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  double inter = ix * iy;
  double area_a = std::max(0.0, a.x2 - a.x1) * std::max(0.0, a.y2 - a.y1);
  double area_b = std::max(0.0, b.x2 - b.x1) * std::max(0.0, b.y2 - b.y1);
  double uni = area_a + area_b - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

std::vector<double> match_confidences(const std::vector<Detection>& orig,
                                      const DetectorOutput& new_out) {
  struct Pair {
    double iou;
    int obj;
    int cand;
    double cand_conf;
    Box cand_box;
  };
  std::vector<Pair> pairs;
  for (int o = 0; o < static_cast<int>(orig.size()); ++o) {
    for (int cnd = 0; cnd < static_cast<int>(new_out.candidates.size());
         ++cnd) {
      const Detection& d = new_out.candidates[cnd];
      if (d.class_id != orig[o].class_id) continue;
      double v = iou(orig[o].box, d.box);
      if (v >= 0.5) pairs.push_back({v, o, cnd, d.confidence, d.box});
    }
  }
  // Tie-breaks use candidate content, not its index, so the result is
  // invariant to the candidate ordering in new_out.
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (a.obj != b.obj) return a.obj < b.obj;
    if (a.cand_conf != b.cand_conf) return a.cand_conf > b.cand_conf;
    return std::tuple(a.cand_box.x1, a.cand_box.y1, a.cand_box.x2,
                      a.cand_box.y2) < std::tuple(b.cand_box.x1, b.cand_box.y1,
                                                  b.cand_box.x2, b.cand_box.y2);
  });

  std::vector<double> confs(orig.size(), 0.0);
  std::vector<bool> obj_used(orig.size(), false);
  std::vector<bool> cand_used(new_out.candidates.size(), false);
  for (const Pair& p : pairs) {
    if (obj_used[p.obj] || cand_used[p.cand]) continue;
    obj_used[p.obj] = true;
    cand_used[p.cand] = true;
    confs[p.obj] = p.cand_conf;
  }
  return confs;
}

}  // namespace pixelrl
