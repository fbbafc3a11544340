#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <vector>

#include "pixelrl/image.hpp"

namespace pixelrl {

struct ClassifierOutput {
  std::vector<double> probs;  // length c, nonnegative, sums to 1 within 1e-6
};

struct Box {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
  bool operator==(const Box&) const = default;
};

struct Detection {
  Box box;
  int class_id = 0;
  double confidence = 0.0;  // in [0,1]
  bool operator==(const Detection&) const = default;
};

struct DetectorOutput {
  std::vector<Detection> candidates;  // up to B candidates
};

// Counts completed victim evaluations. Atomic so concurrent attack workers
// can share one counter.
class QueryCounter {
 public:
  std::uint64_t count() const { return count_.load(); }
  void increment() { count_.fetch_add(1); }

 private:
  std::atomic<std::uint64_t> count_{0};
};

enum class VictimTask { classify, detect };

// The black-box boundary. Implementations must be deterministic and safe
// for concurrent queries.
class Victim {
 public:
  virtual ~Victim() = default;
  virtual VictimTask task() const = 0;
  virtual ClassifierOutput classify(const Image& x) const;
  virtual DetectorOutput detect(const Image& x) const;
};

// Query entry points: evaluate the victim, then count exactly one query.
// Transport failures (QueryError) propagate without touching the counter.
ClassifierOutput query_classifier(const Victim& victim, const Image& x,
                                  QueryCounter& counter);
DetectorOutput query_detector(const Victim& victim, const Image& x,
                              QueryCounter& counter);

// Smallest index attaining the maximum probability.
int predicted_class(const ClassifierOutput& out);

// Candidates with confidence strictly above 0.5; their count is n(x).
std::vector<Detection> detected_objects(const DetectorOutput& out);

inline int detected_count(const DetectorOutput& out) {
  return static_cast<int>(detected_objects(out).size());
}

// Intersection over union; 0 for disjoint or degenerate boxes.
double iou(const Box& a, const Box& b);

// For each original object, the confidence of its matched candidate in
// new_out: greedy one-to-one matching by descending IoU among same-class
// pairs with IoU >= 0.5; unmatched objects get 0.0.
std::vector<double> match_confidences(const std::vector<Detection>& orig,
                                      const DetectorOutput& new_out);

}  // namespace pixelrl
