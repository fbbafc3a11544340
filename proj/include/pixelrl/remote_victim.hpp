#pragma once

#include <string>

#include "pixelrl/victim.hpp"

namespace pixelrl {

// Base64 of the image's C*H*W bytes (round(v*255)), standard alphabet
// with '=' padding.
std::string base64_encode(const std::string& bytes);
std::string image_bytes(const Image& img);

// Serialized request body for one query; byte-identical for identical
// images (keys in fixed order: task, c, h, w, data_b64).
std::string encode_request(const Image& img, VictimTask task);

// JSON-over-HTTP client for a victim served elsewhere.
//
// POST /v1/query with
//   { "task": "classify"|"detect", "c": int, "h": int, "w": int,
//     "data_b64": base64 of C*H*W unsigned bytes }
// classify response: { "probs": [float; c] }
// detect response:   { "detections": [ { "box": [x1,y1,x2,y2],
//                       "class_id": int, "confidence": float } ] }
//
// Transport failures (connect/timeout/5xx) raise QueryError and must not be
// counted as queries; malformed or invariant-violating responses raise
// ProtocolError. Timeout comes from PIXELRL_REMOTE_TIMEOUT_MS (default
// 10000).
class RemoteVictim : public Victim {
 public:
  RemoteVictim(std::string host, int port, VictimTask task);

  VictimTask task() const override { return task_; }
  ClassifierOutput classify(const Image& x) const override;
  DetectorOutput detect(const Image& x) const override;

 private:
  std::string post(const std::string& body) const;

  std::string host_;
  int port_;
  VictimTask task_;
  int timeout_ms_;
};

}  // namespace pixelrl
