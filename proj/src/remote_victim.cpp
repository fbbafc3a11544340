#include "pixelrl/remote_victim.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "httplib.h"
#include "json.hpp"
#include "pixelrl/errors.hpp"

namespace pixelrl {

namespace {
constexpr char kAlphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(const std::string& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  while (i + 2 < bytes.size()) {
    unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                 (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                 static_cast<unsigned char>(bytes[i + 2]);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
    i += 3;
  }
  std::size_t rem = bytes.size() - i;
  if (rem == 1) {
    unsigned v = static_cast<unsigned char>(bytes[i]) << 16;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += "==";
  } else if (rem == 2) {
    unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                 (static_cast<unsigned char>(bytes[i + 1]) << 8);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::string image_bytes(const Image& img) {
  std::string bytes;
  bytes.reserve(img.size());
  for (double v : img.data()) {
    bytes += static_cast<char>(static_cast<unsigned char>(
        std::lround(v * 255.0)));
  }
  return bytes;
}

std::string encode_request(const Image& img, VictimTask task) {
  nlohmann::ordered_json j;
  j["task"] = task == VictimTask::classify ? "classify" : "detect";
  j["c"] = img.channels();
  j["h"] = img.height();
  j["w"] = img.width();
  j["data_b64"] = base64_encode(image_bytes(img));
  return j.dump();
}

RemoteVictim::RemoteVictim(std::string host, int port, VictimTask task)
    : host_(std::move(host)), port_(port), task_(task), timeout_ms_(10000) {
  if (const char* env = std::getenv("PIXELRL_REMOTE_TIMEOUT_MS")) {
    timeout_ms_ = std::atoi(env);
    if (timeout_ms_ <= 0) timeout_ms_ = 10000;
  }
}

std::string RemoteVictim::post(const std::string& body) const {
  httplib::Client client(host_, port_);
  client.set_connection_timeout(0, timeout_ms_ * 1000);
  client.set_read_timeout(timeout_ms_ / 1000, (timeout_ms_ % 1000) * 1000);
  auto res = client.Post("/v1/query", body, "application/json");
  if (!res) {
    throw QueryError("remote victim unreachable: " +
                     httplib::to_string(res.error()));
  }
  if (res->status >= 500) {
    throw QueryError("remote victim returned status " +
                     std::to_string(res->status));
  }
  if (res->status != 200) {
    throw ProtocolError("remote victim returned status " +
                        std::to_string(res->status));
  }
  return res->body;
}

ClassifierOutput RemoteVictim::classify(const Image& x) const {
  std::string body = post(encode_request(x, VictimTask::classify));
  nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.contains("probs") || !j["probs"].is_array()) {
    throw ProtocolError("malformed classify response");
  }
  ClassifierOutput out;
  double sum = 0.0;
  for (const auto& p : j["probs"]) {
    if (!p.is_number()) throw ProtocolError("non-numeric probability");
    double v = p.get<double>();
    if (v < 0.0) throw ProtocolError("negative probability in response");
    out.probs.push_back(v);
    sum += v;
  }
  if (out.probs.empty() || std::abs(sum - 1.0) > 1e-6) {
    throw ProtocolError("probabilities do not sum to 1");
  }
  return out;
}

DetectorOutput RemoteVictim::detect(const Image& x) const {
  std::string body = post(encode_request(x, VictimTask::detect));
  nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.contains("detections") ||
      !j["detections"].is_array()) {
    throw ProtocolError("malformed detect response");
  }
  DetectorOutput out;
  for (const auto& d : j["detections"]) {
    if (!d.contains("box") || !d["box"].is_array() || d["box"].size() != 4 ||
        !d.contains("class_id") || !d.contains("confidence")) {
      throw ProtocolError("malformed detection entry");
    }
    Detection det;
    det.box = {d["box"][0].get<double>(), d["box"][1].get<double>(),
               d["box"][2].get<double>(), d["box"][3].get<double>()};
    det.class_id = d["class_id"].get<int>();
    det.confidence = d["confidence"].get<double>();
    if (det.confidence < 0.0 || det.confidence > 1.0) {
      throw ProtocolError("confidence outside [0,1]");
    }
    out.candidates.push_back(det);
  }
  return out;
}

}  // namespace pixelrl
