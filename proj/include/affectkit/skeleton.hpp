#pragma once

// 2D skeleton sequences over the 18-keypoint body model, the limb graph used
// by the kinematic features, and the JSON-lines skeleton stream format.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "affectkit/common.hpp"

namespace affectkit {

// Keypoint order of the 18-point body model as emitted by the pose estimator.
enum class Joint : std::uint8_t {
  kNose = 0,
  kNeck,
  kRShoulder,
  kRElbow,
  kRWrist,
  kLShoulder,
  kLElbow,
  kLWrist,
  kRHip,
  kRKnee,
  kRAnkle,
  kLHip,
  kLKnee,
  kLAnkle,
  kREye,
  kLEye,
  kREar,
  kLEar,
};

inline constexpr std::size_t kNumJoints = 18;

constexpr std::size_t idx(Joint j) noexcept { return static_cast<std::size_t>(j); }

inline constexpr std::array<const char*, kNumJoints> kJointNames = {
    "nose",    "neck",   "r_shoulder", "r_elbow", "r_wrist", "l_shoulder",
    "l_elbow", "l_wrist", "r_hip",     "r_knee",  "r_ankle", "l_hip",
    "l_knee",  "l_ankle", "r_eye",     "l_eye",   "r_ear",   "l_ear"};

// Wrists, elbows and shoulders on both sides.
inline constexpr std::array<Joint, 6> kUpperBodyLandmarks = {
    Joint::kRShoulder, Joint::kLShoulder, Joint::kRElbow,
    Joint::kLElbow,    Joint::kRWrist,    Joint::kLWrist};

struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  double confidence = 0.0;  // 0 marks a missing joint

  bool visible() const noexcept { return confidence > 0.0; }
  bool operator==(const Keypoint&) const = default;
};

struct Pose {
  std::int64_t frame = 0;
  std::array<Keypoint, kNumJoints> joints{};

  const Keypoint& operator[](Joint j) const noexcept { return joints[idx(j)]; }
  Keypoint& operator[](Joint j) noexcept { return joints[idx(j)]; }
  bool any_visible() const noexcept {
    return std::any_of(joints.begin(), joints.end(), [](const Keypoint& k) { return k.visible(); });
  }
  bool operator==(const Pose&) const = default;
};

struct SkeletonSequence {
  std::string instance_id;
  std::string movie_id;
  double fps = 30.0;
  std::vector<Pose> frames;

  std::size_t length() const noexcept { return frames.size(); }
  bool operator==(const SkeletonSequence&) const = default;
};

struct Limb {
  std::size_t a = 0;
  std::size_t b = 0;
  bool operator==(const Limb&) const = default;
};

class LimbGraph {
 public:
  LimbGraph() = default;

  explicit LimbGraph(std::vector<Limb> edges) : edges_(std::move(edges)) {
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& e : edges_) {
      if (e.a >= kNumJoints || e.b >= kNumJoints)
        throw SchemaError("limb endpoint out of range: " + std::to_string(e.a) + "-" + std::to_string(e.b));
      if (e.a == e.b) throw SchemaError("limb joins a joint to itself: " + std::to_string(e.a));
      auto key = std::minmax(e.a, e.b);
      if (!seen.insert(key).second)
        throw SchemaError("duplicate limb " + std::to_string(e.a) + "-" + std::to_string(e.b));
    }
  }

  const std::vector<Limb>& edges() const noexcept { return edges_; }
  std::size_t size() const noexcept { return edges_.size(); }
  std::size_t pair_count() const noexcept { return size() < 2 ? 0 : size() * (size() - 1) / 2; }

 private:
  std::vector<Limb> edges_;
};

// 17 natural bones plus 6 cross-body edges.
inline LimbGraph default_limb_graph() {
  using J = Joint;
  auto L = [](J a, J b) { return Limb{idx(a), idx(b)}; };
  return LimbGraph({
      // natural skeleton
      L(J::kNeck, J::kNose),
      L(J::kNeck, J::kRShoulder),
      L(J::kNeck, J::kLShoulder),
      L(J::kRShoulder, J::kRElbow),
      L(J::kRElbow, J::kRWrist),
      L(J::kLShoulder, J::kLElbow),
      L(J::kLElbow, J::kLWrist),
      L(J::kNeck, J::kRHip),
      L(J::kNeck, J::kLHip),
      L(J::kRHip, J::kRKnee),
      L(J::kRKnee, J::kRAnkle),
      L(J::kLHip, J::kLKnee),
      L(J::kLKnee, J::kLAnkle),
      L(J::kNose, J::kREye),
      L(J::kNose, J::kLEye),
      L(J::kREye, J::kREar),
      L(J::kLEye, J::kLEar),
      // cross-body
      L(J::kRShoulder, J::kLShoulder),
      L(J::kRHip, J::kLHip),
      L(J::kRWrist, J::kLWrist),
      L(J::kRAnkle, J::kLAnkle),
      L(J::kRShoulder, J::kRHip),
      L(J::kLShoulder, J::kLHip),
  });
}

// Limb graph file: one edge per line as "i j" or "i,j"; '#' starts a comment.
inline LimbGraph parse_limb_graph(std::istream& in) {
  std::vector<Limb> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    long long a = 0, b = 0;
    if (!(ls >> a)) continue;
    if (!(ls >> b) || a < 0 || b < 0) throw ParseError(lineno, "expected two joint indices");
    edges.push_back({static_cast<std::size_t>(a), static_cast<std::size_t>(b)});
  }
  return LimbGraph(std::move(edges));
}

// ---------------------------------------------------------------------------
// Skeleton stream: one JSON object per line.

inline SkeletonSequence skeleton_from_json(const nlohmann::json& j, std::size_t lineno) {
  auto fail = [lineno](const std::string& msg) -> ParseError { return ParseError(lineno, msg); };
  if (!j.is_object()) throw fail("record is not an object");
  SkeletonSequence seq;
  try {
    seq.instance_id = j.at("instance_id").get<std::string>();
    seq.movie_id = j.at("movie_id").get<std::string>();
    seq.fps = j.at("fps").get<double>();
    const auto& frames = j.at("frames");
    if (!frames.is_array()) throw fail("frames is not an array");
    seq.frames.reserve(frames.size());
    for (const auto& f : frames) {
      Pose pose;
      pose.frame = f.at("t").get<std::int64_t>();
      const auto& joints = f.at("joints");
      if (!joints.is_array() || joints.size() != kNumJoints)
        throw fail("frame " + std::to_string(pose.frame) + " must list " + std::to_string(kNumJoints) + " joints");
      for (std::size_t k = 0; k < kNumJoints; ++k) {
        const auto& kp = joints[k];
        if (!kp.is_array() || kp.size() != 3) throw fail("joint entry must be [x, y, conf]");
        pose.joints[k] = {kp[0].get<double>(), kp[1].get<double>(), kp[2].get<double>()};
        if (pose.joints[k].visible() && !(std::isfinite(pose.joints[k].x) && std::isfinite(pose.joints[k].y)))
          throw fail("visible joint with non-finite coordinate");
      }
      seq.frames.push_back(pose);
    }
  } catch (const nlohmann::json::exception& e) {
    throw fail(e.what());
  }
  if (seq.instance_id.empty()) throw fail("empty instance_id");
  if (!(seq.fps > 0)) throw fail("fps must be positive");
  if (seq.frames.empty()) throw fail("no frames");
  for (std::size_t i = 1; i < seq.frames.size(); ++i)
    if (seq.frames[i].frame <= seq.frames[i - 1].frame) throw fail("frame indices not strictly increasing");
  return seq;
}

inline nlohmann::json skeleton_to_json(const SkeletonSequence& seq) {
  nlohmann::json frames = nlohmann::json::array();
  for (const auto& p : seq.frames) {
    nlohmann::json joints = nlohmann::json::array();
    for (const auto& k : p.joints) joints.push_back({k.x, k.y, k.confidence});
    frames.push_back({{"t", p.frame}, {"joints", std::move(joints)}});
  }
  return {{"instance_id", seq.instance_id}, {"movie_id", seq.movie_id}, {"fps", seq.fps}, {"frames", std::move(frames)}};
}

inline std::vector<SkeletonSequence> parse_skeleton_stream(std::istream& in) {
  std::vector<SkeletonSequence> out;
  std::set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(lineno, std::string("malformed record: ") + e.what());
    }
    auto seq = skeleton_from_json(j, lineno);
    if (!ids.insert(seq.instance_id).second) throw ParseError(lineno, "duplicate instance_id " + seq.instance_id);
    out.push_back(std::move(seq));
  }
  return out;
}

inline void write_skeleton_stream(std::ostream& out, const std::vector<SkeletonSequence>& seqs) {
  for (const auto& s : seqs) out << skeleton_to_json(s).dump() << '\n';
}

// ---------------------------------------------------------------------------
// Ingestion filters.

struct ValidationParams {
  std::size_t min_frames = 100;
  std::size_t max_frames = 300;
  double min_coverage = 0.8;
  std::size_t min_upper_landmarks = 3;
};

enum class RejectReason { kLandmarks, kFrameCount, kCoverage };

inline const char* to_string(RejectReason r) {
  switch (r) {
    case RejectReason::kLandmarks: return "landmarks";
    case RejectReason::kFrameCount: return "frame-count";
    case RejectReason::kCoverage: return "coverage";
  }
  return "?";
}

struct ValidationVerdict {
  std::vector<RejectReason> reasons;
  bool passed() const noexcept { return reasons.empty(); }
  bool has(RejectReason r) const { return std::find(reasons.begin(), reasons.end(), r) != reasons.end(); }
};

inline ValidationVerdict validate_instance(const SkeletonSequence& seq, const ValidationParams& p = {}) {
  ValidationVerdict v;
  std::size_t landmarks = 0;
  for (Joint j : kUpperBodyLandmarks) {
    bool seen = std::any_of(seq.frames.begin(), seq.frames.end(), [j](const Pose& f) { return f[j].visible(); });
    landmarks += seen ? 1 : 0;
  }
  if (landmarks < p.min_upper_landmarks) v.reasons.push_back(RejectReason::kLandmarks);
  const std::size_t T = seq.length();
  if (T < p.min_frames || T > p.max_frames) v.reasons.push_back(RejectReason::kFrameCount);
  std::size_t covered = std::count_if(seq.frames.begin(), seq.frames.end(), [](const Pose& f) { return f.any_visible(); });
  double coverage = T == 0 ? 0.0 : static_cast<double>(covered) / static_cast<double>(T);
  if (coverage < p.min_coverage) v.reasons.push_back(RejectReason::kCoverage);
  return v;
}

}  // namespace affectkit
