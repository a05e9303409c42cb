#pragma once

// Laban Movement Analysis features for 2D skeleton sequences.
//
// Pipeline: scale normalization by mean visible limb length, per-frame series
// for the body (distances), effort (joint and angular kinematics) and shape
// (bounding-box volumes, torso height) families, then max/min/mean/std over
// time. A frame whose dependencies are invisible contributes a missing value.

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "affectkit/common.hpp"
#include "affectkit/skeleton.hpp"

namespace affectkit {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator/(Point2 a, double s) { return {a.x / s, a.y / s}; }
inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

using Series = std::vector<MaybeReal>;
using NormalizedPose = std::array<std::optional<Point2>, kNumJoints>;

struct NormalizedSequence {
  std::vector<NormalizedPose> frames;
  double scale = 1.0;
  std::size_t visible_terms = 0;  // (limb, frame) pairs that entered the scale

  std::size_t length() const noexcept { return frames.size(); }
};

class NormalizationError : public DomainError {
 public:
  using DomainError::DomainError;
};

struct KinematicParams {
  std::size_t tau = 15;
};

inline NormalizedSequence normalize_sequence(const SkeletonSequence& seq, const LimbGraph& limbs) {
  double total = 0.0;
  std::size_t terms = 0;
  for (const auto& pose : seq.frames) {
    for (const auto& e : limbs.edges()) {
      const auto& a = pose.joints[e.a];
      const auto& b = pose.joints[e.b];
      if (!a.visible() || !b.visible()) continue;
      total += std::hypot(a.x - b.x, a.y - b.y);
      ++terms;
    }
  }
  if (terms == 0) throw NormalizationError("no limb with both endpoints visible in " + seq.instance_id);
  const double s = total / static_cast<double>(terms);
  if (!(s > 0.0) || !std::isfinite(s)) throw NormalizationError("zero mean limb length in " + seq.instance_id);

  NormalizedSequence out;
  out.scale = s;
  out.visible_terms = terms;
  out.frames.resize(seq.frames.size());
  for (std::size_t t = 0; t < seq.frames.size(); ++t) {
    for (std::size_t k = 0; k < kNumJoints; ++k) {
      const auto& kp = seq.frames[t].joints[k];
      if (kp.visible()) out.frames[t][k] = Point2{kp.x / s, kp.y / s};
    }
  }
  return out;
}

namespace lma_detail {

inline std::optional<Point2> at(const NormalizedPose& p, Joint j) { return p[idx(j)]; }

inline MaybeReal dist(const NormalizedPose& p, Joint a, Joint b) {
  auto pa = at(p, a);
  auto pb = at(p, b);
  if (!pa || !pb) return std::nullopt;
  return distance(*pa, *pb);
}

inline MaybeReal mean2(MaybeReal a, MaybeReal b) {
  if (!a || !b) return std::nullopt;
  return 0.5 * (*a + *b);
}

inline std::optional<Point2> pelvis(const NormalizedPose& p) {
  auto r = at(p, Joint::kRHip);
  auto l = at(p, Joint::kLHip);
  if (!r || !l) return std::nullopt;
  return Point2{0.5 * (r->x + l->x), 0.5 * (r->y + l->y)};
}

inline std::optional<Point2> centroid(const NormalizedPose& p) {
  double sx = 0, sy = 0;
  std::size_t n = 0;
  for (const auto& j : p) {
    if (!j) continue;
    sx += j->x;
    sy += j->y;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return Point2{sx / static_cast<double>(n), sy / static_cast<double>(n)};
}

// out[t] = (in[t + tau] - in[t]) / tau, missing where either side is missing.
inline Series lag_difference(const Series& in, std::size_t tau) {
  Series out(in.size());
  const double inv = 1.0 / static_cast<double>(tau);
  for (std::size_t t = 0; t + tau < in.size(); ++t)
    if (in[t] && in[t + tau]) out[t] = (*in[t + tau] - *in[t]) * inv;
  return out;
}

using VectorSeries = std::vector<std::optional<Point2>>;

inline VectorSeries lag_difference(const VectorSeries& in, std::size_t tau) {
  VectorSeries out(in.size());
  const double inv = 1.0 / static_cast<double>(tau);
  for (std::size_t t = 0; t + tau < in.size(); ++t)
    if (in[t] && in[t + tau]) out[t] = Point2{(in[t + tau]->x - in[t]->x) * inv, (in[t + tau]->y - in[t]->y) * inv};
  return out;
}

inline Series magnitude(const VectorSeries& in) {
  Series out(in.size());
  for (std::size_t t = 0; t < in.size(); ++t)
    if (in[t]) out[t] = norm(*in[t]);
  return out;
}

inline Series mean_series(const Series& a, const Series& b) {
  Series out(a.size());
  for (std::size_t t = 0; t < a.size(); ++t) out[t] = mean2(a[t], b[t]);
  return out;
}

// Angle in [0, pi] between two direction vectors. atan2(|cross|, dot) equals
// acos of the normalized dot product and stays well conditioned near 0 and pi.
inline double vector_angle(Point2 u, Point2 v) {
  const double cross = u.x * v.y - u.y * v.x;
  const double dot = u.x * v.x + u.y * v.y;
  return std::atan2(std::abs(cross), dot);
}

inline void limb_angle_series(const NormalizedSequence& nseq, const Limb& l1, const Limb& l2, Series& out) {
  out.assign(nseq.length(), std::nullopt);
  for (std::size_t t = 0; t < nseq.length(); ++t) {
    const auto& p = nseq.frames[t];
    const auto& a = p[l1.a];
    const auto& b = p[l1.b];
    const auto& c = p[l2.a];
    const auto& d = p[l2.b];
    if (!a || !b || !c || !d) continue;
    const Point2 u = *a - *b;
    const Point2 v = *c - *d;
    if (norm(u) == 0.0 || norm(v) == 0.0) continue;
    out[t] = vector_angle(u, v);
  }
}

}  // namespace lma_detail

// ---------------------------------------------------------------------------
// Body component.

struct BodySeries {
  Series feet_hip;         // f1
  Series hands_shoulder;   // f2
  Series hands;            // f3
  Series hands_head;       // f4
  Series centroid_pelvis;  // f8
  Series gait;             // f9
};

inline BodySeries body_features(const NormalizedSequence& nseq) {
  using namespace lma_detail;
  using J = Joint;
  BodySeries b;
  const std::size_t T = nseq.length();
  for (Series* s : {&b.feet_hip, &b.hands_shoulder, &b.hands, &b.hands_head, &b.centroid_pelvis, &b.gait})
    s->resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    const auto& p = nseq.frames[t];
    b.feet_hip[t] = mean2(dist(p, J::kRAnkle, J::kRHip), dist(p, J::kLAnkle, J::kLHip));
    b.hands_shoulder[t] = mean2(dist(p, J::kRWrist, J::kRShoulder), dist(p, J::kLWrist, J::kLShoulder));
    b.hands[t] = dist(p, J::kRWrist, J::kLWrist);
    b.hands_head[t] = mean2(dist(p, J::kRWrist, J::kNose), dist(p, J::kLWrist, J::kNose));
    auto c = centroid(p);
    auto pv = pelvis(p);
    if (c && pv) b.centroid_pelvis[t] = distance(*c, *pv);
    b.gait[t] = dist(p, J::kRAnkle, J::kLAnkle);
  }
  return b;
}

// ---------------------------------------------------------------------------
// Effort component: joint kinematics.

enum class JointGroup { kShoulders, kElbows, kHands, kHip, kKnees, kFeet };

inline constexpr std::array<JointGroup, 6> kJointGroups = {JointGroup::kShoulders, JointGroup::kElbows,
                                                            JointGroup::kHands,     JointGroup::kHip,
                                                            JointGroup::kKnees,     JointGroup::kFeet};

inline std::pair<Joint, Joint> group_joints(JointGroup g) {
  switch (g) {
    case JointGroup::kShoulders: return {Joint::kRShoulder, Joint::kLShoulder};
    case JointGroup::kElbows: return {Joint::kRElbow, Joint::kLElbow};
    case JointGroup::kHands: return {Joint::kRWrist, Joint::kLWrist};
    case JointGroup::kHip: return {Joint::kRHip, Joint::kLHip};
    case JointGroup::kKnees: return {Joint::kRKnee, Joint::kLKnee};
    case JointGroup::kFeet: return {Joint::kRAnkle, Joint::kLAnkle};
  }
  return {Joint::kNose, Joint::kNose};
}

struct KinematicSeries {
  Series speed;
  Series acceleration;
  Series jerk;
};

// Kinematics of a single joint track.
inline KinematicSeries track_kinematics(const lma_detail::VectorSeries& track, std::size_t tau) {
  using namespace lma_detail;
  auto v = lag_difference(track, tau);
  auto a = lag_difference(v, tau);
  auto j = lag_difference(a, tau);
  return {magnitude(v), magnitude(a), magnitude(j)};
}

inline void check_tau(const NormalizedSequence& nseq, const KinematicParams& params) {
  if (params.tau < 1 || params.tau >= nseq.length())
    throw DomainError("tau must satisfy 1 <= tau < T (tau=" + std::to_string(params.tau) +
                      ", T=" + std::to_string(nseq.length()) + ")");
}

// Per-frame magnitudes for one joint group; left and right are averaged per frame.
inline KinematicSeries group_kinematics(const NormalizedSequence& nseq, JointGroup g, const KinematicParams& params) {
  check_tau(nseq, params);
  auto [rj, lj] = group_joints(g);
  lma_detail::VectorSeries right(nseq.length()), left(nseq.length());
  for (std::size_t t = 0; t < nseq.length(); ++t) {
    right[t] = nseq.frames[t][idx(rj)];
    left[t] = nseq.frames[t][idx(lj)];
  }
  auto kr = track_kinematics(right, params.tau);
  auto kl = track_kinematics(left, params.tau);
  using lma_detail::mean_series;
  return {mean_series(kr.speed, kl.speed), mean_series(kr.acceleration, kl.acceleration),
          mean_series(kr.jerk, kl.jerk)};
}

inline std::array<KinematicSeries, 6> joint_kinematics(const NormalizedSequence& nseq, const KinematicParams& params) {
  std::array<KinematicSeries, 6> out;
  for (std::size_t g = 0; g < kJointGroups.size(); ++g) out[g] = group_kinematics(nseq, kJointGroups[g], params);
  return out;
}

// ---------------------------------------------------------------------------
// Effort component: angular kinematics for every unordered limb pair.

struct AngularSeries {
  std::size_t first = 0;   // edge index in the limb graph
  std::size_t second = 0;  // edge index, first < second
  Series theta;
  Series omega;
  Series alpha;
};

inline std::vector<AngularSeries> angular_kinematics(const NormalizedSequence& nseq, const LimbGraph& limbs,
                                                     const KinematicParams& params) {
  check_tau(nseq, params);
  std::vector<AngularSeries> out;
  out.reserve(limbs.pair_count());
  const auto& e = limbs.edges();
  for (std::size_t i = 0; i < e.size(); ++i) {
    for (std::size_t k = i + 1; k < e.size(); ++k) {
      AngularSeries s;
      s.first = i;
      s.second = k;
      lma_detail::limb_angle_series(nseq, e[i], e[k], s.theta);
      s.omega = lma_detail::lag_difference(s.theta, params.tau);
      s.alpha = lma_detail::lag_difference(s.omega, params.tau);
      out.push_back(std::move(s));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Shape component.

struct ShapeSeries {
  Series volume;        // f19
  Series volume_upper;  // f20
  Series volume_lower;  // f21
  Series volume_left;   // f22
  Series volume_right;  // f23
  Series torso_height;  // f24
};

namespace lma_detail {

inline constexpr std::array<Joint, 12> kUpperSet = {Joint::kNose,   Joint::kNeck,   Joint::kRShoulder, Joint::kRElbow,
                                                    Joint::kRWrist, Joint::kLShoulder, Joint::kLElbow, Joint::kLWrist,
                                                    Joint::kREye,   Joint::kLEye,   Joint::kREar,      Joint::kLEar};
inline constexpr std::array<Joint, 6> kLowerSet = {Joint::kRHip,   Joint::kRKnee, Joint::kRAnkle,
                                                   Joint::kLHip,   Joint::kLKnee, Joint::kLAnkle};
inline constexpr std::array<Joint, 8> kLeftSet = {Joint::kLShoulder, Joint::kLElbow, Joint::kLWrist, Joint::kLHip,
                                                  Joint::kLKnee,     Joint::kLAnkle, Joint::kLEye,   Joint::kLEar};
inline constexpr std::array<Joint, 8> kRightSet = {Joint::kRShoulder, Joint::kRElbow, Joint::kRWrist, Joint::kRHip,
                                                   Joint::kRKnee,     Joint::kRAnkle, Joint::kREye,   Joint::kREar};

// Axis-aligned bounding-box area, missing with fewer than two distinct points.
template <typename Joints>
MaybeReal box_area(const NormalizedPose& p, const Joints& joints) {
  std::optional<Point2> first;
  bool distinct = false;
  double minx = 0, maxx = 0, miny = 0, maxy = 0;
  for (Joint j : joints) {
    auto q = at(p, j);
    if (!q) continue;
    if (!first) {
      first = q;
      minx = maxx = q->x;
      miny = maxy = q->y;
      continue;
    }
    if (q->x != first->x || q->y != first->y) distinct = true;
    minx = std::min(minx, q->x);
    maxx = std::max(maxx, q->x);
    miny = std::min(miny, q->y);
    maxy = std::max(maxy, q->y);
  }
  if (!distinct) return std::nullopt;
  return (maxx - minx) * (maxy - miny);
}

inline std::array<Joint, kNumJoints> all_joints() {
  std::array<Joint, kNumJoints> a{};
  for (std::size_t k = 0; k < kNumJoints; ++k) a[k] = static_cast<Joint>(k);
  return a;
}

}  // namespace lma_detail

inline ShapeSeries shape_features(const NormalizedSequence& nseq) {
  using namespace lma_detail;
  ShapeSeries s;
  const std::size_t T = nseq.length();
  for (Series* x : {&s.volume, &s.volume_upper, &s.volume_lower, &s.volume_left, &s.volume_right, &s.torso_height})
    x->resize(T);
  static const auto everything = all_joints();
  for (std::size_t t = 0; t < T; ++t) {
    const auto& p = nseq.frames[t];
    s.volume[t] = box_area(p, everything);
    s.volume_upper[t] = box_area(p, kUpperSet);
    s.volume_lower[t] = box_area(p, kLowerSet);
    s.volume_left[t] = box_area(p, kLeftSet);
    s.volume_right[t] = box_area(p, kRightSet);
    auto neck = at(p, Joint::kNeck);
    auto pv = pelvis(p);
    if (neck && pv) s.torso_height[t] = distance(*neck, *pv);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Temporal summary.

struct Summary {
  MaybeReal max;
  MaybeReal min;
  MaybeReal mean;
  MaybeReal std;  // population standard deviation
};

inline Summary summarize(const Series& series) {
  double mx = 0, mn = 0, sum = 0;
  std::size_t n = 0;
  for (const auto& v : series) {
    if (!v) continue;
    if (n == 0) {
      mx = mn = *v;
    } else {
      mx = std::max(mx, *v);
      mn = std::min(mn, *v);
    }
    sum += *v;
    ++n;
  }
  if (n < 2) return {};
  const double mean = sum / static_cast<double>(n);
  double ss = 0;
  for (const auto& v : series)
    if (v) ss += (*v - mean) * (*v - mean);
  return {mx, mn, mean, std::sqrt(ss / static_cast<double>(n))};
}

// ---------------------------------------------------------------------------
// Feature layout and full extraction.

inline constexpr std::size_t kScalarFeatureRows = 30;
inline constexpr std::array<const char*, 4> kStatNames = {"max", "min", "mean", "std"};

inline constexpr std::size_t lma_dim(std::size_t limb_count) {
  return 4 * (kScalarFeatureRows + 2 * (limb_count * (limb_count - 1) / 2));
}

// 30 scalar rows x 4 + 2 angular rows x 4 x C(23, 2).
inline constexpr std::size_t kLmaDim = lma_dim(23);
static_assert(kLmaDim == 2144);

namespace lma_detail {

inline constexpr std::array<const char*, 6> kBodyIds = {"f1", "f2", "f3", "f4", "f8", "f9"};
// Rows: velocity, acceleration, jerk. Columns follow kJointGroups.
inline constexpr std::array<std::array<const char*, 6>, 3> kKinematicIds = {{
    {"f29", "f32", "f13", "f12", "f35", "f14"},
    {"f30", "f33", "f16", "f15", "f36", "f17"},
    {"f31", "f34", "f40", "f18", "f37", "f41"},
}};
inline constexpr std::array<const char*, 6> kShapeIds = {"f19", "f20", "f21", "f22", "f23", "f24"};

inline std::string pair_tag(std::size_t i, std::size_t k) {
  return "e" + std::to_string(i) + "_e" + std::to_string(k);
}

}  // namespace lma_detail

// Canonical column order: body, kinematic, angular (f38 then f39, each by
// edge-pair lexicographic order), shape; every row expands to max/min/mean/std.
inline std::vector<std::string> lma_feature_names(const LimbGraph& limbs) {
  using namespace lma_detail;
  std::vector<std::string> rows;
  for (auto id : kBodyIds) rows.emplace_back(id);
  for (const auto& r : kKinematicIds)
    for (auto id : r) rows.emplace_back(id);
  for (const char* f : {"f38", "f39"})
    for (std::size_t i = 0; i < limbs.size(); ++i)
      for (std::size_t k = i + 1; k < limbs.size(); ++k) rows.push_back(std::string(f) + "_" + pair_tag(i, k));
  for (auto id : kShapeIds) rows.emplace_back(id);
  std::vector<std::string> names;
  names.reserve(rows.size() * 4);
  for (const auto& r : rows)
    for (auto st : kStatNames) names.push_back(r + "_" + st);
  return names;
}

struct LmaFeatureVector {
  std::vector<MaybeReal> values;  // aligned with lma_feature_names()

  std::size_t size() const noexcept { return values.size(); }
  bool operator==(const LmaFeatureVector&) const = default;
};

inline LmaFeatureVector extract_all(const SkeletonSequence& seq, const LimbGraph& limbs,
                                    const KinematicParams& params = {}) {
  const auto nseq = normalize_sequence(seq, limbs);
  check_tau(nseq, params);

  LmaFeatureVector fv;
  fv.values.reserve(lma_dim(limbs.size()));
  auto push = [&fv](const Series& s) {
    auto sm = summarize(s);
    fv.values.push_back(sm.max);
    fv.values.push_back(sm.min);
    fv.values.push_back(sm.mean);
    fv.values.push_back(sm.std);
  };

  const auto body = body_features(nseq);
  for (const Series* s : {&body.feet_hip, &body.hands_shoulder, &body.hands, &body.hands_head, &body.centroid_pelvis,
                          &body.gait})
    push(*s);

  const auto kin = joint_kinematics(nseq, params);
  for (const auto& k : kin) push(k.speed);
  for (const auto& k : kin) push(k.acceleration);
  for (const auto& k : kin) push(k.jerk);

  // Angular rows: f38 block for every pair, then f39 block. Alpha summaries are
  // buffered so theta is computed once per pair.
  const auto& e = limbs.edges();
  std::vector<Summary> alpha_summaries;
  alpha_summaries.reserve(limbs.pair_count());
  Series theta;
  for (std::size_t i = 0; i < e.size(); ++i) {
    for (std::size_t k = i + 1; k < e.size(); ++k) {
      lma_detail::limb_angle_series(nseq, e[i], e[k], theta);
      auto omega = lma_detail::lag_difference(theta, params.tau);
      push(omega);
      alpha_summaries.push_back(summarize(lma_detail::lag_difference(omega, params.tau)));
    }
  }
  for (const auto& sm : alpha_summaries) {
    fv.values.push_back(sm.max);
    fv.values.push_back(sm.min);
    fv.values.push_back(sm.mean);
    fv.values.push_back(sm.std);
  }

  const auto shape = shape_features(nseq);
  for (const Series* s : {&shape.volume, &shape.volume_upper, &shape.volume_lower, &shape.volume_left,
                          &shape.volume_right, &shape.torso_height})
    push(*s);
  return fv;
}

// Batch extraction; result order equals input order for any thread count.
// Sequences that cannot be normalized yield an empty vector.
inline std::vector<LmaFeatureVector> extract_batch(const std::vector<SkeletonSequence>& seqs, const LimbGraph& limbs,
                                                   const KinematicParams& params, unsigned threads) {
  std::vector<LmaFeatureVector> out(seqs.size());
  parallel_for(seqs.size(), threads, [&](std::size_t i) {
    try {
      out[i] = extract_all(seqs[i], limbs, params);
    } catch (const NormalizationError&) {
      out[i] = {};
    }
  });
  return out;
}

// Delimited feature table: header "instance_id,<names>", missing as empty field.
inline void write_feature_table(std::ostream& out, const std::vector<std::string>& names,
                                const std::vector<std::string>& ids, const std::vector<LmaFeatureVector>& rows) {
  out << "instance_id";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << ids[r];
    for (const auto& v : rows[r].values) out << ',' << text::format_maybe(v);
    out << '\n';
  }
}

struct FeatureTable {
  std::vector<std::string> names;
  std::vector<std::string> ids;
  std::vector<std::vector<MaybeReal>> rows;

  std::optional<std::size_t> column(const std::string& name) const {
    for (std::size_t c = 0; c < names.size(); ++c)
      if (names[c] == name) return c;
    return std::nullopt;
  }
};

inline FeatureTable read_feature_table(std::istream& in) {
  FeatureTable t;
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("feature table is empty");
  auto header = text::split(text::trim(line), ',');
  if (header.empty() || header[0] != "instance_id") throw SchemaError("feature table must start with instance_id");
  t.names.assign(header.begin() + 1, header.end());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    auto cells = text::split(text::trim(line), ',');
    if (cells.size() != header.size())
      throw ParseError(lineno, "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(cells.size()));
    t.ids.push_back(cells[0]);
    std::vector<MaybeReal> row(t.names.size());
    for (std::size_t c = 1; c < cells.size(); ++c) {
      if (text::trim(cells[c]).empty()) continue;
      auto v = text::parse_double(cells[c]);
      if (!v) throw ParseError(lineno, "bad number in column " + header[c]);
      row[c - 1] = *v;
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace affectkit
