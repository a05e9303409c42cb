#pragma once

// Synthetic data: annotator populations with planted ground truth, chance
// label/prediction tables, and analytic skeleton motions.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "affectkit/annotations.hpp"
#include "affectkit/lma.hpp"
#include "affectkit/metrics.hpp"
#include "affectkit/skeleton.hpp"

namespace affectkit::sim {

// Generator keyed by (seed, stream, index); results do not depend on the
// order in which items are generated.
inline std::mt19937_64 keyed_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq sq{lo(seed), hi(seed), lo(stream), hi(stream), lo(index), hi(index)};
  return std::mt19937_64(sq);
}

inline std::string padded(const char* prefix, std::size_t i, int width = 5) {
  std::string n = std::to_string(i);
  return prefix + std::string(n.size() < static_cast<std::size_t>(width) ? width - n.size() : 0, '0') + n;
}

// ---------------------------------------------------------------------------
// Annotators.

enum class Role { kHonest, kDishonest, kExotic };
inline constexpr std::array<const char*, 3> kRoleNames = {"honest", "dishonest", "exotic"};

inline double default_flip(Role r) {
  switch (r) {
    case Role::kHonest: return 0.1;
    case Role::kDishonest: return 0.5;
    case Role::kExotic: return 0.1;
  }
  return 0.1;
}

struct AnnotatorSpec {
  Role role = Role::kHonest;
  std::size_t count = 1;
  double sigma = 1.0;            // Gaussian noise on 1..10 scores (honest, exotic)
  int offset = 2;                // exotic: constant shift on every dimension
  std::optional<double> flip;    // categorical flip probability; role default when unset
  double corrupted_rate = 0.0;   // fraction of answers marked corrupted
};

struct PlantedInstance {
  std::string instance_id;
  std::string movie_id;
  std::array<bool, kNumCategories> categories{};
  std::array<int, 3> vad{};  // 1..10
  Gender gender = Gender::kMale;
  AgeGroup age = AgeGroup::kAdult;
  Ethnicity ethnicity = Ethnicity::kOther;
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 0;
};

struct TruthSpec {
  std::size_t n_instances = 100;
  double positive_rate = 0.1055;  // per category
  std::size_t instances_per_movie = 10;
  std::int64_t clip_frames = 300;
};

inline std::vector<PlantedInstance> gen_truth(const TruthSpec& spec, std::uint64_t seed) {
  std::vector<PlantedInstance> out(spec.n_instances);
  for (std::size_t i = 0; i < spec.n_instances; ++i) {
    auto rng = keyed_rng(seed, 1, i);
    std::bernoulli_distribution pos(spec.positive_rate);
    std::uniform_int_distribution<int> score(1, 10);
    auto& t = out[i];
    t.instance_id = padded("i", i);
    t.movie_id = padded("m", i / std::max<std::size_t>(spec.instances_per_movie, 1), 4);
    for (auto& c : t.categories) c = pos(rng);
    for (auto& v : t.vad) v = score(rng);
    t.gender = static_cast<Gender>(std::uniform_int_distribution<int>(0, 1)(rng));
    t.age = static_cast<AgeGroup>(std::uniform_int_distribution<int>(0, 2)(rng));
    t.ethnicity = static_cast<Ethnicity>(std::uniform_int_distribution<int>(0, 6)(rng));
    t.start_frame = std::uniform_int_distribution<std::int64_t>(0, spec.clip_frames / 4)(rng);
    t.end_frame = std::uniform_int_distribution<std::int64_t>(3 * spec.clip_frames / 4, spec.clip_frames)(rng);
  }
  return out;
}

struct Population {
  std::vector<std::string> workers;  // sorted ids
  std::map<std::string, Role> roles;
  std::map<std::string, const AnnotatorSpec*> specs;
};

inline Population expand_population(const std::vector<AnnotatorSpec>& specs) {
  if (specs.empty()) throw DomainError("annotator specs are empty");
  Population p;
  std::size_t k = 0;
  for (const auto& s : specs) {
    if (s.sigma < 0) throw DomainError("annotator sigma must be non-negative");
    if (s.offset < -9 || s.offset > 9) throw DomainError("exotic offset must lie in -9..9");
    for (std::size_t c = 0; c < s.count; ++c, ++k) {
      auto id = padded("w", k, 4);
      p.workers.push_back(id);
      p.roles[id] = s.role;
      p.specs[id] = &s;
    }
  }
  return p;
}

struct AnnotationOptions {
  // Annotators drawn per instance without replacement; 0 means every worker
  // annotates every instance.
  std::size_t per_instance = 0;
};

struct SimAnnotations {
  std::vector<AnnotationRecord> records;
  std::vector<PlantedInstance> truth;
  std::map<std::string, Role> roles;
};

// Fixed label-permutation bias of exotic workers: category c is answered
// from the truth of category (c + 1) mod 26.
inline std::size_t exotic_source(std::size_t c) { return (c + 1) % kNumCategories; }

inline AnnotationRecord annotate(const PlantedInstance& t, const std::string& worker, const AnnotatorSpec& spec,
                                 std::mt19937_64& rng) {
  AnnotationRecord r;
  r.instance_id = t.instance_id;
  r.participant_id = worker;
  r.movie_id = t.movie_id;
  r.start_frame = t.start_frame;
  r.end_frame = t.end_frame;
  const double flip = spec.flip.value_or(default_flip(spec.role));
  std::bernoulli_distribution flip_d(flip);
  std::bernoulli_distribution corrupt_d(spec.corrupted_rate);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_int_distribution<int> score(1, 10);
  auto clip = [](double v) { return static_cast<int>(std::clamp(std::lround(v), 1L, 10L)); };

  // Draw every variate regardless of the branch taken so the stream layout is
  // the same for all roles.
  const bool corrupted = corrupt_d(rng);
  std::array<bool, kNumCategories> flips{};
  for (auto& f : flips) f = flip_d(rng);
  std::array<double, 3> z{};
  for (auto& v : z) v = noise(rng);
  std::array<int, 3> u{};
  for (auto& v : u) v = score(rng);
  const int g = std::uniform_int_distribution<int>(0, 1)(rng);
  const int a = std::uniform_int_distribution<int>(0, 2)(rng);
  const int e = std::uniform_int_distribution<int>(0, 6)(rng);

  if (corrupted) {
    r.corrupted = true;
    return r;
  }
  for (std::size_t c = 0; c < kNumCategories; ++c) {
    switch (spec.role) {
      case Role::kHonest: r.categories[c] = t.categories[c] != flips[c]; break;
      case Role::kDishonest: r.categories[c] = flips[c]; break;
      case Role::kExotic: r.categories[c] = flips[c] ? t.categories[exotic_source(c)] : t.categories[c]; break;
    }
  }
  std::array<int, 3> s{};
  for (std::size_t d = 0; d < 3; ++d) {
    switch (spec.role) {
      case Role::kHonest: s[d] = clip(t.vad[d] + spec.sigma * z[d]); break;
      case Role::kDishonest: s[d] = u[d]; break;
      case Role::kExotic: s[d] = clip(t.vad[d] + spec.offset + spec.sigma * z[d]); break;
    }
  }
  r.valence = s[0];
  r.arousal = s[1];
  r.dominance = s[2];
  if (spec.role == Role::kDishonest) {
    r.gender = static_cast<Gender>(g);
    r.age = static_cast<AgeGroup>(a);
    r.ethnicity = static_cast<Ethnicity>(e);
  } else {
    r.gender = t.gender;
    r.age = t.age;
    r.ethnicity = t.ethnicity;
  }
  return r;
}

// Records ordered by instance, then worker id.
inline SimAnnotations gen_annotations(const std::vector<AnnotatorSpec>& specs, std::vector<PlantedInstance> truth,
                                      std::uint64_t seed, const AnnotationOptions& opt = {}) {
  auto pop = expand_population(specs);
  SimAnnotations out;
  out.roles = pop.roles;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    std::vector<std::size_t> chosen(pop.workers.size());
    std::iota(chosen.begin(), chosen.end(), 0);
    if (opt.per_instance > 0 && opt.per_instance < chosen.size()) {
      auto rng = keyed_rng(seed, 2, i);
      std::shuffle(chosen.begin(), chosen.end(), rng);
      chosen.resize(opt.per_instance);
      std::sort(chosen.begin(), chosen.end());
    }
    for (auto w : chosen) {
      auto rng = keyed_rng(seed, 3, i * 1000003ULL + w);
      const auto& id = pop.workers[w];
      out.records.push_back(annotate(truth[i], id, *pop.specs.at(id), rng));
    }
  }
  out.truth = std::move(truth);
  return out;
}

inline SimAnnotations gen_annotations(const std::vector<AnnotatorSpec>& specs, const TruthSpec& truth,
                                      std::uint64_t seed, const AnnotationOptions& opt = {}) {
  return gen_annotations(specs, gen_truth(truth, seed), seed, opt);
}

// ---------------------------------------------------------------------------
// Label and prediction tables.

// Binary labels drawn per category at `positive_rate`; VAD uniform on [0.1, 1].
inline std::vector<AggregatedLabel> gen_label_table(std::size_t n, double positive_rate, std::uint64_t seed) {
  std::vector<AggregatedLabel> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = keyed_rng(seed, 4, i);
    std::bernoulli_distribution pos(positive_rate);
    std::uniform_int_distribution<int> score(1, 10);
    auto& l = out[i];
    l.instance_id = padded("i", i, 6);
    l.movie_id = padded("m", i / 10, 5);
    for (std::size_t c = 0; c < kNumCategories; ++c) {
      l.binary_labels[c] = pos(rng);
      l.ds_scores[c] = l.binary_labels[c] ? 1.0 : 0.0;
    }
    for (auto& v : l.vad) v = score(rng) / 10.0;
    l.confidence = 1.0;
    l.split = Split::kTest;
    l.interval = {0, 300};
  }
  return out;
}

// Chance predictor: uniform random category scores; each dimension predicted
// as the label mean, the best constant under squared error.
inline std::vector<Prediction> gen_chance_predictions(std::span<const AggregatedLabel> labels, std::uint64_t seed) {
  std::array<double, 3> mean{};
  for (const auto& l : labels)
    for (std::size_t d = 0; d < 3; ++d) mean[d] += l.vad[d];
  for (auto& m : mean) m /= std::max<double>(1.0, static_cast<double>(labels.size()));
  std::vector<Prediction> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto rng = keyed_rng(seed, 5, i);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    out[i].instance_id = labels[i].instance_id;
    for (auto& s : out[i].scores) s = u(rng);
    out[i].vad = mean;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Skeleton motions. Coordinates are pixels, y pointing down.

enum class MotionKind { kStationary, kUniform, kQuadratic, kRotation, kComposite };

struct MotionSpec {
  MotionKind kind = MotionKind::kStationary;
  std::size_t frames = 300;
  double fps = 30.0;
  std::vector<std::size_t> joints;  // moving subset for uniform/quadratic; empty = all
  Point2 origin{400.0, 300.0};
  double body_scale = 50.0;         // pixels per rest-pose unit
  Point2 velocity{1.0, 0.0};        // px/frame (uniform)
  Point2 acceleration{0.01, 0.0};   // px/frame^2 (quadratic, from rest)
  double omega = 0.01;              // rad/frame: right forearm about the elbow (rotation)
  double start_angle = 0.1;         // initial forearm / upper-arm angle (rotation)
  double oscillation = 0.2;         // composite: max per-joint amplitude in rest units
  double missing_rate = 0.0;        // probability that a joint is dropped in a frame
  std::string instance_id = "sim";
  std::string movie_id = "sim";
};

// Standing rest pose in body units.
inline std::array<Point2, kNumJoints> rest_pose() {
  return {{{0.0, -3.0},   {0.0, -2.4},  {-0.8, -2.4}, {-1.0, -1.6}, {-1.1, -0.8}, {0.8, -2.4},
           {1.0, -1.6},   {1.1, -0.8},  {-0.4, 0.0},  {-0.45, 1.1}, {-0.5, 2.2},  {0.4, 0.0},
           {0.45, 1.1},   {0.5, 2.2},   {-0.15, -3.15}, {0.15, -3.15}, {-0.3, -3.05}, {0.3, -3.05}}};
}

inline Point2 rotate(Point2 p, double a) {
  const double c = std::cos(a), s = std::sin(a);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

// Pure function of (spec, seed). The seed drives the composite motion
// parameters and the missing-joint mask.
inline SkeletonSequence gen_skeletons(const MotionSpec& spec, std::uint64_t seed) {
  if (spec.frames == 0) throw DomainError("motion needs at least one frame");
  if (!(spec.body_scale > 0)) throw DomainError("body scale must be positive");
  std::array<bool, kNumJoints> moving{};
  if (spec.joints.empty()) moving.fill(true);
  for (auto j : spec.joints) {
    if (j >= kNumJoints) throw DomainError("joint index out of range");
    moving[j] = true;
  }
  const auto rest = rest_pose();

  struct Osc {
    double amp, freq, phase, dir;
  };
  std::array<Osc, kNumJoints> osc{};
  Point2 drift{};
  if (spec.kind == MotionKind::kComposite) {
    auto rng = keyed_rng(seed, 6, 0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& o : osc) {
      o.amp = spec.oscillation * u(rng);
      o.freq = 0.02 + 0.2 * u(rng);
      o.phase = 2 * std::numbers::pi * u(rng);
      o.dir = 2 * std::numbers::pi * u(rng);
    }
    drift = {2.0 * u(rng) - 1.0, 2.0 * u(rng) - 1.0};
  }

  SkeletonSequence seq;
  seq.instance_id = spec.instance_id;
  seq.movie_id = spec.movie_id;
  seq.fps = spec.fps;
  seq.frames.resize(spec.frames);
  auto mask_rng = keyed_rng(seed, 7, 0);
  std::bernoulli_distribution drop(spec.missing_rate);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    const double tt = static_cast<double>(t);
    auto& pose = seq.frames[t];
    pose.frame = static_cast<std::int64_t>(t);
    for (std::size_t j = 0; j < kNumJoints; ++j) {
      Point2 p{spec.origin.x + spec.body_scale * rest[j].x, spec.origin.y + spec.body_scale * rest[j].y};
      switch (spec.kind) {
        case MotionKind::kStationary: break;
        case MotionKind::kUniform:
          if (moving[j]) p = p + Point2{spec.velocity.x * tt, spec.velocity.y * tt};
          break;
        case MotionKind::kQuadratic:
          if (moving[j]) p = p + Point2{0.5 * spec.acceleration.x * tt * tt, 0.5 * spec.acceleration.y * tt * tt};
          break;
        case MotionKind::kRotation:
          if (j == idx(Joint::kRWrist)) {
            // Forearm vector elbow - wrist at angle start_angle + omega t from
            // the upper-arm vector shoulder - elbow.
            const Point2 sh{spec.origin.x + spec.body_scale * rest[idx(Joint::kRShoulder)].x,
                            spec.origin.y + spec.body_scale * rest[idx(Joint::kRShoulder)].y};
            const Point2 el{spec.origin.x + spec.body_scale * rest[idx(Joint::kRElbow)].x,
                            spec.origin.y + spec.body_scale * rest[idx(Joint::kRElbow)].y};
            const Point2 up = sh - el;
            const Point2 dir = rotate(up / norm(up), spec.start_angle + spec.omega * tt);
            const double len = spec.body_scale * distance(rest[idx(Joint::kRElbow)], rest[idx(Joint::kRWrist)]);
            p = el - Point2{dir.x * len, dir.y * len};
          }
          break;
        case MotionKind::kComposite: {
          const auto& o = osc[j];
          const double s = spec.body_scale * o.amp * std::sin(o.freq * tt + o.phase);
          p = p + Point2{s * std::cos(o.dir) + drift.x * tt, s * std::sin(o.dir) + drift.y * tt};
          break;
        }
      }
      const bool dropped = drop(mask_rng);
      pose.joints[j] = {p.x, p.y, dropped ? 0.0 : 1.0};
      if (dropped) pose.joints[j].x = pose.joints[j].y = 0.0;
    }
  }
  return seq;
}

// Similarity transform x -> k R(angle) x + shift on every visible joint.
inline SkeletonSequence transform_sequence(SkeletonSequence seq, double k, double angle, Point2 shift) {
  for (auto& pose : seq.frames)
    for (auto& kp : pose.joints) {
      if (!kp.visible()) continue;
      const Point2 q = rotate({kp.x, kp.y}, angle);
      kp.x = k * q.x + shift.x;
      kp.y = k * q.y + shift.y;
    }
  return seq;
}

}  // namespace affectkit::sim
