#pragma once

// Annotation quality control: category/dimension sanity rules, relaxed gold
// standard controls, HIT outcomes, per-participant reliability and the
// blocking/exclusion policy.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "affectkit/annotations.hpp"
#include "affectkit/common.hpp"

namespace affectkit {

// ---------------------------------------------------------------------------
// Sanity rules. On the 1..10 scale "above midpoint" means >= 6 and "below
// midpoint" means <= 5.

struct SanityRuleTable {
  std::vector<std::size_t> valence_above;
  std::vector<std::size_t> valence_below;
  std::vector<std::size_t> arousal_below;
  std::vector<std::size_t> arousal_above;
};

inline const SanityRuleTable& default_sanity_rules() {
  static const SanityRuleTable rules = [] {
    auto ids = [](std::initializer_list<std::string_view> names) {
      std::vector<std::size_t> out;
      for (auto n : names) out.push_back(*category_index(n));
      return out;
    };
    SanityRuleTable t;
    t.valence_above = ids({"affection", "esteem", "happiness", "pleasure"});
    t.valence_below = ids({"disapproval", "aversion", "annoyance", "anger", "sensitivity", "sadness", "disquietment",
                           "fear", "pain", "suffering"});
    t.arousal_below = ids({"peace"});
    t.arousal_above = ids({"excitement"});
    return t;
  }();
  return rules;
}

struct SanityViolation {
  std::size_t category = 0;
  Dimension dimension = Dimension::kValence;
  bool expected_above = false;
  int observed = 0;

  std::string describe() const {
    return std::string(kCategoryNames[category]) + " expects " + (expected_above ? "above" : "below") +
           "-midpoint " + std::string(kDimensionNames[static_cast<std::size_t>(dimension)]) + ", got " +
           std::to_string(observed);
  }
  bool operator==(const SanityViolation&) const = default;
};

inline constexpr int kAboveMidpoint = 6;
inline constexpr int kBelowMidpoint = 5;

inline std::vector<SanityViolation> sanity_check(const AnnotationRecord& rec,
                                                 const SanityRuleTable& rules = default_sanity_rules()) {
  std::vector<SanityViolation> out;
  if (rec.corrupted) return out;
  auto check = [&](const std::vector<std::size_t>& cats, Dimension d, bool above) {
    const int v = rec.score(d);
    for (auto c : cats) {
      if (!rec.categories[c]) continue;
      bool ok = above ? v >= kAboveMidpoint : v <= kBelowMidpoint;
      if (!ok) out.push_back({c, d, above, v});
    }
  };
  check(rules.valence_above, Dimension::kValence, true);
  check(rules.valence_below, Dimension::kValence, false);
  check(rules.arousal_below, Dimension::kArousal, false);
  check(rules.arousal_above, Dimension::kArousal, true);
  return out;
}

// ---------------------------------------------------------------------------
// Relaxed gold standard.

struct ScoreRange {
  int min = 1;
  int max = 10;
  bool contains(int v) const noexcept { return v >= min && v <= max; }
};

struct GoldStandard {
  std::string control_instance_id;
  std::array<ScoreRange, 3> ranges{};  // valence, arousal, dominance
  std::vector<std::size_t> required;   // categories that must be selected
  std::vector<std::size_t> forbidden;  // categories that must not be selected
};

enum class GoldVerdict { kPass, kFail };

// A corrupted answer on a control instance fails the test.
inline GoldVerdict gold_standard_check(const AnnotationRecord& rec, const GoldStandard& gold) {
  if (rec.instance_id != gold.control_instance_id)
    throw DomainError("record targets " + rec.instance_id + ", not control " + gold.control_instance_id);
  if (rec.corrupted) return GoldVerdict::kFail;
  for (std::size_t d = 0; d < 3; ++d)
    if (!gold.ranges[d].contains(rec.score(kDimensions[d]))) return GoldVerdict::kFail;
  for (auto c : gold.required)
    if (!rec.categories[c]) return GoldVerdict::kFail;
  for (auto c : gold.forbidden)
    if (rec.categories[c]) return GoldVerdict::kFail;
  return GoldVerdict::kPass;
}

// Gold-standard config:
//
//   [control clip_0042]
//   valence = 1-6
//   arousal = 1-10
//   dominance = 1-10
//   require = sadness
//   forbid = happiness, pleasure
//
// Lines starting with '#' are comments. Omitted ranges default to 1-10.
inline std::vector<GoldStandard> parse_gold_config(std::istream& in) {
  std::vector<GoldStandard> out;
  std::string line;
  std::size_t lineno = 0;
  auto categories = [&](std::string_view value) {
    std::vector<std::size_t> ids;
    for (const auto& tok : text::split(value, ',')) {
      auto name = text::trim(tok);
      if (name.empty()) continue;
      auto c = category_index(name);
      if (!c) throw ParseError(lineno, "unknown category '" + std::string(name) + "'");
      ids.push_back(*c);
    }
    return ids;
  };
  while (std::getline(in, line)) {
    ++lineno;
    auto s = text::trim(line);
    if (s.empty() || s.front() == '#') continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ParseError(lineno, "unterminated block header");
      auto inner = text::trim(s.substr(1, s.size() - 2));
      if (inner.substr(0, 8) != "control ") throw ParseError(lineno, "block header must be [control <instance_id>]");
      GoldStandard g;
      g.control_instance_id = std::string(text::trim(inner.substr(8)));
      if (g.control_instance_id.empty()) throw ParseError(lineno, "missing control instance id");
      out.push_back(std::move(g));
      continue;
    }
    if (out.empty()) throw ParseError(lineno, "setting outside of a [control] block");
    auto eq = s.find('=');
    if (eq == std::string_view::npos) throw ParseError(lineno, "expected key = value");
    auto key = text::trim(s.substr(0, eq));
    auto value = text::trim(s.substr(eq + 1));
    auto& g = out.back();
    if (key == "require") {
      g.required = categories(value);
    } else if (key == "forbid") {
      g.forbidden = categories(value);
    } else {
      auto dim = enum_from_name<Dimension>(kDimensionNames, key);
      if (!dim) throw ParseError(lineno, "unknown key '" + std::string(key) + "'");
      auto parts = text::split(value, '-');
      if (parts.size() != 2) throw ParseError(lineno, "range must be min-max");
      auto lo = text::parse_int(parts[0]);
      auto hi = text::parse_int(parts[1]);
      if (!lo || !hi || *lo < 1 || *hi > 10 || *lo > *hi) throw ParseError(lineno, "range must satisfy 1 <= min <= max <= 10");
      g.ranges[static_cast<std::size_t>(*dim)] = {static_cast<int>(*lo), static_cast<int>(*hi)};
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// HIT outcome.

inline constexpr std::size_t kHitTasks = 20;
inline constexpr std::size_t kHitViolationLimit = 2;

struct HitOutcome {
  std::string hit_id;
  std::size_t violations = 0;  // offending task instances, at most one per instance
  bool gold_failed = false;
  bool low_performance = false;
  bool work_rejected = false;
};

inline HitOutcome hit_outcome(std::string hit_id, std::span<const AnnotationRecord> tasks,
                              const AnnotationRecord& control, const GoldStandard& gold) {
  if (tasks.size() != kHitTasks)
    throw DomainError("a HIT has " + std::to_string(kHitTasks) + " task annotations, got " +
                      std::to_string(tasks.size()));
  HitOutcome o;
  o.hit_id = std::move(hit_id);
  for (const auto& r : tasks)
    if (!sanity_check(r).empty()) ++o.violations;
  o.gold_failed = gold_standard_check(control, gold) == GoldVerdict::kFail;
  o.low_performance = o.violations >= kHitViolationLimit || o.gold_failed;
  return o;
}

// ---------------------------------------------------------------------------
// Reliability analysis.

struct DimensionReliability {
  std::array<double, 3> r{1.0, 1.0, 1.0};  // valence, arousal, dominance
  std::size_t n_annotations = 0;
};

struct ReliabilityParams {
  std::size_t max_iters = 50;
  double tol = 1e-6;
};

struct ReliabilityTrace {
  // max |delta r| per iteration, per dimension
  std::array<std::vector<double>, 3> max_change;
};

class ReliabilityScorer {
 public:
  virtual ~ReliabilityScorer() = default;
  virtual std::map<std::string, DimensionReliability> score(std::span<const AnnotationRecord> records,
                                                            ReliabilityTrace* trace) const = 0;
};

// Iterates consensus and per-worker error: consensus per instance is the
// reliability-weighted mean; a worker's error is the mean squared deviation
// of score/10 from consensus; r = exp(-error / lambda) with lambda twice the
// population mean error (floored at 1e-6). Starts from r = 1.
class ExponentialErrorScorer final : public ReliabilityScorer {
 public:
  explicit ExponentialErrorScorer(ReliabilityParams params = {}) : params_(params) {}

  std::map<std::string, DimensionReliability> score(std::span<const AnnotationRecord> records,
                                                    ReliabilityTrace* trace) const override {
    std::vector<const AnnotationRecord*> usable;
    for (const auto& r : records)
      if (!r.corrupted) usable.push_back(&r);
    std::vector<std::string> workers, instances;
    {
      std::set<std::string> w, i;
      for (auto* r : usable) {
        w.insert(r->participant_id);
        i.insert(r->instance_id);
      }
      workers.assign(w.begin(), w.end());
      instances.assign(i.begin(), i.end());
    }
    auto index_of = [](const std::vector<std::string>& v, const std::string& s) {
      return static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), s) - v.begin());
    };
    struct Obs {
      std::size_t worker, instance;
      int score[3];
    };
    std::vector<Obs> obs;
    std::vector<std::size_t> counts(workers.size(), 0);
    for (auto* r : usable) {
      Obs o{index_of(workers, r->participant_id), index_of(instances, r->instance_id),
            {r->valence, r->arousal, r->dominance}};
      ++counts[o.worker];
      obs.push_back(o);
    }

    std::vector<std::array<double, 3>> rel(workers.size(), {1.0, 1.0, 1.0});
    for (std::size_t d = 0; d < 3; ++d) {
      std::vector<double> r(workers.size(), 1.0);
      for (std::size_t iter = 0; iter < params_.max_iters; ++iter) {
        std::vector<double> num(instances.size(), 0.0), den(instances.size(), 0.0);
        for (const auto& o : obs) {
          num[o.instance] += r[o.worker] * o.score[d];
          den[o.instance] += r[o.worker];
        }
        std::vector<double> err(workers.size(), 0.0);
        for (const auto& o : obs) {
          const double consensus = num[o.instance] / (10.0 * den[o.instance]);
          const double dev = o.score[d] / 10.0 - consensus;
          err[o.worker] += dev * dev;
        }
        double mean_err = 0;
        for (std::size_t w = 0; w < workers.size(); ++w) {
          err[w] /= static_cast<double>(counts[w]);
          mean_err += err[w];
        }
        mean_err /= static_cast<double>(workers.size());
        const double lambda = std::max(2.0 * mean_err, 1e-6);
        double change = 0;
        for (std::size_t w = 0; w < workers.size(); ++w) {
          double nr = std::max(std::exp(-err[w] / lambda), std::numeric_limits<double>::min());
          change = std::max(change, std::abs(nr - r[w]));
          r[w] = nr;
        }
        if (trace) trace->max_change[d].push_back(change);
        if (change < params_.tol) break;
      }
      for (std::size_t w = 0; w < workers.size(); ++w) rel[w][d] = r[w];
    }

    std::map<std::string, DimensionReliability> out;
    for (std::size_t w = 0; w < workers.size(); ++w) out[workers[w]] = {rel[w], counts[w]};
    return out;
  }

 private:
  ReliabilityParams params_;
};

// Profiles for every participant seen in `records`; existing profile fields
// other than reliabilities and counts (EQ flag, status) are carried over.
inline ProfileMap reliability_scores(std::span<const AnnotationRecord> records, const ReliabilityScorer& scorer,
                                     const ProfileMap& previous = {}, ReliabilityTrace* trace = nullptr) {
  auto scores = scorer.score(records, trace);
  ProfileMap out = previous;
  for (const auto& [pid, s] : scores) {
    auto& p = out[pid];
    p.participant_id = pid;
    p.r_v = s.r[0];
    p.r_a = s.r[1];
    p.r_d = s.r[2];
    p.r = ensemble_reliability(p.r_v, p.r_a, p.r_d);
    p.n_annotations = s.n_annotations;
  }
  return out;
}

inline ProfileMap reliability_scores(std::span<const AnnotationRecord> records, const ReliabilityParams& params = {},
                                     ReliabilityTrace* trace = nullptr) {
  return reliability_scores(records, ExponentialErrorScorer(params), {}, trace);
}

// ---------------------------------------------------------------------------
// Participant policy.

struct PolicyParams {
  double reliability_threshold = 1.0 / 3.0;
  std::size_t min_effective = 20;
  std::int64_t block_seconds = 3600;
};

struct PolicyDecision {
  ParticipantStatus status;
  bool reliability_failed = false;
  bool work_rejected = false;
};

inline bool fails_reliability(const ParticipantProfile& p, const PolicyParams& params = {}) {
  return p.r < params.reliability_threshold && p.n_annotations >= params.min_effective;
}

// `now` is seconds since epoch.
inline PolicyDecision participant_policy(const ParticipantProfile& profile, const HitOutcome& outcome,
                                         std::int64_t now, const PolicyParams& params = {}) {
  PolicyDecision d;
  d.status = profile.status;
  if (d.status.kind == ParticipantStatus::Kind::kBlocked && d.status.blocked_until <= now)
    d.status = ParticipantStatus::active();
  d.reliability_failed = fails_reliability(profile, params);
  d.work_rejected = outcome.low_performance && d.reliability_failed;
  if (d.status.kind == ParticipantStatus::Kind::kExcluded || d.reliability_failed) {
    d.status = ParticipantStatus::excluded();
  } else if (outcome.low_performance) {
    d.status = ParticipantStatus::blocked(now + params.block_seconds);
  }
  return d;
}

// ---------------------------------------------------------------------------
// QC report.

struct QcReport {
  ProfileMap profiles;
  std::vector<HitOutcome> hits;
  std::map<std::string, std::size_t> sanity_violations;  // per participant, offending records
};

// Groups records by hit_id when present. A HIT is scored when it holds 20
// task records plus one record on a known control instance.
inline QcReport quality_report(std::span<const AnnotationRecord> records, const std::vector<GoldStandard>& gold,
                               const ReliabilityScorer& scorer, const PolicyParams& params, std::int64_t now) {
  QcReport rep;
  rep.profiles = reliability_scores(records, scorer);
  for (const auto& r : records)
    if (!sanity_check(r).empty()) ++rep.sanity_violations[r.participant_id];

  std::map<std::string, const GoldStandard*> controls;
  for (const auto& g : gold) controls[g.control_instance_id] = &g;
  std::map<std::string, std::vector<const AnnotationRecord*>> hits;
  for (const auto& r : records)
    if (!r.hit_id.empty()) hits[r.hit_id].push_back(&r);
  for (const auto& [hid, recs] : hits) {
    std::vector<AnnotationRecord> tasks;
    const AnnotationRecord* control = nullptr;
    for (auto* r : recs) {
      if (controls.count(r->instance_id) && !control) control = r;
      else tasks.push_back(*r);
    }
    if (!control || tasks.size() != kHitTasks) continue;
    auto outcome = hit_outcome(hid, tasks, *control, *controls.at(control->instance_id));
    auto& prof = rep.profiles[control->participant_id];
    auto decision = participant_policy(prof, outcome, now, params);
    outcome.work_rejected = decision.work_rejected;
    prof.status = decision.status;
    rep.hits.push_back(outcome);
  }
  for (auto& [pid, prof] : rep.profiles)
    if (fails_reliability(prof, params)) prof.status = ParticipantStatus::excluded();
  return rep;
}

inline nlohmann::json to_json(const QcReport& rep) {
  nlohmann::json participants = nlohmann::json::array();
  for (const auto& [pid, p] : rep.profiles) {
    auto v = rep.sanity_violations.find(pid);
    participants.push_back({{"participant_id", pid},
                            {"r_v", p.r_v},
                            {"r_a", p.r_a},
                            {"r_d", p.r_d},
                            {"r", p.r},
                            {"n_annotations", p.n_annotations},
                            {"sanity_violations", v == rep.sanity_violations.end() ? 0 : v->second},
                            {"status", to_string(p.status)}});
  }
  nlohmann::json hits = nlohmann::json::array();
  for (const auto& h : rep.hits)
    hits.push_back({{"hit_id", h.hit_id},
                    {"violations", h.violations},
                    {"gold_failed", h.gold_failed},
                    {"low_performance", h.low_performance},
                    {"work_rejected", h.work_rejected}});
  return {{"version", 1}, {"participants", participants}, {"hits", hits}};
}

}  // namespace affectkit
