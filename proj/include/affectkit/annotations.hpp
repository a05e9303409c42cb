#pragma once

// Crowdsourced affect annotations: record schema, the annotation table format,
// Dawid-Skene consensus for categorical labels, reliability-weighted
// dimensional consensus, instance confidence and dataset assembly.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "affectkit/common.hpp"

namespace affectkit {

inline constexpr std::size_t kNumCategories = 26;

inline constexpr std::array<std::string_view, kNumCategories> kCategoryNames = {
    "peace",        "affection",     "esteem",      "anticipation", "engagement",   "confidence", "happiness",
    "pleasure",     "excitement",    "surprise",    "sympathy",     "doubt_confusion", "disconnection", "fatigue",
    "embarrassment", "yearning",     "disapproval", "aversion",     "annoyance",    "anger",      "sensitivity",
    "sadness",      "disquietment",  "fear",        "pain",         "suffering"};

inline std::optional<std::size_t> category_index(std::string_view name) {
  for (std::size_t c = 0; c < kNumCategories; ++c)
    if (kCategoryNames[c] == name) return c;
  return std::nullopt;
}

enum class Gender : std::uint8_t { kMale, kFemale };
enum class AgeGroup : std::uint8_t { kKid, kTeenager, kAdult };
enum class Ethnicity : std::uint8_t {
  kAmericanIndianOrAlaskaNative,
  kAsian,
  kAfricanAmerican,
  kHispanicOrLatino,
  kNativeHawaiianOrPacificIslander,
  kWhite,
  kOther,
};

inline constexpr std::array<std::string_view, 2> kGenderNames = {"male", "female"};
inline constexpr std::array<std::string_view, 3> kAgeNames = {"kid", "teenager", "adult"};
inline constexpr std::array<std::string_view, 7> kEthnicityNames = {
    "american_indian_or_alaska_native", "asian", "african_american", "hispanic_or_latino",
    "native_hawaiian_or_pacific_islander", "white", "other"};

template <typename Enum, std::size_t N>
std::optional<Enum> enum_from_name(const std::array<std::string_view, N>& names, std::string_view s) {
  for (std::size_t i = 0; i < N; ++i)
    if (names[i] == s) return static_cast<Enum>(i);
  return std::nullopt;
}

enum class Dimension : std::uint8_t { kValence, kArousal, kDominance };
inline constexpr std::array<Dimension, 3> kDimensions = {Dimension::kValence, Dimension::kArousal,
                                                         Dimension::kDominance};
inline constexpr std::array<std::string_view, 3> kDimensionNames = {"valence", "arousal", "dominance"};

struct AnnotationRecord {
  std::string instance_id;
  std::string participant_id;
  bool corrupted = false;
  std::array<bool, kNumCategories> categories{};
  int valence = 0;  // 1..10 unless corrupted
  int arousal = 0;
  int dominance = 0;
  Gender gender = Gender::kMale;
  AgeGroup age = AgeGroup::kAdult;
  Ethnicity ethnicity = Ethnicity::kOther;
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 0;
  // Optional extension columns.
  std::string movie_id;
  std::string hit_id;

  int score(Dimension d) const noexcept {
    switch (d) {
      case Dimension::kValence: return valence;
      case Dimension::kArousal: return arousal;
      case Dimension::kDominance: return dominance;
    }
    return 0;
  }
  bool has(std::string_view category) const {
    auto c = category_index(category);
    return c && categories[*c];
  }
  bool operator==(const AnnotationRecord&) const = default;
};

// Throws DomainError describing the first violated invariant.
inline void check_record(const AnnotationRecord& r) {
  if (r.instance_id.empty()) throw DomainError("empty instance_id");
  if (r.participant_id.empty()) throw DomainError("empty participant_id");
  if (r.start_frame < 0 || r.end_frame < r.start_frame) throw DomainError("invalid frame interval");
  if (r.corrupted) return;
  for (auto d : kDimensions) {
    int v = r.score(d);
    if (v < 1 || v > 10)
      throw DomainError(std::string(kDimensionNames[static_cast<std::size_t>(d)]) + " outside 1..10: " +
                        std::to_string(v));
  }
}

// ---------------------------------------------------------------------------
// Annotation table.

inline std::vector<std::string> annotation_columns() {
  std::vector<std::string> cols = {"instance_id", "participant_id", "corrupted"};
  for (auto c : kCategoryNames) cols.emplace_back(c);
  for (const char* c : {"valence", "arousal", "dominance", "char_gender", "char_age", "char_ethnicity", "start_frame",
                        "end_frame"})
    cols.emplace_back(c);
  return cols;
}

inline std::vector<AnnotationRecord> parse_annotations(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("annotation table is empty");
  const auto header = text::split(text::trim(line), ',');
  const auto expected = annotation_columns();
  if (header.size() < expected.size())
    throw SchemaError("annotation table has " + std::to_string(header.size()) + " columns, expected at least " +
                      std::to_string(expected.size()));
  for (std::size_t c = 0; c < expected.size(); ++c)
    if (header[c] != expected[c])
      throw SchemaError("column " + std::to_string(c + 1) + " is '" + header[c] + "', expected '" + expected[c] + "'");
  std::optional<std::size_t> movie_col, hit_col;
  for (std::size_t c = expected.size(); c < header.size(); ++c) {
    if (header[c] == "movie_id" && !movie_col) movie_col = c;
    else if (header[c] == "hit_id" && !hit_col) hit_col = c;
    else throw SchemaError("unknown column '" + header[c] + "'");
  }

  std::vector<AnnotationRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    const auto cells = text::split(text::trim(line), ',');
    if (cells.size() != header.size())
      throw ParseError(lineno, "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(cells.size()));
    auto flag = [&](std::size_t c) {
      auto s = text::trim(cells[c]);
      if (s == "1" || s == "true") return true;
      if (s == "0" || s == "false" || s.empty()) return false;
      throw ParseError(lineno, "bad flag in column " + header[c]);
    };
    AnnotationRecord r;
    r.instance_id = std::string(text::trim(cells[0]));
    r.participant_id = std::string(text::trim(cells[1]));
    r.corrupted = flag(2);
    for (std::size_t k = 0; k < kNumCategories; ++k) r.categories[k] = flag(3 + k);
    std::size_t c = 3 + kNumCategories;
    auto integer = [&](std::size_t col, bool allow_empty) -> long long {
      auto s = text::trim(cells[col]);
      if (s.empty() && allow_empty) return 0;
      auto v = text::parse_int(s);
      if (!v) throw ParseError(lineno, "bad integer in column " + header[col]);
      return *v;
    };
    r.valence = static_cast<int>(integer(c, r.corrupted));
    r.arousal = static_cast<int>(integer(c + 1, r.corrupted));
    r.dominance = static_cast<int>(integer(c + 2, r.corrupted));
    auto demographic = [&]<typename E, std::size_t N>(std::size_t col, const std::array<std::string_view, N>& names,
                                                      E fallback) -> E {
      auto s = text::trim(cells[col]);
      if (s.empty() && r.corrupted) return fallback;
      auto v = enum_from_name<E>(names, s);
      if (!v) throw ParseError(lineno, "unknown value '" + std::string(s) + "' in column " + header[col]);
      return *v;
    };
    r.gender = demographic(c + 3, kGenderNames, Gender::kMale);
    r.age = demographic(c + 4, kAgeNames, AgeGroup::kAdult);
    r.ethnicity = demographic(c + 5, kEthnicityNames, Ethnicity::kOther);
    r.start_frame = integer(c + 6, false);
    r.end_frame = integer(c + 7, false);
    if (movie_col) r.movie_id = std::string(text::trim(cells[*movie_col]));
    if (hit_col) r.hit_id = std::string(text::trim(cells[*hit_col]));
    try {
      check_record(r);
    } catch (const DomainError& e) {
      throw ParseError(lineno, e.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline void write_annotations(std::ostream& out, const std::vector<AnnotationRecord>& records) {
  const bool movies = std::any_of(records.begin(), records.end(), [](const auto& r) { return !r.movie_id.empty(); });
  const bool hits = std::any_of(records.begin(), records.end(), [](const auto& r) { return !r.hit_id.empty(); });
  const auto cols = annotation_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  if (movies) out << ",movie_id";
  if (hits) out << ",hit_id";
  out << '\n';
  for (const auto& r : records) {
    out << r.instance_id << ',' << r.participant_id << ',' << (r.corrupted ? 1 : 0);
    for (bool b : r.categories) out << ',' << (b ? 1 : 0);
    if (r.corrupted) {
      out << ",,,,,,";
    } else {
      out << ',' << r.valence << ',' << r.arousal << ',' << r.dominance << ','
          << kGenderNames[static_cast<std::size_t>(r.gender)] << ',' << kAgeNames[static_cast<std::size_t>(r.age)]
          << ',' << kEthnicityNames[static_cast<std::size_t>(r.ethnicity)];
    }
    out << ',' << r.start_frame << ',' << r.end_frame;
    if (movies) out << ',' << r.movie_id;
    if (hits) out << ',' << r.hit_id;
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Participants.

struct ParticipantStatus {
  enum class Kind : std::uint8_t { kActive, kBlocked, kExcluded };
  Kind kind = Kind::kActive;
  std::int64_t blocked_until = 0;  // seconds since epoch, meaningful when blocked

  static ParticipantStatus active() { return {}; }
  static ParticipantStatus blocked(std::int64_t until) { return {Kind::kBlocked, until}; }
  static ParticipantStatus excluded() { return {Kind::kExcluded, 0}; }
  bool operator==(const ParticipantStatus&) const = default;
};

inline std::string to_string(const ParticipantStatus& s) {
  switch (s.kind) {
    case ParticipantStatus::Kind::kActive: return "active";
    case ParticipantStatus::Kind::kBlocked: return "blocked_until(" + std::to_string(s.blocked_until) + ")";
    case ParticipantStatus::Kind::kExcluded: return "excluded";
  }
  return "?";
}

inline double ensemble_reliability(double r_v, double r_a, double /*r_d*/) { return (2.0 * r_v + r_a) / 3.0; }

struct ParticipantProfile {
  std::string participant_id;
  double r_v = 1.0;
  double r_a = 1.0;
  double r_d = 1.0;
  double r = 1.0;
  std::size_t n_annotations = 0;
  bool eq_passed = false;
  ParticipantStatus status;

  double reliability(Dimension d) const noexcept {
    switch (d) {
      case Dimension::kValence: return r_v;
      case Dimension::kArousal: return r_a;
      case Dimension::kDominance: return r_d;
    }
    return 0;
  }
};

using ProfileMap = std::map<std::string, ParticipantProfile>;

// ---------------------------------------------------------------------------
// Consensus formulas.

struct WeightedScore {
  int score = 0;            // 1..10
  double reliability = 0;   // >= 0
};

// Reliability-weighted mean rescaled to [0, 1].
inline double aggregate_dimensional(std::span<const WeightedScore> scores) {
  double num = 0, den = 0;
  for (const auto& s : scores) {
    num += s.reliability * s.score;
    den += s.reliability;
  }
  if (!(den > 0)) throw DomainError("undefined consensus: all reliabilities are zero");
  return num / (10.0 * den);
}

// Probability that at least one annotator is reliable.
inline double instance_confidence(std::span<const double> reliabilities) {
  double miss = 1.0;
  for (double r : reliabilities) miss *= (1.0 - r);
  return 1.0 - miss;
}

// Interval of the most reliable annotator; ties go to the smallest participant_id.
inline std::pair<std::int64_t, std::int64_t> aggregate_interval(std::span<const AnnotationRecord> records,
                                                                const ProfileMap& profiles) {
  if (records.empty()) throw DomainError("aggregate_interval needs at least one annotation");
  const AnnotationRecord* best = nullptr;
  double best_r = -1;
  for (const auto& rec : records) {
    auto it = profiles.find(rec.participant_id);
    double r = it == profiles.end() ? 0.0 : it->second.r;
    if (!best || r > best_r || (r == best_r && rec.participant_id < best->participant_id)) {
      best = &rec;
      best_r = r;
    }
  }
  return {best->start_frame, best->end_frame};
}

// ---------------------------------------------------------------------------
// Dawid-Skene.

struct Vote {
  std::size_t item = 0;
  std::size_t worker = 0;
  std::size_t label = 0;
};

struct DawidSkeneParams {
  std::size_t max_iters = 100;
  double tol = 1e-6;
  double smoothing = 1.0;  // Laplace pseudo-count on every confusion cell
};

struct DawidSkeneResult {
  std::vector<std::vector<double>> posteriors;               // item x class
  std::vector<double> priors;                                 // class
  std::vector<std::vector<std::vector<double>>> confusion;    // worker x true x observed
  std::vector<double> objective;  // log-likelihood + log-prior of the smoothing, per iteration
  std::size_t iterations = 0;
  bool converged = false;

  std::size_t argmax(std::size_t item) const {
    const auto& p = posteriors[item];
    return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
  }
};

// EM on the Dawid-Skene model. Initialized from vote fractions (majority
// vote); each iteration runs the M-step, records the penalized observed-data
// log-likelihood, then the E-step. Stops when the largest posterior change is
// below tol. With smoothing > 0 the recorded objective is the MAP objective,
// which EM never decreases.
inline DawidSkeneResult dawid_skene(std::size_t n_items, std::size_t n_workers, std::size_t n_classes,
                                    std::span<const Vote> votes, const DawidSkeneParams& params = {}) {
  if (n_classes < 2) throw DomainError("Dawid-Skene needs at least two classes");
  if (votes.empty() || n_items == 0) throw DomainError("Dawid-Skene on empty input");
  const std::size_t K = n_classes;
  std::vector<std::vector<std::size_t>> by_item(n_items);
  for (std::size_t v = 0; v < votes.size(); ++v) {
    const auto& vt = votes[v];
    if (vt.item >= n_items || vt.worker >= n_workers || vt.label >= K) throw DomainError("vote index out of range");
    by_item[vt.item].push_back(v);
  }
  for (std::size_t i = 0; i < n_items; ++i)
    if (by_item[i].empty()) throw DomainError("item " + std::to_string(i) + " has no votes");

  DawidSkeneResult res;
  auto& T = res.posteriors;
  T.assign(n_items, std::vector<double>(K, 0.0));
  for (std::size_t i = 0; i < n_items; ++i) {
    for (auto v : by_item[i]) T[i][votes[v].label] += 1.0;
    for (auto& x : T[i]) x /= static_cast<double>(by_item[i].size());
  }

  auto& pi = res.priors;
  auto& conf = res.confusion;
  const double alpha = params.smoothing;
  std::vector<double> logp(K);
  for (std::size_t iter = 0; iter < params.max_iters; ++iter) {
    // M-step.
    pi.assign(K, 0.0);
    for (const auto& row : T)
      for (std::size_t k = 0; k < K; ++k) pi[k] += row[k];
    for (auto& p : pi) p /= static_cast<double>(n_items);
    conf.assign(n_workers, std::vector<std::vector<double>>(K, std::vector<double>(K, alpha)));
    for (const auto& vt : votes)
      for (std::size_t k = 0; k < K; ++k) conf[vt.worker][k][vt.label] += T[vt.item][k];
    for (auto& w : conf)
      for (auto& row : w) {
        double s = std::accumulate(row.begin(), row.end(), 0.0);
        for (auto& x : row) x = s > 0 ? x / s : 1.0 / static_cast<double>(K);
      }

    // Objective at the new parameters, and E-step.
    double objective = 0;
    double change = 0;
    for (std::size_t i = 0; i < n_items; ++i) {
      for (std::size_t k = 0; k < K; ++k) {
        if (pi[k] <= 0) {
          logp[k] = -std::numeric_limits<double>::infinity();
          continue;
        }
        double lp = std::log(pi[k]);
        for (auto v : by_item[i]) lp += std::log(conf[votes[v].worker][k][votes[v].label]);
        logp[k] = lp;
      }
      const double mx = *std::max_element(logp.begin(), logp.end());
      double z = 0;
      for (std::size_t k = 0; k < K; ++k) z += std::exp(logp[k] - mx);
      objective += mx + std::log(z);
      for (std::size_t k = 0; k < K; ++k) {
        double p = std::exp(logp[k] - mx) / z;
        change = std::max(change, std::abs(p - T[i][k]));
        T[i][k] = p;
      }
    }
    if (alpha > 0)
      for (const auto& w : conf)
        for (const auto& row : w)
          for (double x : row) objective += alpha * std::log(x);
    res.objective.push_back(objective);
    res.iterations = iter + 1;
    if (change < params.tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

// Label selector for running Dawid-Skene over annotation records.
struct LabelSpec {
  enum class Kind : std::uint8_t { kCategory, kGender, kAge, kEthnicity };
  Kind kind = Kind::kCategory;
  std::size_t category = 0;

  static LabelSpec of_category(std::size_t c) { return {Kind::kCategory, c}; }
  std::size_t classes() const noexcept {
    switch (kind) {
      case Kind::kCategory: return 2;
      case Kind::kGender: return kGenderNames.size();
      case Kind::kAge: return kAgeNames.size();
      case Kind::kEthnicity: return kEthnicityNames.size();
    }
    return 2;
  }
  std::size_t label_of(const AnnotationRecord& r) const noexcept {
    switch (kind) {
      case Kind::kCategory: return r.categories[category] ? 1 : 0;
      case Kind::kGender: return static_cast<std::size_t>(r.gender);
      case Kind::kAge: return static_cast<std::size_t>(r.age);
      case Kind::kEthnicity: return static_cast<std::size_t>(r.ethnicity);
    }
    return 0;
  }
  std::string name() const {
    switch (kind) {
      case Kind::kCategory: return std::string(kCategoryNames[category]);
      case Kind::kGender: return "gender";
      case Kind::kAge: return "age";
      case Kind::kEthnicity: return "ethnicity";
    }
    return "?";
  }
};

struct LabelConsensus {
  std::vector<std::string> instances;  // sorted
  std::vector<std::string> workers;    // sorted
  DawidSkeneResult result;

  std::optional<std::size_t> find(const std::string& instance) const {
    auto it = std::lower_bound(instances.begin(), instances.end(), instance);
    if (it == instances.end() || *it != instance) return std::nullopt;
    return static_cast<std::size_t>(it - instances.begin());
  }
};

// Dawid-Skene over the non-corrupted records for one label.
inline LabelConsensus dawid_skene_records(std::span<const AnnotationRecord> records, const LabelSpec& label,
                                          const DawidSkeneParams& params = {}) {
  LabelConsensus out;
  std::set<std::string> inst, work;
  for (const auto& r : records) {
    if (r.corrupted) continue;
    inst.insert(r.instance_id);
    work.insert(r.participant_id);
  }
  if (inst.empty()) throw DomainError("no usable annotations for " + label.name());
  out.instances.assign(inst.begin(), inst.end());
  out.workers.assign(work.begin(), work.end());
  std::vector<Vote> votes;
  votes.reserve(records.size());
  for (const auto& r : records) {
    if (r.corrupted) continue;
    auto i = std::lower_bound(out.instances.begin(), out.instances.end(), r.instance_id) - out.instances.begin();
    auto w = std::lower_bound(out.workers.begin(), out.workers.end(), r.participant_id) - out.workers.begin();
    votes.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(w), label.label_of(r)});
  }
  out.result = dawid_skene(out.instances.size(), out.workers.size(), label.classes(), votes, params);
  return out;
}

// ---------------------------------------------------------------------------
// Dataset assembly.

enum class Split : std::uint8_t { kTrain, kVal, kTest };
inline constexpr std::array<std::string_view, 3> kSplitNames = {"train", "val", "test"};

struct AggregatedLabel {
  std::string instance_id;
  std::string movie_id;
  std::array<double, kNumCategories> ds_scores{};
  std::array<bool, kNumCategories> binary_labels{};
  std::array<double, 3> vad{};
  double confidence = 0;
  std::pair<std::int64_t, std::int64_t> interval{0, 0};
  Gender gender = Gender::kMale;
  AgeGroup age = AgeGroup::kAdult;
  Ethnicity ethnicity = Ethnicity::kOther;
  Split split = Split::kTrain;
};

struct DatasetOptions {
  double confidence_min = 0.95;
  std::array<double, 3> split{0.7, 0.1, 0.2};
  std::uint64_t seed = 0;
  // instance -> movie; falls back to the record's movie_id, then the instance id.
  std::map<std::string, std::string> movies;
  DawidSkeneParams ds;
};

struct Dataset {
  std::vector<AggregatedLabel> labels;         // sorted by instance_id
  std::vector<std::string> dropped;            // below confidence_min or no usable annotation
};

// Assigns whole movies to splits following a seeded permutation of the sorted
// movie ids; a movie goes to the split whose cumulative target range contains
// the running instance fraction before it.
inline std::map<std::string, Split> assign_splits(const std::map<std::string, std::size_t>& instances_per_movie,
                                                  const std::array<double, 3>& ratios, std::uint64_t seed) {
  std::vector<std::string> movies;
  std::size_t total = 0;
  for (const auto& [m, n] : instances_per_movie) {
    movies.push_back(m);
    total += n;
  }
  std::mt19937_64 rng(seed);
  std::shuffle(movies.begin(), movies.end(), rng);
  const double sum = ratios[0] + ratios[1] + ratios[2];
  if (!(sum > 0)) throw DomainError("split ratios must sum to a positive value");
  const double train_end = ratios[0] / sum;
  const double val_end = (ratios[0] + ratios[1]) / sum;
  std::map<std::string, Split> out;
  std::size_t seen = 0;
  for (const auto& m : movies) {
    const double frac = total ? static_cast<double>(seen) / static_cast<double>(total) : 0.0;
    out[m] = frac < train_end ? Split::kTrain : (frac < val_end ? Split::kVal : Split::kTest);
    seen += instances_per_movie.at(m);
  }
  return out;
}

inline Dataset build_dataset(std::span<const AnnotationRecord> records, const ProfileMap& profiles,
                             const DatasetOptions& opt = {}) {
  std::map<std::string, std::vector<AnnotationRecord>> by_instance;
  std::set<std::string> all_instances;
  for (const auto& r : records) {
    all_instances.insert(r.instance_id);
    if (!r.corrupted) by_instance[r.instance_id].push_back(r);
  }
  auto reliability = [&profiles](const std::string& pid) {
    auto it = profiles.find(pid);
    return it == profiles.end() ? 0.0 : it->second.r;
  };

  Dataset ds;
  std::vector<AggregatedLabel> kept;
  for (const auto& id : all_instances) {
    auto it = by_instance.find(id);
    if (it == by_instance.end()) {
      ds.dropped.push_back(id);
      continue;
    }
    std::vector<double> rs;
    for (const auto& r : it->second) rs.push_back(reliability(r.participant_id));
    const double c = instance_confidence(rs);
    if (c < opt.confidence_min || std::accumulate(rs.begin(), rs.end(), 0.0) <= 0) {
      ds.dropped.push_back(id);
      continue;
    }
    AggregatedLabel lab;
    lab.instance_id = id;
    lab.confidence = c;
    for (std::size_t d = 0; d < 3; ++d) {
      std::vector<WeightedScore> ws;
      for (std::size_t k = 0; k < it->second.size(); ++k) ws.push_back({it->second[k].score(kDimensions[d]), rs[k]});
      lab.vad[d] = aggregate_dimensional(ws);
    }
    lab.interval = aggregate_interval(it->second, profiles);
    if (auto m = opt.movies.find(id); m != opt.movies.end()) lab.movie_id = m->second;
    else if (!it->second.front().movie_id.empty()) lab.movie_id = it->second.front().movie_id;
    else lab.movie_id = id;
    kept.push_back(std::move(lab));
  }

  if (!kept.empty()) {
    for (std::size_t c = 0; c < kNumCategories; ++c) {
      auto cons = dawid_skene_records(records, LabelSpec::of_category(c), opt.ds);
      for (auto& lab : kept) {
        auto i = cons.find(lab.instance_id);
        double s = i ? cons.result.posteriors[*i][1] : 0.0;
        lab.ds_scores[c] = s;
        lab.binary_labels[c] = s >= 0.5;
      }
    }
    for (auto kind : {LabelSpec::Kind::kGender, LabelSpec::Kind::kAge, LabelSpec::Kind::kEthnicity}) {
      auto cons = dawid_skene_records(records, LabelSpec{kind, 0}, opt.ds);
      for (auto& lab : kept) {
        auto i = cons.find(lab.instance_id);
        if (!i) continue;
        auto k = cons.result.argmax(*i);
        if (kind == LabelSpec::Kind::kGender) lab.gender = static_cast<Gender>(k);
        else if (kind == LabelSpec::Kind::kAge) lab.age = static_cast<AgeGroup>(k);
        else lab.ethnicity = static_cast<Ethnicity>(k);
      }
    }
  }

  std::map<std::string, std::size_t> per_movie;
  for (const auto& lab : kept) ++per_movie[lab.movie_id];
  auto splits = assign_splits(per_movie, opt.split, opt.seed);
  for (auto& lab : kept) lab.split = splits.at(lab.movie_id);
  ds.labels = std::move(kept);
  return ds;
}

// ---------------------------------------------------------------------------
// Label table.

inline std::vector<std::string> label_columns() {
  std::vector<std::string> cols = {"instance_id"};
  for (auto c : kCategoryNames) cols.push_back("score_" + std::string(c));
  for (auto c : kCategoryNames) cols.push_back("label_" + std::string(c));
  for (auto d : kDimensionNames) cols.emplace_back(d);
  cols.emplace_back("confidence");
  cols.emplace_back("split");
  // trailing extension columns
  for (const char* c : {"movie_id", "start_frame", "end_frame", "char_gender", "char_age", "char_ethnicity"})
    cols.emplace_back(c);
  return cols;
}

inline void write_label_table(std::ostream& out, std::span<const AggregatedLabel> labels) {
  const auto cols = label_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << '\n';
  for (const auto& l : labels) {
    out << l.instance_id;
    for (double s : l.ds_scores) out << ',' << text::format_double(s);
    for (bool b : l.binary_labels) out << ',' << (b ? 1 : 0);
    for (double v : l.vad) out << ',' << text::format_double(v);
    out << ',' << text::format_double(l.confidence) << ',' << kSplitNames[static_cast<std::size_t>(l.split)];
    out << ',' << l.movie_id << ',' << l.interval.first << ',' << l.interval.second << ','
        << kGenderNames[static_cast<std::size_t>(l.gender)] << ',' << kAgeNames[static_cast<std::size_t>(l.age)] << ','
        << kEthnicityNames[static_cast<std::size_t>(l.ethnicity)];
    out << '\n';
  }
}

// Reads a label table. The six trailing extension columns are optional.
inline std::vector<AggregatedLabel> read_label_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("label table is empty");
  const auto header = text::split(text::trim(line), ',');
  const auto cols = label_columns();
  const std::size_t core = 1 + 2 * kNumCategories + 3 + 2;
  if (header.size() != core && header.size() != cols.size()) throw SchemaError("label table has wrong column count");
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] != cols[c]) throw SchemaError("label column " + std::to_string(c + 1) + " is '" + header[c] + "'");
  std::vector<AggregatedLabel> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    const auto cells = text::split(text::trim(line), ',');
    if (cells.size() != header.size()) throw ParseError(lineno, "wrong field count");
    auto num = [&](std::size_t c) {
      auto v = text::parse_double(cells[c]);
      if (!v) throw ParseError(lineno, "bad number in column " + header[c]);
      return *v;
    };
    AggregatedLabel l;
    l.instance_id = cells[0];
    for (std::size_t k = 0; k < kNumCategories; ++k) l.ds_scores[k] = num(1 + k);
    for (std::size_t k = 0; k < kNumCategories; ++k) l.binary_labels[k] = num(1 + kNumCategories + k) != 0;
    std::size_t c = 1 + 2 * kNumCategories;
    for (std::size_t d = 0; d < 3; ++d) l.vad[d] = num(c + d);
    l.confidence = num(c + 3);
    auto sp = enum_from_name<Split>(kSplitNames, text::trim(cells[c + 4]));
    if (!sp) throw ParseError(lineno, "unknown split '" + cells[c + 4] + "'");
    l.split = *sp;
    if (header.size() == cols.size()) {
      l.movie_id = cells[c + 5];
      l.interval = {static_cast<std::int64_t>(num(c + 6)), static_cast<std::int64_t>(num(c + 7))};
      auto g = enum_from_name<Gender>(kGenderNames, text::trim(cells[c + 8]));
      auto a = enum_from_name<AgeGroup>(kAgeNames, text::trim(cells[c + 9]));
      auto e = enum_from_name<Ethnicity>(kEthnicityNames, text::trim(cells[c + 10]));
      if (!g || !a || !e) throw ParseError(lineno, "bad demographic value");
      l.gender = *g;
      l.age = *a;
      l.ethnicity = *e;
    } else {
      l.movie_id = l.instance_id;
    }
    out.push_back(std::move(l));
  }
  return out;
}

}  // namespace affectkit
