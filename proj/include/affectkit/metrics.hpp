#pragma once

// Evaluation statistics: ranking metrics for categorical emotions, regression
// metrics for dimensional emotions, the combined recognition score,
// inter-annotator agreement, retrieval precision, and the chi-squared /
// one-way ANOVA tests used for demographic analyses.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "affectkit/annotations.hpp"
#include "affectkit/common.hpp"
#include "affectkit/special_functions.hpp"

namespace affectkit {

// ---------------------------------------------------------------------------
// Binary ranking metrics.

// Non-interpolated AP: mean over positives of precision at the positive's
// rank. Scores sort descending; ties keep input order.
inline double average_precision(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DomainError("scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::size_t hits = 0;
  double sum = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (!labels[order[rank]]) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
  }
  if (hits == 0) throw DomainError("average precision needs at least one positive");
  return sum / static_cast<double>(hits);
}

// Mann-Whitney form: fraction of (positive, negative) pairs ordered
// correctly, ties counted one half.
inline double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DomainError("scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos = 0, neg = 0;
  // Twice the positive rank sum keeps every quantity integral.
  double twice_rank_sum = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double twice_avg_rank = static_cast<double>(i + 1 + j);  // 2 * mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]]) {
        twice_rank_sum += twice_avg_rank;
        pos += 1;
      } else {
        neg += 1;
      }
    }
    i = j;
  }
  if (pos == 0 || neg == 0) throw DomainError("ROC AUC needs both positives and negatives");
  const double twice_u = twice_rank_sum - pos * (pos + 1);
  return twice_u / (2.0 * pos * neg);
}

// ---------------------------------------------------------------------------
// Regression metrics.

enum class R2Mode { kVanilla, kRankPercentile };

// Average ranks mapped to [0, 1] via (rank - 1) / (n - 1).
inline std::vector<double> rank_percentiles(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && v[order[j]] == v[order[i]]) ++j;
    const double avg_rank0 = 0.5 * static_cast<double>(i + j - 1);  // zero-based
    for (std::size_t k = i; k < j; ++k) out[order[k]] = n > 1 ? avg_rank0 / static_cast<double>(n - 1) : 0.0;
    i = j;
  }
  return out;
}

inline double mse(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size() || pred.empty()) throw DomainError("mse needs equal non-empty inputs");
  double s = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - truth[i]) * (pred[i] - truth[i]);
  return s / static_cast<double>(pred.size());
}

inline double r2(std::span<const double> pred, std::span<const double> truth, R2Mode mode = R2Mode::kVanilla) {
  if (pred.size() != truth.size() || pred.size() < 2) throw DomainError("R^2 needs equal inputs of length >= 2");
  std::vector<double> p(pred.begin(), pred.end()), t(truth.begin(), truth.end());
  if (mode == R2Mode::kRankPercentile) {
    p = rank_percentiles(pred);
    t = rank_percentiles(truth);
  }
  const double mean = std::accumulate(t.begin(), t.end(), 0.0) / static_cast<double>(t.size());
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    ss_res += (t[i] - p[i]) * (t[i] - p[i]);
    ss_tot += (t[i] - mean) * (t[i] - mean);
  }
  if (std::all_of(t.begin(), t.end(), [&](double v) { return v == t.front(); }))
    throw DomainError("R^2 undefined for constant truth");
  return 1.0 - ss_res / ss_tot;
}

// F1 = 2TP / (2TP + FP + FN). With no positives on either side the
// prediction is perfect and F1 is 1.
inline double f1_score(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size()) throw DomainError("f1 needs equal lengths");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] && truth[i]) ++tp;
    else if (pred[i]) ++fp;
    else if (truth[i]) ++fn;
  }
  const std::size_t den = 2 * tp + fp + fn;
  if (den == 0) return 1.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(den);
}

// Emotion recognition score.
inline double ers(double mean_r2, double mean_ap, double mean_roc_auc) {
  return 0.5 * (mean_r2 + 0.5 * (mean_ap + mean_roc_auc));
}

// ---------------------------------------------------------------------------
// Fleiss' kappa.

struct AgreementTable {
  std::vector<std::vector<std::size_t>> counts;  // instance x class

  std::size_t raters(std::size_t i) const {
    return std::accumulate(counts[i].begin(), counts[i].end(), std::size_t{0});
  }
};

enum class KappaMode { kFixedN, kVariableN };

// kFixedN: p_j = sum_i n_ij / (N n) with a common rater count n.
// kVariableN: p_j = (1/N) sum_i n_ij / n_i for per-instance rater counts.
inline double fleiss_kappa(const AgreementTable& table, KappaMode mode) {
  const std::size_t N = table.counts.size();
  if (N == 0) throw DomainError("kappa on empty table");
  const std::size_t K = table.counts.front().size();
  std::vector<double> p(K, 0.0);
  double p_bar = 0;
  const std::size_t n0 = table.raters(0);
  for (std::size_t i = 0; i < N; ++i) {
    const auto& row = table.counts[i];
    if (row.size() != K) throw DomainError("ragged agreement table");
    const std::size_t ni = table.raters(i);
    if (ni < 2) throw DomainError("instance " + std::to_string(i) + " has fewer than two raters");
    if (mode == KappaMode::kFixedN && ni != n0) throw DomainError("fixed-n kappa needs equal rater counts");
    double sq = 0;
    for (std::size_t j = 0; j < K; ++j) {
      sq += static_cast<double>(row[j]) * static_cast<double>(row[j]);
      const double denom = mode == KappaMode::kFixedN ? static_cast<double>(n0) : static_cast<double>(ni);
      p[j] += static_cast<double>(row[j]) / denom;
    }
    p_bar += (sq - static_cast<double>(ni)) / (static_cast<double>(ni) * static_cast<double>(ni - 1));
  }
  p_bar /= static_cast<double>(N);
  double p_e = 0;
  for (auto& pj : p) {
    pj /= static_cast<double>(N);
    p_e += pj * pj;
  }
  if (std::abs(1.0 - p_e) < 1e-15) throw DomainError("kappa undefined: chance agreement is 1");
  return (p_bar - p_e) / (1.0 - p_e);
}

// Subject-by-class table for one label over non-corrupted records. Records of
// participants rejected by `keep` are skipped; instances with fewer than two
// remaining raters are dropped.
template <typename Keep>
AgreementTable agreement_table(std::span<const AnnotationRecord> records, const LabelSpec& label, Keep&& keep) {
  std::map<std::string, std::vector<std::size_t>> rows;
  for (const auto& r : records) {
    if (r.corrupted || !keep(r.participant_id)) continue;
    auto& row = rows[r.instance_id];
    row.resize(label.classes(), 0);
    ++row[label.label_of(r)];
  }
  AgreementTable t;
  for (auto& [id, row] : rows)
    if (std::accumulate(row.begin(), row.end(), std::size_t{0}) >= 2) t.counts.push_back(std::move(row));
  return t;
}

inline AgreementTable agreement_table(std::span<const AnnotationRecord> records, const LabelSpec& label) {
  return agreement_table(records, label, [](const std::string&) { return true; });
}

// Fixed-n when all rater counts agree, otherwise the per-instance revision.
inline double fleiss_kappa(const AgreementTable& table) {
  bool uniform = true;
  for (std::size_t i = 1; i < table.counts.size() && uniform; ++i) uniform = table.raters(i) == table.raters(0);
  return fleiss_kappa(table, uniform ? KappaMode::kFixedN : KappaMode::kVariableN);
}

// ---------------------------------------------------------------------------
// Retrieval.

struct RetrievalResult {
  std::vector<std::pair<std::size_t, double>> precision_at;  // (K, P@K)
  double r_precision = 0;
  std::vector<std::string> warnings;
};

inline RetrievalResult retrieval_metrics(std::span<const std::string> ranked, const std::set<std::string>& relevant,
                                         std::span<const std::size_t> ks) {
  {
    std::unordered_set<std::string> seen;
    for (const auto& id : ranked)
      if (!seen.insert(id).second) throw DomainError("duplicate id in ranking: " + id);
  }
  if (relevant.empty()) throw DomainError("R-precision undefined for an empty relevant set");
  auto precision = [&](std::size_t k, RetrievalResult& res) {
    std::size_t n = std::min(k, ranked.size());
    if (n < k)
      res.warnings.push_back("K=" + std::to_string(k) + " exceeds ranking length " + std::to_string(ranked.size()) +
                             "; using available prefix");
    if (n == 0) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) hits += relevant.count(ranked[i]);
    return static_cast<double>(hits) / static_cast<double>(n);
  };
  RetrievalResult res;
  for (auto k : ks) {
    if (k == 0) throw DomainError("K must be positive");
    res.precision_at.emplace_back(k, precision(k, res));
  }
  res.r_precision = precision(relevant.size(), res);
  return res;
}

// ---------------------------------------------------------------------------
// Hypothesis tests.

struct Chi2Result {
  double statistic = 0;
  std::size_t df = 0;
  double p_value = 1;
};

inline Chi2Result chi2_independence(const std::vector<std::vector<double>>& table) {
  const std::size_t R = table.size();
  if (R < 2) throw DomainError("chi-squared test needs at least two rows");
  const std::size_t C = table.front().size();
  if (C < 2) throw DomainError("chi-squared test needs at least two columns");
  std::vector<double> rows(R, 0.0), cols(C, 0.0);
  double total = 0;
  for (std::size_t i = 0; i < R; ++i) {
    if (table[i].size() != C) throw DomainError("ragged contingency table");
    for (std::size_t j = 0; j < C; ++j) {
      if (table[i][j] < 0) throw DomainError("negative count");
      rows[i] += table[i][j];
      cols[j] += table[i][j];
      total += table[i][j];
    }
  }
  for (double m : rows)
    if (m <= 0) throw DomainError("zero row marginal");
  for (double m : cols)
    if (m <= 0) throw DomainError("zero column marginal");
  Chi2Result res;
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = 0; j < C; ++j) {
      const double e = rows[i] * cols[j] / total;
      res.statistic += (table[i][j] - e) * (table[i][j] - e) / e;
    }
  res.df = (R - 1) * (C - 1);
  res.p_value = special::chi2_sf(res.statistic, static_cast<double>(res.df));
  return res;
}

struct AnovaResult {
  double f = 0;
  std::size_t df_between = 0;
  std::size_t df_within = 0;
  double p_value = 1;
};

inline AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw DomainError("ANOVA needs at least two groups");
  double grand = 0;
  std::size_t n = 0;
  for (const auto& g : groups) {
    if (g.size() < 2) throw DomainError("each ANOVA group needs at least two samples");
    grand += std::accumulate(g.begin(), g.end(), 0.0);
    n += g.size();
  }
  grand /= static_cast<double>(n);
  double ssb = 0, ssw = 0;
  for (const auto& g : groups) {
    const double m = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
    ssb += static_cast<double>(g.size()) * (m - grand) * (m - grand);
    for (double x : g) ssw += (x - m) * (x - m);
  }
  if (ssw <= 0) throw DomainError("ANOVA undefined: zero within-group variance");
  AnovaResult res;
  res.df_between = groups.size() - 1;
  res.df_within = n - groups.size();
  res.f = (ssb / static_cast<double>(res.df_between)) / (ssw / static_cast<double>(res.df_within));
  res.p_value = special::f_sf(res.f, static_cast<double>(res.df_between), static_cast<double>(res.df_within));
  return res;
}

// ---------------------------------------------------------------------------
// Model evaluation.

struct Prediction {
  std::string instance_id;
  std::array<double, kNumCategories> scores{};
  std::array<double, 3> vad{};
};

inline void write_predictions(std::ostream& out, std::span<const Prediction> preds) {
  out << "instance_id";
  for (auto c : kCategoryNames) out << ",score_" << c;
  for (auto d : kDimensionNames) out << ',' << d;
  out << '\n';
  for (const auto& p : preds) {
    out << p.instance_id;
    for (double s : p.scores) out << ',' << text::format_double(s);
    for (double v : p.vad) out << ',' << text::format_double(v);
    out << '\n';
  }
}

inline std::vector<Prediction> read_predictions(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("prediction table is empty");
  auto header = text::split(text::trim(line), ',');
  if (header.size() != 1 + kNumCategories + 3 || header[0] != "instance_id")
    throw SchemaError("prediction table must have instance_id, 26 category scores and valence, arousal, dominance");
  for (std::size_t c = 0; c < kNumCategories; ++c)
    if (header[1 + c] != "score_" + std::string(kCategoryNames[c]))
      throw SchemaError("unexpected prediction column '" + header[1 + c] + "'");
  std::vector<Prediction> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    auto cells = text::split(text::trim(line), ',');
    if (cells.size() != header.size()) throw ParseError(lineno, "wrong field count");
    Prediction p;
    p.instance_id = cells[0];
    for (std::size_t c = 1; c < cells.size(); ++c) {
      auto v = text::parse_double(cells[c]);
      if (!v) throw ParseError(lineno, "bad number in column " + header[c]);
      if (c <= kNumCategories) p.scores[c - 1] = *v;
      else p.vad[c - 1 - kNumCategories] = *v;
    }
    out.push_back(std::move(p));
  }
  return out;
}

struct EvaluationReport {
  std::size_t instances = 0;
  std::array<MaybeReal, kNumCategories> ap{};
  std::array<MaybeReal, kNumCategories> roc_auc{};
  std::array<double, kNumCategories> positive_rate{};
  std::array<MaybeReal, 3> r2{};
  std::array<MaybeReal, 3> mse{};
  double mean_ap = 0;
  double mean_roc_auc = 0;
  double mean_r2 = 0;
  double ers = 0;
};

// Joins predictions to labels by instance id; labels without a prediction
// are an error. Categories with a single class present are left undefined and
// excluded from the means.
inline EvaluationReport evaluate(std::span<const Prediction> preds, std::span<const AggregatedLabel> labels) {
  std::map<std::string, const Prediction*> by_id;
  for (const auto& p : preds) by_id[p.instance_id] = &p;
  EvaluationReport rep;
  rep.instances = labels.size();
  if (labels.empty()) throw DomainError("no labels to evaluate");
  std::vector<const Prediction*> joined;
  for (const auto& l : labels) {
    auto it = by_id.find(l.instance_id);
    if (it == by_id.end()) throw DomainError("no prediction for " + l.instance_id);
    joined.push_back(it->second);
  }
  std::vector<double> s(labels.size());
  std::vector<int> y(labels.size());
  double ap_sum = 0, ra_sum = 0;
  std::size_t defined = 0;
  for (std::size_t c = 0; c < kNumCategories; ++c) {
    std::size_t pos = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      s[i] = joined[i]->scores[c];
      y[i] = labels[i].binary_labels[c] ? 1 : 0;
      pos += static_cast<std::size_t>(y[i]);
    }
    rep.positive_rate[c] = static_cast<double>(pos) / static_cast<double>(labels.size());
    if (pos == 0 || pos == labels.size()) continue;
    rep.ap[c] = average_precision(s, y);
    rep.roc_auc[c] = roc_auc(s, y);
    ap_sum += *rep.ap[c];
    ra_sum += *rep.roc_auc[c];
    ++defined;
  }
  rep.mean_ap = defined ? ap_sum / static_cast<double>(defined) : 0.0;
  rep.mean_roc_auc = defined ? ra_sum / static_cast<double>(defined) : 0.0;
  std::vector<double> p(labels.size()), t(labels.size());
  double r2_sum = 0;
  std::size_t r2_defined = 0;
  for (std::size_t d = 0; d < 3; ++d) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      p[i] = joined[i]->vad[d];
      t[i] = labels[i].vad[d];
    }
    rep.mse[d] = mse(p, t);
    try {
      rep.r2[d] = r2(p, t);
      r2_sum += *rep.r2[d];
      ++r2_defined;
    } catch (const DomainError&) {
    }
  }
  rep.mean_r2 = r2_defined ? r2_sum / static_cast<double>(r2_defined) : 0.0;
  rep.ers = ers(rep.mean_r2, rep.mean_ap, rep.mean_roc_auc);
  return rep;
}

inline std::string format_report(const EvaluationReport& rep) {
  std::ostringstream os;
  auto pct = [](const MaybeReal& v) {
    std::ostringstream o;
    if (v) o << std::fixed << std::setprecision(2) << 100.0 * *v;
    else o << "n/a";
    return o.str();
  };
  os << "instances: " << rep.instances << "\n\n";
  os << std::left << std::setw(18) << "category" << std::right << std::setw(10) << "P.P.(%)" << std::setw(10)
     << "AP(%)" << std::setw(10) << "RA(%)" << "\n";
  for (std::size_t c = 0; c < kNumCategories; ++c)
    os << std::left << std::setw(18) << kCategoryNames[c] << std::right << std::setw(10) << pct(rep.positive_rate[c])
       << std::setw(10) << pct(rep.ap[c]) << std::setw(10) << pct(rep.roc_auc[c]) << "\n";
  os << "\n" << std::left << std::setw(18) << "dimension" << std::right << std::setw(10) << "R2" << std::setw(10)
     << "MSE" << "\n";
  for (std::size_t d = 0; d < 3; ++d) {
    os << std::left << std::setw(18) << kDimensionNames[d] << std::right << std::fixed << std::setprecision(3);
    if (rep.r2[d]) os << std::setw(10) << *rep.r2[d];
    else os << std::setw(10) << "n/a";
    if (rep.mse[d]) os << std::setw(10) << *rep.mse[d];
    else os << std::setw(10) << "n/a";
    os << "\n";
  }
  os << "\n" << std::setw(10) << "mR2" << std::setw(10) << "mAP" << std::setw(10) << "mRA" << std::setw(10) << "ERS"
     << "\n";
  os << std::fixed << std::setprecision(3) << std::setw(10) << rep.mean_r2 << std::setprecision(2) << std::setw(10)
     << 100.0 * rep.mean_ap << std::setw(10) << 100.0 * rep.mean_roc_auc << std::setprecision(3) << std::setw(10)
     << rep.ers << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Human performance: each participant's answers scored as predictions
// against the aggregated labels.

struct HumanPerformanceOptions {
  double confidence_min = 0.95;
  bool leave_one_out = false;  // re-aggregate without the participant (needs profiles)
  const ProfileMap* profiles = nullptr;
  DawidSkeneParams ds;
};

struct ParticipantPerformance {
  std::string participant_id;
  std::size_t scored_instances = 0;
  std::array<double, kNumCategories> f1{};
  std::array<MaybeReal, 3> r2{};
  std::array<MaybeReal, 3> r2_rank{};
  std::array<MaybeReal, 3> mse{};

  double mean_f1() const { return std::accumulate(f1.begin(), f1.end(), 0.0) / static_cast<double>(f1.size()); }
};

struct HumanPerformance {
  std::vector<ParticipantPerformance> participants;
  std::vector<std::pair<std::string, std::string>> excluded;  // (participant, note)
};

namespace metrics_detail {

// Aggregated labels recomputed without one participant's records.
inline std::map<std::string, AggregatedLabel> leave_one_out_labels(std::span<const AnnotationRecord> records,
                                                                   const std::string& participant,
                                                                   const ProfileMap& profiles,
                                                                   const DawidSkeneParams& ds) {
  std::vector<AnnotationRecord> rest;
  for (const auto& r : records)
    if (r.participant_id != participant && !r.corrupted) rest.push_back(r);
  std::map<std::string, AggregatedLabel> out;
  if (rest.empty()) return out;
  std::map<std::string, std::vector<const AnnotationRecord*>> by_inst;
  for (const auto& r : rest) by_inst[r.instance_id].push_back(&r);
  for (const auto& [id, recs] : by_inst) {
    AggregatedLabel l;
    l.instance_id = id;
    std::vector<double> rs;
    for (auto* r : recs) {
      auto it = profiles.find(r->participant_id);
      rs.push_back(it == profiles.end() ? 0.0 : it->second.r);
    }
    l.confidence = instance_confidence(rs);
    for (std::size_t d = 0; d < 3; ++d) {
      std::vector<WeightedScore> ws;
      for (std::size_t k = 0; k < recs.size(); ++k) ws.push_back({recs[k]->score(kDimensions[d]), rs[k]});
      try {
        l.vad[d] = aggregate_dimensional(ws);
      } catch (const DomainError&) {
        l.confidence = 0;
      }
    }
    out[id] = l;
  }
  for (std::size_t c = 0; c < kNumCategories; ++c) {
    auto cons = dawid_skene_records(rest, LabelSpec::of_category(c), ds);
    for (auto& [id, l] : out) {
      auto i = cons.find(id);
      l.ds_scores[c] = i ? cons.result.posteriors[*i][1] : 0.0;
      l.binary_labels[c] = l.ds_scores[c] >= 0.5;
    }
  }
  return out;
}

}  // namespace metrics_detail

inline HumanPerformance human_performance(std::span<const AnnotationRecord> records,
                                          std::span<const AggregatedLabel> labels,
                                          const HumanPerformanceOptions& opt = {}) {
  if (opt.leave_one_out && !opt.profiles) throw DomainError("leave-one-out scoring needs participant profiles");
  std::map<std::string, AggregatedLabel> full;
  for (const auto& l : labels) full[l.instance_id] = l;
  std::map<std::string, std::vector<const AnnotationRecord*>> by_participant;
  for (const auto& r : records)
    if (!r.corrupted) by_participant[r.participant_id].push_back(&r);

  HumanPerformance out;
  for (const auto& [pid, recs] : by_participant) {
    std::map<std::string, AggregatedLabel> loo;
    if (opt.leave_one_out) loo = metrics_detail::leave_one_out_labels(records, pid, *opt.profiles, opt.ds);
    const auto& ref = opt.leave_one_out ? loo : full;

    std::vector<std::pair<const AnnotationRecord*, const AggregatedLabel*>> pairs;
    for (auto* r : recs) {
      auto it = ref.find(r->instance_id);
      if (it != ref.end() && full.count(r->instance_id)) pairs.emplace_back(r, &it->second);
    }
    if (pairs.size() < 2) {
      out.excluded.emplace_back(pid, "fewer than two scored instances");
      continue;
    }
    ParticipantPerformance perf;
    perf.participant_id = pid;
    perf.scored_instances = pairs.size();
    std::vector<int> pr(pairs.size()), tr(pairs.size());
    for (std::size_t c = 0; c < kNumCategories; ++c) {
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        pr[i] = pairs[i].first->categories[c] ? 1 : 0;
        tr[i] = pairs[i].second->binary_labels[c] ? 1 : 0;
      }
      perf.f1[c] = f1_score(pr, tr);
    }
    for (std::size_t d = 0; d < 3; ++d) {
      std::vector<double> p, t;
      for (const auto& [r, l] : pairs) {
        if (l->confidence < opt.confidence_min) continue;
        p.push_back(r->score(kDimensions[d]) / 10.0);
        t.push_back(l->vad[d]);
      }
      if (p.size() < 2) continue;
      perf.mse[d] = mse(p, t);
      try {
        perf.r2[d] = r2(p, t, R2Mode::kVanilla);
        perf.r2_rank[d] = r2(p, t, R2Mode::kRankPercentile);
      } catch (const DomainError&) {
      }
    }
    out.participants.push_back(std::move(perf));
  }
  return out;
}

}  // namespace affectkit
