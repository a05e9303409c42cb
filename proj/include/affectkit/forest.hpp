#pragma once

// Random forests (CART trees on bootstrap samples) over imputed LMA feature
// matrices, k-fold parameter search, and single-feature OLS scans.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "affectkit/common.hpp"
#include "affectkit/metrics.hpp"

namespace affectkit {

inline constexpr double kImputeValue = 1000.0;

// Row-major dense matrix with no missing entries.
struct ImputedMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;
  double impute_value = kImputeValue;

  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }
};

inline ImputedMatrix impute(const std::vector<std::vector<MaybeReal>>& rows, double value = kImputeValue) {
  ImputedMatrix m;
  m.rows = rows.size();
  m.cols = rows.empty() ? 0 : rows.front().size();
  m.impute_value = value;
  m.data.reserve(m.rows * m.cols);
  for (const auto& r : rows) {
    if (r.size() != m.cols) throw DomainError("ragged feature rows");
    for (const auto& v : r) m.data.push_back(v ? *v : value);
  }
  return m;
}

inline ImputedMatrix dense_matrix(const std::vector<std::vector<double>>& rows) {
  ImputedMatrix m;
  m.rows = rows.size();
  m.cols = rows.empty() ? 0 : rows.front().size();
  for (const auto& r : rows) {
    if (r.size() != m.cols) throw DomainError("ragged feature rows");
    m.data.insert(m.data.end(), r.begin(), r.end());
  }
  return m;
}

enum class ForestTask { kClassification, kRegression };
enum class FeatureRule { kAuto, kSqrt, kThird, kAll };

struct ForestConfig {
  std::size_t n_trees = 100;
  std::optional<std::size_t> max_depth;  // nullopt: grow until pure; 0: a single leaf
  std::size_t min_samples_leaf = 1;
  FeatureRule features = FeatureRule::kAuto;  // auto: sqrt(d) classification, d/3 regression
  std::uint64_t seed = 0;

  bool operator==(const ForestConfig&) const = default;
};

inline std::string describe(const ForestConfig& c) {
  std::ostringstream os;
  os << "n_trees=" << c.n_trees << " max_depth=" << (c.max_depth ? std::to_string(*c.max_depth) : "none")
     << " min_samples_leaf=" << c.min_samples_leaf;
  return os.str();
}

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0;       // x <= threshold goes left
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0;  // leaf mean (class-1 frequency for classification)
};

struct Tree {
  std::vector<TreeNode> nodes;

  double predict(const double* x) const {
    std::size_t n = 0;
    while (nodes[n].feature >= 0) n = static_cast<std::size_t>(x[nodes[n].feature] <= nodes[n].threshold ? nodes[n].left : nodes[n].right);
    return nodes[n].value;
  }
};

struct Forest {
  ForestTask task = ForestTask::kClassification;
  ForestConfig config;
  std::size_t n_features = 0;
  std::vector<Tree> trees;
};

namespace forest_detail {

inline constexpr std::uint64_t kBootstrapStream = ~std::uint64_t{0};

// Independent generator for each (seed, tree, node) key, so a tree's
// randomness does not depend on which thread builds it or in what order.
inline std::mt19937_64 keyed_rng(std::uint64_t seed, std::uint64_t tree, std::uint64_t node) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq sq{lo(seed), hi(seed), lo(tree), hi(tree), lo(node), hi(node)};
  return std::mt19937_64(sq);
}

inline std::size_t features_per_split(const ForestConfig& cfg, ForestTask task, std::size_t d) {
  FeatureRule rule = cfg.features;
  if (rule == FeatureRule::kAuto) rule = task == ForestTask::kClassification ? FeatureRule::kSqrt : FeatureRule::kThird;
  std::size_t m = d;
  if (rule == FeatureRule::kSqrt) m = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(d))));
  else if (rule == FeatureRule::kThird) m = d / 3;
  return std::clamp<std::size_t>(m, 1, std::max<std::size_t>(d, 1));
}

struct Split {
  std::size_t feature = 0;
  double threshold = 0;
  double gain = 0;
};

// Best threshold on one feature. The criterion is the drop in summed squared
// error; for 0/1 targets this is half the drop in n-weighted Gini impurity,
// so one routine serves both tasks.
inline std::optional<Split> best_split_on(const ImputedMatrix& X, const std::vector<double>& y,
                                          const std::vector<std::size_t>& idx, std::size_t f, std::size_t min_leaf,
                                          double parent_score, std::vector<std::pair<double, double>>& buf) {
  buf.clear();
  for (auto i : idx) buf.emplace_back(X(i, f), y[i]);
  std::sort(buf.begin(), buf.end());
  const std::size_t n = buf.size();
  if (buf.front().first == buf.back().first) return std::nullopt;
  double total = 0;
  for (const auto& p : buf) total += p.second;
  double left = 0;
  std::optional<Split> best;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    left += buf[i].second;
    const std::size_t nl = i + 1, nr = n - nl;
    if (buf[i].first == buf[i + 1].first || nl < min_leaf || nr < min_leaf) continue;
    const double right = total - left;
    const double score = left * left / static_cast<double>(nl) + right * right / static_cast<double>(nr);
    const double gain = score - parent_score;
    if (gain > 0 && (!best || gain > best->gain)) {
      double thr = 0.5 * (buf[i].first + buf[i + 1].first);
      if (!(thr < buf[i + 1].first)) thr = buf[i].first;
      best = Split{f, thr, gain};
    }
  }
  return best;
}

inline Tree build_tree(const ImputedMatrix& X, const std::vector<double>& y, const ForestConfig& cfg, ForestTask task,
                       std::size_t tree_index) {
  const std::size_t n = X.rows;
  std::vector<std::size_t> sample(n);
  {
    auto rng = keyed_rng(cfg.seed, tree_index, kBootstrapStream);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (auto& s : sample) s = pick(rng);
    std::sort(sample.begin(), sample.end());
  }
  const std::size_t mtry = features_per_split(cfg, task, X.cols);
  const std::size_t min_leaf = std::max<std::size_t>(cfg.min_samples_leaf, 1);

  Tree tree;
  struct Pending {
    std::size_t node;
    std::size_t depth;
    std::vector<std::size_t> idx;
  };
  std::vector<Pending> stack;
  tree.nodes.emplace_back();
  stack.push_back({0, 0, std::move(sample)});
  std::vector<std::size_t> order(X.cols);
  std::vector<std::pair<double, double>> buf;
  while (!stack.empty()) {
    Pending p = std::move(stack.back());
    stack.pop_back();
    double sum = 0;
    bool pure = true;
    for (auto i : p.idx) {
      sum += y[i];
      pure = pure && y[i] == y[p.idx.front()];
    }
    const double m = static_cast<double>(p.idx.size());
    tree.nodes[p.node].value = sum / m;
    if (pure || p.idx.size() < 2 * min_leaf || (cfg.max_depth && p.depth >= *cfg.max_depth)) continue;

    auto rng = keyed_rng(cfg.seed, tree_index, p.node);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const double parent_score = sum * sum / m;
    std::optional<Split> best;
    // Like common CART implementations, keep drawing features past mtry until
    // at least one valid split turns up.
    for (std::size_t k = 0; k < order.size() && (k < mtry || !best); ++k) {
      auto s = best_split_on(X, y, p.idx, order[k], min_leaf, parent_score, buf);
      if (s && (!best || s->gain > best->gain)) best = s;
    }
    if (!best) continue;

    std::vector<std::size_t> li, ri;
    for (auto i : p.idx) (X(i, best->feature) <= best->threshold ? li : ri).push_back(i);
    const auto l = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    auto& node = tree.nodes[p.node];
    node.feature = static_cast<std::int32_t>(best->feature);
    node.threshold = best->threshold;
    node.left = l;
    node.right = l + 1;
    // Right pushed first so the left subtree is numbered first.
    stack.push_back({static_cast<std::size_t>(l + 1), p.depth + 1, std::move(ri)});
    stack.push_back({static_cast<std::size_t>(l), p.depth + 1, std::move(li)});
  }
  return tree;
}

// Permutation putting rows in sorted-id order.
inline std::vector<std::size_t> canonical_order(const std::vector<std::string>& ids, std::size_t n) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  if (ids.empty()) return perm;
  if (ids.size() != n) throw DomainError("row ids do not match the matrix");
  std::stable_sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
  return perm;
}

inline ImputedMatrix take_rows(const ImputedMatrix& X, const std::vector<std::size_t>& rows) {
  ImputedMatrix out;
  out.rows = rows.size();
  out.cols = X.cols;
  out.impute_value = X.impute_value;
  out.data.reserve(out.rows * out.cols);
  for (auto r : rows) out.data.insert(out.data.end(), X.row(r), X.row(r) + X.cols);
  return out;
}

template <typename T>
std::vector<T> take(const std::vector<T>& v, const std::vector<std::size_t>& rows) {
  std::vector<T> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(v[r]);
  return out;
}

}  // namespace forest_detail

// When `ids` is given, rows are first put in sorted-id order so the model does
// not depend on input row order.
inline Forest train_forest(const ImputedMatrix& X, const std::vector<double>& y, const ForestConfig& cfg,
                           ForestTask task, const std::vector<std::string>& ids = {}, unsigned threads = 1) {
  if (X.rows != y.size()) throw DomainError("feature rows and targets differ in length");
  if (X.rows < 2) throw DomainError("training needs at least two samples");
  if (X.cols == 0) throw DomainError("training needs at least one feature");
  if (cfg.n_trees < 1) throw DomainError("n_trees must be at least 1");
  if (task == ForestTask::kClassification) {
    bool pos = false, neg = false;
    for (double v : y) {
      if (v != 0.0 && v != 1.0) throw DomainError("classification targets must be 0 or 1");
      (v == 1.0 ? pos : neg) = true;
    }
    if (!pos || !neg) throw DomainError("classification target has a single class");
  }
  const auto perm = forest_detail::canonical_order(ids, X.rows);
  const auto Xc = forest_detail::take_rows(X, perm);
  const auto yc = forest_detail::take(y, perm);

  Forest f;
  f.task = task;
  f.config = cfg;
  f.n_features = X.cols;
  f.trees.resize(cfg.n_trees);
  parallel_for(cfg.n_trees, threads, [&](std::size_t t) { f.trees[t] = forest_detail::build_tree(Xc, yc, cfg, task, t); });
  return f;
}

// Mean of tree outputs: class-1 probability or regression value.
inline std::vector<double> predict_forest(const Forest& f, const ImputedMatrix& X, unsigned threads = 1) {
  if (X.cols != f.n_features)
    throw DomainError("model expects " + std::to_string(f.n_features) + " features, got " + std::to_string(X.cols));
  std::vector<double> out(X.rows, 0.0);
  parallel_for(X.rows, threads, [&](std::size_t r) {
    double s = 0;
    for (const auto& t : f.trees) s += t.predict(X.row(r));
    out[r] = s / static_cast<double>(f.trees.size());
  });
  return out;
}

// ---------------------------------------------------------------------------
// Serialization: line-oriented text; doubles in shortest round-trip form.

inline constexpr int kForestFormatVersion = 1;

inline void write_forest(std::ostream& out, const Forest& f) {
  out << "forest " << kForestFormatVersion << '\n';
  out << "task " << (f.task == ForestTask::kClassification ? "classification" : "regression") << '\n';
  out << "n_features " << f.n_features << '\n';
  out << "n_trees " << f.config.n_trees << '\n';
  out << "max_depth " << (f.config.max_depth ? std::to_string(*f.config.max_depth) : "none") << '\n';
  out << "min_samples_leaf " << f.config.min_samples_leaf << '\n';
  out << "features " << static_cast<int>(f.config.features) << '\n';
  out << "seed " << f.config.seed << '\n';
  for (const auto& t : f.trees) {
    out << "tree " << t.nodes.size() << '\n';
    for (const auto& n : t.nodes)
      out << n.feature << ' ' << text::format_double(n.threshold) << ' ' << n.left << ' ' << n.right << ' '
          << text::format_double(n.value) << '\n';
  }
  out << "end\n";
}

inline Forest read_forest(std::istream& in) {
  auto expect = [&in](const std::string& key) {
    std::string k;
    if (!(in >> k) || k != key) throw SchemaError("model file: expected '" + key + "'");
  };
  auto number = [&in](const char* what) {
    std::string s;
    in >> s;
    auto v = text::parse_double(s);
    if (!v) throw SchemaError(std::string("model file: bad ") + what);
    return *v;
  };
  Forest f;
  expect("forest");
  int version = 0;
  if (!(in >> version) || version != kForestFormatVersion)
    throw SchemaError("model file: unsupported format version " + std::to_string(version));
  expect("task");
  std::string task;
  in >> task;
  if (task == "classification") f.task = ForestTask::kClassification;
  else if (task == "regression") f.task = ForestTask::kRegression;
  else throw SchemaError("model file: unknown task " + task);
  expect("n_features");
  in >> f.n_features;
  expect("n_trees");
  in >> f.config.n_trees;
  expect("max_depth");
  std::string depth;
  in >> depth;
  if (depth != "none") f.config.max_depth = static_cast<std::size_t>(std::stoull(depth));
  expect("min_samples_leaf");
  in >> f.config.min_samples_leaf;
  expect("features");
  int rule = 0;
  in >> rule;
  f.config.features = static_cast<FeatureRule>(rule);
  expect("seed");
  in >> f.config.seed;
  for (std::size_t t = 0; t < f.config.n_trees; ++t) {
    expect("tree");
    std::size_t n = 0;
    if (!(in >> n) || n == 0) throw SchemaError("model file: bad tree size");
    Tree tree;
    tree.nodes.resize(n);
    for (auto& node : tree.nodes) {
      in >> node.feature;
      node.threshold = number("threshold");
      in >> node.left >> node.right;
      node.value = number("leaf value");
      if (!in) throw SchemaError("model file: truncated tree");
      const auto limit = static_cast<std::int32_t>(n);
      if (node.feature >= static_cast<std::int32_t>(f.n_features) ||
          (node.feature >= 0 && (node.left <= 0 || node.right <= 0 || node.left >= limit || node.right >= limit)))
        throw SchemaError("model file: corrupt node");
    }
    f.trees.push_back(std::move(tree));
  }
  expect("end");
  return f;
}

// ---------------------------------------------------------------------------
// Parameter search.

inline std::vector<ForestConfig> default_grid(std::uint64_t seed = 0) {
  std::vector<ForestConfig> grid;
  for (std::size_t trees : {100, 300})
    for (std::optional<std::size_t> depth : {std::optional<std::size_t>(8), std::optional<std::size_t>(16),
                                             std::optional<std::size_t>()})
      for (std::size_t leaf : {1, 5}) {
        ForestConfig c;
        c.n_trees = trees;
        c.max_depth = depth;
        c.min_samples_leaf = leaf;
        c.seed = seed;
        grid.push_back(c);
      }
  return grid;
}

struct CvResult {
  std::size_t best_index = 0;
  ForestConfig best;
  std::vector<MaybeReal> mean_scores;  // per grid point; empty when no fold was scorable
  Forest model;
};

// Fold assignment over sorted-id order: a seeded shuffle dealt round-robin,
// separately per class for classification so every fold sees both classes
// when the data allow it.
inline std::vector<std::size_t> assign_folds(const std::vector<double>& y, ForestTask task, std::size_t k,
                                             std::uint64_t seed) {
  std::vector<std::size_t> fold(y.size());
  std::mt19937_64 rng(seed);
  auto deal = [&](std::vector<std::size_t> rows) {
    std::shuffle(rows.begin(), rows.end(), rng);
    for (std::size_t i = 0; i < rows.size(); ++i) fold[rows[i]] = i % k;
  };
  if (task == ForestTask::kClassification) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < y.size(); ++i) (y[i] == 1.0 ? pos : neg).push_back(i);
    deal(pos);
    deal(neg);
  } else {
    std::vector<std::size_t> all(y.size());
    std::iota(all.begin(), all.end(), 0);
    deal(all);
  }
  return fold;
}

// Metric: AP for classification, R^2 for regression. Ties keep the earliest
// grid point.
inline CvResult cv_search(const ImputedMatrix& X, const std::vector<double>& y, ForestTask task,
                          const std::vector<ForestConfig>& grid, std::size_t k_folds = 5, std::uint64_t seed = 0,
                          const std::vector<std::string>& ids = {}, unsigned threads = 1) {
  if (grid.empty()) throw DomainError("parameter grid is empty");
  if (k_folds < 2) throw DomainError("cross validation needs at least two folds");
  if (X.rows != y.size()) throw DomainError("feature rows and targets differ in length");
  const auto perm = forest_detail::canonical_order(ids, X.rows);
  const auto Xc = forest_detail::take_rows(X, perm);
  const auto yc = forest_detail::take(y, perm);
  const auto fold = assign_folds(yc, task, k_folds, seed);

  CvResult res;
  std::optional<double> best_score;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double sum = 0;
    std::size_t scored = 0;
    for (std::size_t k = 0; k < k_folds; ++k) {
      std::vector<std::size_t> tr, va;
      for (std::size_t i = 0; i < yc.size(); ++i) (fold[i] == k ? va : tr).push_back(i);
      if (va.size() < 2 || tr.size() < 2) continue;
      const auto ytr = forest_detail::take(yc, tr);
      const auto yva = forest_detail::take(yc, va);
      try {
        auto model = train_forest(forest_detail::take_rows(Xc, tr), ytr, grid[g], task, {}, threads);
        auto pred = predict_forest(model, forest_detail::take_rows(Xc, va), threads);
        if (task == ForestTask::kClassification) {
          std::vector<int> lab(yva.begin(), yva.end());
          sum += average_precision(pred, lab);
        } else {
          sum += r2(pred, yva);
        }
        ++scored;
      } catch (const DomainError&) {
        // fold without both classes or with constant truth
      }
    }
    MaybeReal mean;
    if (scored) mean = sum / static_cast<double>(scored);
    res.mean_scores.push_back(mean);
    if (mean && (!best_score || *mean > *best_score)) {
      best_score = mean;
      res.best_index = g;
    }
  }
  res.best = grid[res.best_index];
  res.model = train_forest(Xc, yc, res.best, task, {}, threads);
  return res;
}

// ---------------------------------------------------------------------------
// Single-feature significance scan.

struct SignificanceRow {
  std::string feature;
  double r2 = 0;
  double slope = 0;
  double intercept = 0;
  std::size_t n = 0;
};

struct SignificanceScan {
  std::vector<SignificanceRow> rows;  // sorted by R^2 descending, then name
  std::vector<std::pair<std::string, std::string>> skipped;  // (feature, note)
};

inline constexpr std::size_t kMinSignificanceRows = 10;

// OLS of target on each feature over rows where both are present.
inline SignificanceScan feature_significance(const std::vector<std::string>& names,
                                             const std::vector<std::vector<MaybeReal>>& X,
                                             const std::vector<MaybeReal>& target, unsigned threads = 1) {
  if (X.size() != target.size()) throw DomainError("feature rows and targets differ in length");
  {
    std::optional<double> first;
    bool varies = false;
    for (const auto& t : target) {
      if (!t) continue;
      if (!first) first = *t;
      else if (*t != *first) varies = true;
    }
    if (!varies) throw DomainError("significance scan needs a non-constant target");
  }
  const std::size_t d = names.size();
  std::vector<std::optional<SignificanceRow>> rows(d);
  std::vector<std::string> notes(d);
  parallel_for(d, threads, [&](std::size_t c) {
    // Two-pass centred sums for accuracy.
    double sx = 0, sy = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < X.size(); ++i) {
      if (!X[i][c] || !target[i]) continue;
      sx += *X[i][c];
      sy += *target[i];
      ++n;
    }
    if (n < kMinSignificanceRows) {
      notes[c] = "fewer than " + std::to_string(kMinSignificanceRows) + " valid rows";
      return;
    }
    const double mx = sx / static_cast<double>(n), my = sy / static_cast<double>(n);
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < X.size(); ++i) {
      if (!X[i][c] || !target[i]) continue;
      const double dx = *X[i][c] - mx, dy = *target[i] - my;
      sxx += dx * dx;
      syy += dy * dy;
      sxy += dx * dy;
    }
    if (syy == 0) {
      notes[c] = "target constant on valid rows";
      return;
    }
    SignificanceRow r;
    r.feature = names[c];
    r.n = n;
    if (sxx > 0) {
      r.slope = sxy / sxx;
      r.r2 = std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
    }
    r.intercept = my - r.slope * mx;
    rows[c] = r;
  });
  SignificanceScan scan;
  for (std::size_t c = 0; c < d; ++c) {
    if (rows[c]) scan.rows.push_back(*rows[c]);
    else scan.skipped.emplace_back(names[c], notes[c]);
  }
  std::stable_sort(scan.rows.begin(), scan.rows.end(), [](const SignificanceRow& a, const SignificanceRow& b) {
    return a.r2 != b.r2 ? a.r2 > b.r2 : a.feature < b.feature;
  });
  return scan;
}

// ---------------------------------------------------------------------------
// One model per target: 26 categories (classification) and 3 dimensions.

struct TargetSpec {
  std::string name;
  ForestTask task;
  std::size_t index;  // category or dimension index
};

inline std::vector<TargetSpec> all_targets() {
  std::vector<TargetSpec> out;
  for (std::size_t c = 0; c < kNumCategories; ++c)
    out.push_back({std::string(kCategoryNames[c]), ForestTask::kClassification, c});
  for (std::size_t d = 0; d < 3; ++d) out.push_back({std::string(kDimensionNames[d]), ForestTask::kRegression, d});
  return out;
}

inline TargetSpec target_by_name(const std::string& name) {
  for (auto& t : all_targets())
    if (t.name == name) return t;
  throw DomainError("unknown target '" + name + "'");
}

inline std::vector<double> target_values(const TargetSpec& t, std::span<const AggregatedLabel> labels) {
  std::vector<double> y;
  y.reserve(labels.size());
  for (const auto& l : labels)
    y.push_back(t.task == ForestTask::kClassification ? (l.binary_labels[t.index] ? 1.0 : 0.0) : l.vad[t.index]);
  return y;
}

struct ModelBundle {
  std::vector<std::string> feature_names;
  std::vector<std::pair<std::string, Forest>> models;  // target name -> forest
};

inline void write_bundle(std::ostream& out, const ModelBundle& b) {
  out << "bundle " << kForestFormatVersion << '\n' << "features " << b.feature_names.size() << '\n';
  for (const auto& n : b.feature_names) out << n << '\n';
  out << "models " << b.models.size() << '\n';
  for (const auto& [name, f] : b.models) {
    out << "target " << name << '\n';
    write_forest(out, f);
  }
}

inline ModelBundle read_bundle(std::istream& in) {
  ModelBundle b;
  std::string key;
  int version = 0;
  if (!(in >> key >> version) || key != "bundle" || version != kForestFormatVersion)
    throw SchemaError("not a model bundle (or unsupported version)");
  std::size_t n = 0;
  if (!(in >> key >> n) || key != "features") throw SchemaError("model bundle: expected features");
  b.feature_names.resize(n);
  for (auto& f : b.feature_names) in >> f;
  if (!(in >> key >> n) || key != "models") throw SchemaError("model bundle: expected models");
  for (std::size_t i = 0; i < n; ++i) {
    std::string name;
    if (!(in >> key >> name) || key != "target") throw SchemaError("model bundle: expected target");
    b.models.emplace_back(name, read_forest(in));
  }
  return b;
}

}  // namespace affectkit
