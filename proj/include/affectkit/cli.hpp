#pragma once

// Command-line front end. Exit codes: 0 ok, 1 other failure, 2 missing
// input file, 3 malformed input (schema or parse error).

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "affectkit/annotations.hpp"
#include "affectkit/forest.hpp"
#include "affectkit/http_api.hpp"
#include "affectkit/lma.hpp"
#include "affectkit/metrics.hpp"
#include "affectkit/quality_control.hpp"
#include "affectkit/service.hpp"
#include "affectkit/simkit.hpp"
#include "affectkit/skeleton.hpp"

namespace affectkit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitMissingFile = 2;
inline constexpr int kExitBadInput = 3;

class MissingFile : public Error {
 public:
  using Error::Error;
};

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("cannot open input file '" + path + "'");
  return in;
}

// Writes to `path`, or to `fallback` when path is empty or "-".
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw Error("cannot open output file '" + path + "'");
      stream_ = file_.get();
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

struct Globals {
  unsigned threads = 1;
  std::uint64_t seed = 0;
};

// Joins feature rows to labels by instance id (labels order), keeping the
// given splits.
struct Joined {
  std::vector<std::string> ids;
  std::vector<std::vector<MaybeReal>> features;
  std::vector<AggregatedLabel> labels;
};

inline Joined join_features(const FeatureTable& ft, const std::vector<AggregatedLabel>& labels,
                            const std::set<Split>& splits) {
  std::map<std::string, std::size_t> row;
  for (std::size_t i = 0; i < ft.ids.size(); ++i) row[ft.ids[i]] = i;
  Joined j;
  for (const auto& l : labels) {
    if (!splits.count(l.split)) continue;
    auto it = row.find(l.instance_id);
    if (it == row.end()) continue;
    j.ids.push_back(l.instance_id);
    j.features.push_back(ft.rows[it->second]);
    j.labels.push_back(l);
  }
  return j;
}

inline std::set<Split> parse_splits(const std::string& s) {
  if (s == "all") return {Split::kTrain, Split::kVal, Split::kTest};
  std::set<Split> out;
  for (const auto& tok : text::split(s, ',')) {
    auto v = enum_from_name<Split>(kSplitNames, text::trim(tok));
    if (!v) throw DomainError("unknown split '" + tok + "'");
    out.insert(*v);
  }
  return out;
}

inline std::vector<AnnotationRecord> load_annotations(const std::string& path) {
  auto in = open_input(path);
  return parse_annotations(in);
}

inline std::vector<AggregatedLabel> load_labels(const std::string& path) {
  auto in = open_input(path);
  return read_label_table(in);
}

inline FeatureTable load_features(const std::string& path) {
  auto in = open_input(path);
  return read_feature_table(in);
}

// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"affectkit: body-language emotion dataset tools (LMA features, annotation aggregation and QC, "
               "evaluation, random forests, simulation, annotation service)"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file overriding defaults (use <subcommand>.<flag> keys)");
  Globals g;
  app.add_option("--threads", g.threads, "worker threads; outputs do not depend on it")->capture_default_str();
  app.add_option("--seed", g.seed, "seed for every random choice")->capture_default_str();

  std::function<void()> action;

  // extract -------------------------------------------------------------
  struct {
    std::string input, output, limbs;
    std::size_t tau = 15;
    ValidationParams val;
    bool no_validate = false;
  } ex;
  auto* extract = app.add_subcommand("extract", "skeleton stream (JSON lines) -> LMA feature table");
  extract->add_option("--input", ex.input, "skeleton stream")->required();
  extract->add_option("--output", ex.output, "feature table (default stdout)");
  extract->add_option("--limbs", ex.limbs, "limb graph file (default: built-in 23-limb graph)");
  extract->add_option("--tau", ex.tau, "frame lag for finite differences")->capture_default_str();
  extract->add_option("--min-frames", ex.val.min_frames, "shortest accepted sequence")->capture_default_str();
  extract->add_option("--max-frames", ex.val.max_frames, "longest accepted sequence")->capture_default_str();
  extract->add_option("--min-coverage", ex.val.min_coverage, "fraction of frames with a detected pose")
      ->capture_default_str();
  extract->add_flag("--no-validate", ex.no_validate, "skip the ingestion filters");
  extract->callback([&] {
    action = [&] {
      auto in = open_input(ex.input);
      auto seqs = parse_skeleton_stream(in);
      LimbGraph limbs = default_limb_graph();
      if (!ex.limbs.empty()) {
        auto lf = open_input(ex.limbs);
        limbs = parse_limb_graph(lf);
      }
      std::vector<SkeletonSequence> kept;
      for (auto& s : seqs) {
        if (!ex.no_validate) {
          auto v = validate_instance(s, ex.val);
          if (!v.passed()) {
            err << "rejected " << s.instance_id << ":";
            for (auto r : v.reasons) err << ' ' << to_string(r);
            err << '\n';
            continue;
          }
        }
        kept.push_back(std::move(s));
      }
      auto rows = extract_batch(kept, limbs, KinematicParams{ex.tau}, g.threads);
      std::vector<std::string> ids;
      std::vector<LmaFeatureVector> good;
      for (std::size_t i = 0; i < kept.size(); ++i) {
        if (rows[i].values.empty()) {
          err << "rejected " << kept[i].instance_id << ": no visible limb\n";
          continue;
        }
        ids.push_back(kept[i].instance_id);
        good.push_back(std::move(rows[i]));
      }
      Output o(ex.output, out);
      write_feature_table(*o, lma_feature_names(limbs), ids, good);
    };
  });

  // aggregate -----------------------------------------------------------
  struct {
    std::string input, output, split = "0.7,0.1,0.2";
    double confidence_min = 0.95;
  } ag;
  auto* aggregate = app.add_subcommand("aggregate", "annotation table -> aggregated label table");
  aggregate->add_option("--input", ag.input, "annotation table")->required();
  aggregate->add_option("--output", ag.output, "label table (default stdout)");
  aggregate->add_option("--confidence-min", ag.confidence_min, "drop instances with lower confidence")
      ->capture_default_str();
  aggregate->add_option("--split", ag.split, "train,val,test fractions (whole movies per split)")
      ->capture_default_str();
  aggregate->callback([&] {
    action = [&] {
      auto records = load_annotations(ag.input);
      auto parts = text::split(ag.split, ',');
      if (parts.size() != 3) throw DomainError("--split needs three fractions");
      DatasetOptions opt;
      for (std::size_t i = 0; i < 3; ++i) {
        auto v = text::parse_double(parts[i]);
        if (!v || *v < 0) throw DomainError("bad split fraction '" + parts[i] + "'");
        opt.split[i] = *v;
      }
      opt.confidence_min = ag.confidence_min;
      opt.seed = g.seed;
      auto profiles = reliability_scores(records);
      auto ds = build_dataset(records, profiles, opt);
      for (const auto& id : ds.dropped) err << "dropped " << id << '\n';
      Output o(ag.output, out);
      write_label_table(*o, ds.labels);
    };
  });

  // qc ------------------------------------------------------------------
  struct {
    std::string input, gold, output;
    PolicyParams policy;
    std::int64_t now = 0;
  } qc;
  auto* qcmd = app.add_subcommand("qc", "annotation table -> QC report (JSON)");
  qcmd->add_option("--input", qc.input, "annotation table (hit_id column enables HIT scoring)")->required();
  qcmd->add_option("--gold", qc.gold, "gold-standard control config");
  qcmd->add_option("--output", qc.output, "report (default stdout)");
  qcmd->add_option("--reliability-threshold", qc.policy.reliability_threshold, "exclude below this r")
      ->capture_default_str();
  qcmd->add_option("--min-effective", qc.policy.min_effective, "annotations needed before exclusion applies")
      ->capture_default_str();
  qcmd->add_option("--now", qc.now, "policy clock, seconds since epoch")->capture_default_str();
  qcmd->callback([&] {
    action = [&] {
      auto records = load_annotations(qc.input);
      std::vector<GoldStandard> gold;
      if (!qc.gold.empty()) {
        auto gf = open_input(qc.gold);
        gold = parse_gold_config(gf);
      }
      auto rep = quality_report(records, gold, ExponentialErrorScorer(), qc.policy, qc.now);
      Output o(qc.output, out);
      *o << std::setw(2) << to_json(rep) << '\n';
    };
  });

  // kappa ---------------------------------------------------------------
  struct {
    std::string input, output;
    bool filtered = false;
    double threshold = 1.0 / 3.0;
  } kp;
  auto* kappa = app.add_subcommand("kappa", "annotation table -> Fleiss' kappa per label");
  kappa->add_option("--input", kp.input, "annotation table")->required();
  kappa->add_option("--output", kp.output, "kappa table (default stdout)");
  kappa->add_flag("--filtered", kp.filtered, "drop annotators below the reliability threshold first");
  kappa->add_option("--reliability-threshold", kp.threshold, "threshold used by --filtered")->capture_default_str();
  kappa->callback([&] {
    action = [&] {
      auto records = load_annotations(kp.input);
      std::set<std::string> keep;
      if (kp.filtered)
        for (const auto& [pid, p] : reliability_scores(records))
          if (p.r >= kp.threshold) keep.insert(pid);
      std::vector<LabelSpec> specs;
      for (std::size_t c = 0; c < kNumCategories; ++c) specs.push_back(LabelSpec::of_category(c));
      for (auto k : {LabelSpec::Kind::kGender, LabelSpec::Kind::kAge, LabelSpec::Kind::kEthnicity})
        specs.push_back({k, 0});
      Output o(kp.output, out);
      *o << "label,kappa,instances,mode\n";
      for (const auto& s : specs) {
        auto table = kp.filtered
                         ? agreement_table(records, s, [&](const std::string& pid) { return keep.count(pid) > 0; })
                         : agreement_table(records, s);
        *o << s.name() << ',';
        try {
          const auto mode = kp.filtered ? KappaMode::kVariableN : KappaMode::kFixedN;
          double k = kp.filtered ? fleiss_kappa(table, mode) : fleiss_kappa(table);
          *o << text::format_double(k);
        } catch (const DomainError&) {
        }
        *o << ',' << table.counts.size() << ',' << (kp.filtered ? "variable_n" : "auto") << '\n';
      }
    };
  });

  // evaluate ------------------------------------------------------------
  struct {
    std::string predictions, labels, output, split = "all";
  } ev;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "predictions + labels -> AP/RA/R2/ERS report");
  evaluate_cmd->add_option("--predictions", ev.predictions, "prediction table")->required();
  evaluate_cmd->add_option("--labels", ev.labels, "label table")->required();
  evaluate_cmd->add_option("--split", ev.split, "splits to score: all or a list of train,val,test")
      ->capture_default_str();
  evaluate_cmd->add_option("--output", ev.output, "report (default stdout)");
  evaluate_cmd->callback([&] {
    action = [&] {
      auto pf = open_input(ev.predictions);
      auto preds = read_predictions(pf);
      auto labels = load_labels(ev.labels);
      auto splits = parse_splits(ev.split);
      std::erase_if(labels, [&](const AggregatedLabel& l) { return !splits.count(l.split); });
      auto rep = evaluate(preds, labels);
      Output o(ev.output, out);
      *o << format_report(rep);
    };
  });

  // signif --------------------------------------------------------------
  struct {
    std::string features, labels, target, output, split = "all";
  } sg;
  auto* signif = app.add_subcommand("signif", "features + labels -> per-feature OLS R^2, sorted");
  signif->add_option("--features", sg.features, "feature table")->required();
  signif->add_option("--labels", sg.labels, "label table")->required();
  signif->add_option("--target", sg.target, "dimension or category name")->required();
  signif->add_option("--split", sg.split, "splits to use")->capture_default_str();
  signif->add_option("--output", sg.output, "R^2 table (default stdout)");
  signif->callback([&] {
    action = [&] {
      auto ft = load_features(sg.features);
      auto labels = load_labels(sg.labels);
      auto j = join_features(ft, labels, parse_splits(sg.split));
      auto t = target_by_name(sg.target);
      auto y = target_values(t, j.labels);
      std::vector<MaybeReal> target(y.begin(), y.end());
      auto scan = feature_significance(ft.names, j.features, target, g.threads);
      for (const auto& [f, note] : scan.skipped) err << "skipped " << f << ": " << note << '\n';
      Output o(sg.output, out);
      *o << "feature,r2,slope,intercept,n\n";
      for (const auto& r : scan.rows)
        *o << r.feature << ',' << text::format_double(r.r2) << ',' << text::format_double(r.slope) << ','
           << text::format_double(r.intercept) << ',' << r.n << '\n';
    };
  });

  // train ---------------------------------------------------------------
  struct {
    std::string features, labels, target = "all", output, split = "train";
    ForestConfig cfg;
    std::string max_depth = "none";
    bool cv = false;
    std::size_t folds = 5;
  } tr;
  auto* train = app.add_subcommand("train", "features + labels -> random forest model bundle");
  train->add_option("--features", tr.features, "feature table")->required();
  train->add_option("--labels", tr.labels, "label table")->required();
  train->add_option("--target", tr.target, "category, dimension, or 'all' (29 models)")->capture_default_str();
  train->add_option("--split", tr.split, "splits used for training")->capture_default_str();
  train->add_option("--output", tr.output, "model bundle")->required();
  train->add_option("--trees", tr.cfg.n_trees, "trees per forest")->capture_default_str();
  train->add_option("--max-depth", tr.max_depth, "depth limit or 'none'")->capture_default_str();
  train->add_option("--min-leaf", tr.cfg.min_samples_leaf, "minimum samples per leaf")->capture_default_str();
  train->add_flag("--cv", tr.cv, "pick trees/depth/leaf by k-fold search over the default grid");
  train->add_option("--folds", tr.folds, "folds for --cv")->capture_default_str();
  train->callback([&] {
    action = [&] {
      auto ft = load_features(tr.features);
      auto labels = load_labels(tr.labels);
      auto j = join_features(ft, labels, parse_splits(tr.split));
      if (j.ids.size() < 2) throw DomainError("fewer than two labelled feature rows to train on");
      auto X = impute(j.features);
      tr.cfg.seed = g.seed;
      if (tr.max_depth != "none") {
        auto d = text::parse_int(tr.max_depth);
        if (!d || *d < 0) throw DomainError("--max-depth must be a non-negative integer or 'none'");
        tr.cfg.max_depth = static_cast<std::size_t>(*d);
      }
      std::vector<TargetSpec> targets = tr.target == "all" ? all_targets() : std::vector{target_by_name(tr.target)};
      ModelBundle bundle;
      bundle.feature_names = ft.names;
      for (const auto& t : targets) {
        auto y = target_values(t, j.labels);
        Forest f;
        if (tr.cv) {
          auto res = cv_search(X, y, t.task, default_grid(g.seed), tr.folds, g.seed, j.ids, g.threads);
          err << t.name << ": " << describe(res.best) << '\n';
          f = std::move(res.model);
        } else {
          f = train_forest(X, y, tr.cfg, t.task, j.ids, g.threads);
        }
        bundle.models.emplace_back(t.name, std::move(f));
      }
      std::ofstream o(tr.output);
      if (!o) throw Error("cannot open output file '" + tr.output + "'");
      write_bundle(o, bundle);
    };
  });

  // predict -------------------------------------------------------------
  struct {
    std::string features, model, output;
  } pr;
  auto* predict = app.add_subcommand("predict", "features + model bundle -> prediction table");
  predict->add_option("--features", pr.features, "feature table")->required();
  predict->add_option("--model", pr.model, "model bundle")->required();
  predict->add_option("--output", pr.output, "predictions (default stdout)");
  predict->callback([&] {
    action = [&] {
      auto ft = load_features(pr.features);
      auto mf = open_input(pr.model);
      auto bundle = read_bundle(mf);
      if (bundle.feature_names != ft.names) throw SchemaError("feature columns differ from the ones the model used");
      auto X = impute(ft.rows);
      std::map<std::string, std::vector<double>> scores;
      for (const auto& [name, f] : bundle.models) scores[name] = predict_forest(f, X, g.threads);
      Output o(pr.output, out);
      if (scores.size() == all_targets().size()) {
        std::vector<Prediction> preds(ft.ids.size());
        for (std::size_t i = 0; i < preds.size(); ++i) {
          preds[i].instance_id = ft.ids[i];
          for (const auto& t : all_targets()) {
            const double v = scores.at(t.name)[i];
            if (t.task == ForestTask::kClassification) preds[i].scores[t.index] = v;
            else preds[i].vad[t.index] = v;
          }
        }
        write_predictions(*o, preds);
      } else {
        *o << "instance_id";
        for (const auto& [name, s] : scores) *o << ',' << name;
        *o << '\n';
        for (std::size_t i = 0; i < ft.ids.size(); ++i) {
          *o << ft.ids[i];
          for (const auto& [name, s] : scores) *o << ',' << text::format_double(s[i]);
          *o << '\n';
        }
      }
    };
  });

  // simulate ------------------------------------------------------------
  struct {
    std::string kind = "annotations", output, predictions;
    std::size_t instances = 100, honest = 8, dishonest = 2, exotic = 0, per_instance = 5;
    double sigma = 1.0, positive_rate = 0.1055;
    std::string motion = "composite";
    std::size_t frames = 300;
  } sm;
  auto* simulate = app.add_subcommand("simulate", "synthetic annotations, skeletons, or label/prediction tables");
  simulate->add_option("--kind", sm.kind, "annotations | skeletons | labels")
      ->check(CLI::IsMember({"annotations", "skeletons", "labels"}))
      ->capture_default_str();
  simulate->add_option("--output", sm.output, "output file (default stdout)");
  simulate->add_option("--instances", sm.instances, "instances or sequences")->capture_default_str();
  simulate->add_option("--honest", sm.honest, "honest annotators")->capture_default_str();
  simulate->add_option("--dishonest", sm.dishonest, "dishonest annotators")->capture_default_str();
  simulate->add_option("--exotic", sm.exotic, "exotic annotators")->capture_default_str();
  simulate->add_option("--per-instance", sm.per_instance, "annotators per instance (0: all)")
      ->capture_default_str();
  simulate->add_option("--sigma", sm.sigma, "honest score noise")->capture_default_str();
  simulate->add_option("--positive-rate", sm.positive_rate, "per-category positive rate")->capture_default_str();
  simulate->add_option("--motion", sm.motion, "stationary | uniform | quadratic | rotation | composite")
      ->check(CLI::IsMember({"stationary", "uniform", "quadratic", "rotation", "composite"}))
      ->capture_default_str();
  simulate->add_option("--frames", sm.frames, "frames per sequence")->capture_default_str();
  simulate->add_option("--predictions", sm.predictions, "labels: also write chance predictions here");
  simulate->callback([&] {
    action = [&] {
      Output o(sm.output, out);
      if (sm.kind == "annotations") {
        std::vector<sim::AnnotatorSpec> specs;
        auto add = [&](sim::Role role, std::size_t n) {
          if (!n) return;
          sim::AnnotatorSpec a;
          a.role = role;
          a.count = n;
          a.sigma = sm.sigma;
          specs.push_back(a);
        };
        add(sim::Role::kHonest, sm.honest);
        add(sim::Role::kDishonest, sm.dishonest);
        add(sim::Role::kExotic, sm.exotic);
        sim::TruthSpec ts;
        ts.n_instances = sm.instances;
        ts.positive_rate = sm.positive_rate;
        auto res = sim::gen_annotations(specs, ts, g.seed, {sm.per_instance});
        write_annotations(*o, res.records);
      } else if (sm.kind == "skeletons") {
        static const std::map<std::string, sim::MotionKind> kinds = {
            {"stationary", sim::MotionKind::kStationary}, {"uniform", sim::MotionKind::kUniform},
            {"quadratic", sim::MotionKind::kQuadratic},   {"rotation", sim::MotionKind::kRotation},
            {"composite", sim::MotionKind::kComposite}};
        std::vector<SkeletonSequence> seqs;
        for (std::size_t i = 0; i < sm.instances; ++i) {
          sim::MotionSpec ms;
          ms.kind = kinds.at(sm.motion);
          ms.frames = sm.frames;
          ms.instance_id = sim::padded("i", i);
          ms.movie_id = sim::padded("m", i / 10, 4);
          seqs.push_back(sim::gen_skeletons(ms, g.seed * 1000003ULL + i));
        }
        write_skeleton_stream(*o, seqs);
      } else {
        auto labels = sim::gen_label_table(sm.instances, sm.positive_rate, g.seed);
        write_label_table(*o, labels);
        if (!sm.predictions.empty()) {
          std::ofstream pf(sm.predictions);
          if (!pf) throw Error("cannot open output file '" + sm.predictions + "'");
          write_predictions(pf, sim::gen_chance_predictions(labels, g.seed + 1));
        }
      }
    };
  });

  // serve ---------------------------------------------------------------
  struct {
    std::string pool, gold, host = "127.0.0.1", log, replay;
    int port = 8080;
    bool uniform = false;
  } sv;
  auto* serve = app.add_subcommand("serve", "run the annotation service (JSON over HTTP)");
  serve->add_option("--pool", sv.pool, "instance pool CSV: instance_id,movie_id,media_url,frame_count")->required();
  serve->add_option("--gold", sv.gold, "gold-standard control config; its instances are the controls")->required();
  serve->add_option("--host", sv.host, "bind address")->capture_default_str();
  serve->add_option("--port", sv.port, "port")->capture_default_str();
  serve->add_option("--log", sv.log, "append events to this JSON-lines file");
  serve->add_option("--replay", sv.replay, "rebuild state from an event log before serving");
  serve->add_flag("--uniform", sv.uniform, "sample tasks uniformly instead of least-annotated first");
  serve->callback([&] {
    action = [&] {
      auto pf = open_input(sv.pool);
      std::string line;
      std::getline(pf, line);
      if (text::trim(line) != "instance_id,movie_id,media_url,frame_count")
        throw SchemaError("pool header must be instance_id,movie_id,media_url,frame_count");
      std::vector<PoolInstance> all;
      std::size_t lineno = 1;
      while (std::getline(pf, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        auto c = text::split(text::trim(line), ',');
        if (c.size() != 4) throw ParseError(lineno, "expected 4 fields");
        auto n = text::parse_int(c[3]);
        if (!n) throw ParseError(lineno, "bad frame_count");
        all.push_back({c[0], c[1], c[2], *n});
      }
      auto gf = open_input(sv.gold);
      auto gold = parse_gold_config(gf);
      std::set<std::string> control_ids;
      for (const auto& gs : gold) control_ids.insert(gs.control_instance_id);
      std::vector<PoolInstance> pool, controls;
      for (auto& p : all) (control_ids.count(p.instance_id) ? controls : pool).push_back(std::move(p));
      ServiceConfig cfg;
      cfg.seed = g.seed;
      cfg.uniform_sampling = sv.uniform;
      AnnotationService svc(pool, controls, gold, cfg);
      if (!sv.replay.empty()) {
        auto rf = open_input(sv.replay);
        std::vector<ServiceEvent> events;
        while (std::getline(rf, line))
          if (!text::trim(line).empty()) events.push_back(event_from_json(json::parse(line)));
        svc.replay(events);
      }
      std::ofstream log;
      if (!sv.log.empty()) {
        log.open(sv.log, std::ios::app);
        if (!log) throw Error("cannot open event log '" + sv.log + "'");
        svc.set_event_sink(&log);
      }
      httplib::Server srv;
      mount_api(srv, svc);
      err << "listening on " << sv.host << ':' << sv.port << '\n';
      if (!srv.listen(sv.host, sv.port)) throw Error("cannot bind " + sv.host + ":" + std::to_string(sv.port));
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }
  try {
    if (action) action();
    return kExitOk;
  } catch (const MissingFile& e) {
    err << "error: " << e.what() << '\n';
    return kExitMissingFile;
  } catch (const SchemaError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace affectkit::cli
