#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "affectkit/cli.hpp"

using namespace affectkit;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "affectkit");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("affectkit_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  std::string at(const std::string& name) const { return (dir / name).string(); }
  void write(const std::string& name, const std::string& text) const { std::ofstream(dir / name) << text; }

  fs::path dir;
};

}  // namespace

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(invoke({"aggregate", "--input", at("nope.csv")}).code, 2);
  write("bad.csv", "instance_id,what\n");
  auto r = invoke({"aggregate", "--input", at("bad.csv")});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("error"), std::string::npos);
  write("bad.jsonl", "{\"instance_id\":\"a\"\n");
  EXPECT_EQ(invoke({"extract", "--input", at("bad.jsonl")}).code, 3);
  EXPECT_NE(invoke({}).code, 0);
  EXPECT_NE(invoke({"frobnicate"}).code, 0);
  EXPECT_EQ(invoke({"--help"}).code, 0);
}

TEST_F(Cli, ExtractWritesFullFeatureTable) {
  ASSERT_EQ(invoke({"--seed", "3", "simulate", "--kind", "skeletons", "--instances", "3", "--frames", "150", "--output",
                 at("sk.jsonl")})
                .code,
            0);
  auto r = invoke({"--threads", "2", "extract", "--input", at("sk.jsonl"), "--output", at("f.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(at("f.csv"));
  auto t = read_feature_table(in);
  EXPECT_EQ(t.names.size(), kLmaDim);
  EXPECT_EQ(t.ids.size(), 3u);
  std::string header;
  std::ifstream again(at("f.csv"));
  std::getline(again, header);
  EXPECT_EQ(text::split(header, ',').size(), kLmaDim + 1);
  EXPECT_EQ(text::split(header, ',')[0], "instance_id");

  // Sequences shorter than the minimum are reported and skipped.
  invoke({"simulate", "--kind", "skeletons", "--instances", "2", "--frames", "50", "--output", at("short.jsonl")});
  auto s = invoke({"extract", "--input", at("short.jsonl")});
  EXPECT_EQ(s.code, 0);
  EXPECT_NE(s.err.find("rejected"), std::string::npos);
  EXPECT_EQ(s.out.find('\n'), s.out.size() - 1);
  EXPECT_EQ(invoke({"extract", "--input", at("short.jsonl"), "--no-validate"}).out,
            invoke({"extract", "--input", at("short.jsonl"), "--min-frames", "10"}).out);
}

TEST_F(Cli, AggregateConfidenceFilter) {
  invoke({"--seed", "4", "simulate", "--kind", "annotations", "--instances", "60", "--honest", "3", "--dishonest", "2",
       "--per-instance", "2", "--output", at("a.csv")});
  auto all = invoke({"aggregate", "--input", at("a.csv"), "--confidence-min", "0"});
  ASSERT_EQ(all.code, 0) << all.err;
  auto strict = invoke({"aggregate", "--input", at("a.csv"), "--confidence-min", "0.95"});
  ASSERT_EQ(strict.code, 0);
  std::istringstream a(all.out), s(strict.out);
  auto la = read_label_table(a);
  auto ls = read_label_table(s);
  EXPECT_LT(ls.size(), la.size());
  for (const auto& l : ls) EXPECT_GE(l.confidence, 0.95);
  std::size_t dropped = 0;
  for (const auto& l : la) dropped += l.confidence < 0.95;
  EXPECT_EQ(la.size() - ls.size(), dropped);
  EXPECT_NE(strict.err.find("dropped"), std::string::npos);
}

TEST_F(Cli, EvaluateChancePredictor) {
  ASSERT_EQ(invoke({"--seed", "7", "simulate", "--kind", "labels", "--instances", "2000", "--output", at("l.csv"),
                 "--predictions", at("p.csv")})
                .code,
            0);
  auto r = invoke({"evaluate", "--predictions", at("p.csv"), "--labels", at("l.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  auto lines = text::split(text::trim(r.out), '\n');
  std::istringstream last(lines.back());
  double mr2, map, mra, ers_v;
  last >> mr2 >> map >> mra >> ers_v;
  EXPECT_NEAR(ers_v, 0.151, 0.01);
  EXPECT_NEAR(mra, 50.0, 2.0);
  EXPECT_NEAR(mr2, 0.0, 1e-3);
  EXPECT_EQ(invoke({"evaluate", "--predictions", at("p.csv"), "--labels", at("l.csv"), "--split", "train"}).code, 1);
}

TEST_F(Cli, SeededOutputsRepeat) {
  auto a = invoke({"--seed", "11", "simulate", "--kind", "annotations", "--instances", "20"});
  auto b = invoke({"--seed", "11", "simulate", "--kind", "annotations", "--instances", "20"});
  auto c = invoke({"--seed", "12", "simulate", "--kind", "annotations", "--instances", "20"});
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, c.out);
  write("a.csv", a.out);
  EXPECT_EQ(invoke({"--seed", "1", "aggregate", "--input", at("a.csv"), "--confidence-min", "0"}).out,
            invoke({"--seed", "1", "--threads", "4", "aggregate", "--input", at("a.csv"), "--confidence-min", "0"}).out);
}

TEST_F(Cli, KappaAndQc) {
  invoke({"--seed", "5", "simulate", "--kind", "annotations", "--instances", "40", "--honest", "4", "--dishonest", "2",
       "--output", at("a.csv")});
  auto k = invoke({"kappa", "--input", at("a.csv")});
  ASSERT_EQ(k.code, 0) << k.err;
  auto rows = text::split(text::trim(k.out), '\n');
  EXPECT_EQ(rows.size(), 1u + 26 + 3);
  EXPECT_EQ(rows[0], "label,kappa,instances,mode");
  auto kf = invoke({"kappa", "--input", at("a.csv"), "--filtered"});
  EXPECT_NE(kf.out.find("variable_n"), std::string::npos);

  write("gold.ini", "[control c1]\nvalence = 1-6\n");
  auto q = invoke({"qc", "--input", at("a.csv"), "--gold", at("gold.ini"), "--now", "100"});
  ASSERT_EQ(q.code, 0) << q.err;
  auto j = json::parse(q.out);
  EXPECT_EQ(j["version"], 1);
  EXPECT_EQ(j["participants"].size(), 6u);
  write("badgold.ini", "[control c1]\nvalence = 9-2\n");
  EXPECT_EQ(invoke({"qc", "--input", at("a.csv"), "--gold", at("badgold.ini")}).code, 3);
}

TEST_F(Cli, TrainPredictSignif) {
  invoke({"--seed", "2", "simulate", "--kind", "skeletons", "--instances", "30", "--frames", "130", "--output",
       at("sk.jsonl")});
  ASSERT_EQ(invoke({"extract", "--input", at("sk.jsonl"), "--output", at("f.csv")}).code, 0);
  // Labels for the same ids: the generated label table uses i000000..., the
  // skeletons i00000..., so relabel ids from the feature table.
  std::ifstream fin(at("f.csv"));
  auto ft = read_feature_table(fin);
  auto labels = sim::gen_label_table(ft.ids.size(), 0.3, 9);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    labels[i].instance_id = ft.ids[i];
    labels[i].split = i < 20 ? Split::kTrain : Split::kTest;
  }
  {
    std::ofstream lo(at("l.csv"));
    write_label_table(lo, labels);
  }
  auto t = invoke({"train", "--features", at("f.csv"), "--labels", at("l.csv"), "--target", "valence", "--trees", "5",
                "--output", at("m.txt")});
  ASSERT_EQ(t.code, 0) << t.err;
  auto p = invoke({"predict", "--features", at("f.csv"), "--model", at("m.txt")});
  ASSERT_EQ(p.code, 0) << p.err;
  auto lines = text::split(text::trim(p.out), '\n');
  EXPECT_EQ(lines.size(), 31u);
  EXPECT_EQ(lines[0], "instance_id,valence");
  EXPECT_EQ(p.out, invoke({"--threads", "3", "predict", "--features", at("f.csv"), "--model", at("m.txt")}).out);

  // A full bundle predicts in the prediction-table schema.
  ASSERT_EQ(invoke({"train", "--features", at("f.csv"), "--labels", at("l.csv"), "--trees", "3", "--output",
                    at("all.txt")})
                .code,
            0);
  auto full = invoke({"predict", "--features", at("f.csv"), "--model", at("all.txt")});
  ASSERT_EQ(full.code, 0) << full.err;
  std::istringstream pin(full.out);
  EXPECT_EQ(read_predictions(pin).size(), 30u);

  auto s = invoke({"signif", "--features", at("f.csv"), "--labels", at("l.csv"), "--target", "arousal"});
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_GT(text::split(text::trim(s.out), '\n').size(), 100u);
  EXPECT_NE(invoke({"signif", "--features", at("f.csv"), "--labels", at("l.csv"), "--target", "nonsense"}).code, 0);
}

TEST_F(Cli, ConfigFile) {
  write("run.ini", "seed = 11\n[simulate]\nkind = annotations\ninstances = 20\n");
  auto viaconfig = invoke({"--config", at("run.ini"), "simulate"});
  ASSERT_EQ(viaconfig.code, 0) << viaconfig.err;
  EXPECT_EQ(viaconfig.out, invoke({"--seed", "11", "simulate", "--kind", "annotations", "--instances", "20"}).out);
  EXPECT_NE(invoke({"--config", at("missing.ini"), "simulate"}).code, 0);
}
