#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "affectkit/skeleton.hpp"
#include "affectkit/simkit.hpp"

using namespace affectkit;

namespace {

SkeletonSequence posed(std::size_t frames, std::uint64_t seed = 0) {
  sim::MotionSpec spec;
  spec.kind = sim::MotionKind::kComposite;
  spec.frames = frames;
  spec.instance_id = "clip_" + std::to_string(seed);
  return sim::gen_skeletons(spec, seed);
}

std::string joints_json(double conf) {
  std::string s = "[";
  for (std::size_t k = 0; k < kNumJoints; ++k) s += (k ? "," : "") + std::string("[1.5,2.5,") + std::to_string(conf) + "]";
  return s + "]";
}

}  // namespace

TEST(SkeletonStream, TwoFrameRecordAllVisible) {
  std::istringstream in(R"({"instance_id":"a","movie_id":"m","fps":25,"frames":[{"t":0,"joints":)" + joints_json(0.9) +
                        R"(},{"t":1,"joints":)" + joints_json(0.9) + "}]}\n");
  auto seqs = parse_skeleton_stream(in);
  ASSERT_EQ(seqs.size(), 1u);
  EXPECT_EQ(seqs[0].length(), 2u);
  for (const auto& f : seqs[0].frames)
    for (const auto& k : f.joints) EXPECT_TRUE(k.visible());
  EXPECT_DOUBLE_EQ(seqs[0].fps, 25.0);
}

TEST(SkeletonStream, ZeroConfidenceIsInvisible) {
  std::string joints = joints_json(0.9);
  joints.replace(joints.find("0.900000"), 8, "0");
  std::istringstream in(R"({"instance_id":"a","movie_id":"m","fps":30,"frames":[{"t":0,"joints":)" + joints + "}]}\n");
  auto seqs = parse_skeleton_stream(in);
  EXPECT_FALSE(seqs[0].frames[0].joints[0].visible());
  EXPECT_TRUE(seqs[0].frames[0].joints[1].visible());
}

TEST(SkeletonStream, TruncatedLineNamesLine) {
  std::ostringstream buf;
  write_skeleton_stream(buf, {posed(3, 1)});
  std::string text = buf.str() + R"({"instance_id":"b","movie_id":"m","fps":30,"fra)";
  std::istringstream in(text);
  try {
    parse_skeleton_stream(in);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(SkeletonStream, DuplicateIdRejected) {
  std::ostringstream buf;
  write_skeleton_stream(buf, {posed(3, 1), posed(3, 1)});
  std::istringstream in(buf.str());
  EXPECT_THROW(parse_skeleton_stream(in), ParseError);
}

TEST(SkeletonStream, RejectsNonIncreasingFramesAndWrongJointCount) {
  std::istringstream a(R"({"instance_id":"a","movie_id":"m","fps":30,"frames":[{"t":1,"joints":)" + joints_json(1) +
                       R"(},{"t":1,"joints":)" + joints_json(1) + "}]}\n");
  EXPECT_THROW(parse_skeleton_stream(a), ParseError);
  std::istringstream b(R"({"instance_id":"a","movie_id":"m","fps":30,"frames":[{"t":0,"joints":[[1,2,1]]}]})");
  EXPECT_THROW(parse_skeleton_stream(b), ParseError);
  std::istringstream c(R"({"instance_id":"a","movie_id":"m","fps":0,"frames":[{"t":0,"joints":)" + joints_json(1) +
                       "}]}\n");
  EXPECT_THROW(parse_skeleton_stream(c), ParseError);
}

TEST(SkeletonStream, ParseSerializeRoundTrip) {
  std::vector<SkeletonSequence> seqs;
  for (std::uint64_t s = 0; s < 5; ++s) {
    sim::MotionSpec spec;
    spec.kind = sim::MotionKind::kComposite;
    spec.frames = 20;
    spec.missing_rate = 0.1;
    spec.instance_id = "i" + std::to_string(s);
    seqs.push_back(sim::gen_skeletons(spec, s));
  }
  std::ostringstream out;
  write_skeleton_stream(out, seqs);
  std::istringstream in(out.str());
  EXPECT_EQ(parse_skeleton_stream(in), seqs);
}

TEST(Validation, PaperCriteria) {
  auto seq = posed(150);
  EXPECT_TRUE(validate_instance(seq).passed());

  // Only two upper-body landmarks (right shoulder and elbow) ever visible.
  auto hidden = seq;
  for (auto& f : hidden.frames)
    for (Joint j : {Joint::kRWrist, Joint::kLShoulder, Joint::kLElbow, Joint::kLWrist}) f[j].confidence = 0;
  auto v = validate_instance(hidden);
  EXPECT_FALSE(v.passed());
  EXPECT_TRUE(v.has(RejectReason::kLandmarks));

  auto four = seq;
  for (auto& f : four.frames)
    for (Joint j : {Joint::kLElbow, Joint::kLWrist}) f[j].confidence = 0;
  EXPECT_TRUE(validate_instance(four).passed());

  auto shortseq = posed(50);
  auto vs = validate_instance(shortseq);
  EXPECT_TRUE(vs.has(RejectReason::kFrameCount));
  EXPECT_EQ(vs.reasons.size(), 1u);
}

TEST(Validation, CoverageAndAllReasonsListed) {
  auto seq = posed(50);
  for (std::size_t t = 0; t < 30; ++t)
    for (auto& k : seq.frames[t].joints) k.confidence = 0;
  for (auto& f : seq.frames)
    for (Joint j : kUpperBodyLandmarks) f[j].confidence = 0;
  auto v = validate_instance(seq);
  EXPECT_TRUE(v.has(RejectReason::kLandmarks));
  EXPECT_TRUE(v.has(RejectReason::kFrameCount));
  EXPECT_TRUE(v.has(RejectReason::kCoverage));
}

TEST(Validation, RelaxingNeverFlipsPassToReject) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    sim::MotionSpec spec;
    spec.kind = sim::MotionKind::kComposite;
    spec.frames = 80 + 20 * s;
    spec.missing_rate = 0.05 * static_cast<double>(s % 5);
    auto seq = sim::gen_skeletons(spec, s);
    for (std::size_t t = 0; t < seq.length(); t += 3)
      for (auto& k : seq.frames[t].joints) k.confidence = 0;
    ValidationParams strict{120, 250, 0.8, 3};
    for (ValidationParams relaxed : {ValidationParams{120, 250, 0.5, 3}, ValidationParams{50, 250, 0.8, 3},
                                     ValidationParams{120, 500, 0.8, 3}, ValidationParams{10, 1000, 0.0, 3}}) {
      if (validate_instance(seq, strict).passed()) EXPECT_TRUE(validate_instance(seq, relaxed).passed());
    }
  }
}

TEST(LimbGraph, DefaultGraph) {
  auto g = default_limb_graph();
  EXPECT_EQ(g.size(), 23u);
  EXPECT_EQ(g.pair_count(), 253u);
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t k = i + 1; k < g.size(); ++k) ++pairs;
  EXPECT_EQ(pairs, 253u);

  std::set<std::pair<std::size_t, std::size_t>> edges;
  for (const auto& e : g.edges()) edges.insert(std::minmax(e.a, e.b));
  using J = Joint;
  const std::pair<J, J> bones[] = {{J::kNeck, J::kRShoulder}, {J::kNeck, J::kLShoulder}, {J::kRShoulder, J::kRElbow},
                                   {J::kRElbow, J::kRWrist},  {J::kLShoulder, J::kLElbow}, {J::kLElbow, J::kLWrist},
                                   {J::kNeck, J::kRHip},      {J::kNeck, J::kLHip},        {J::kRHip, J::kRKnee},
                                   {J::kRKnee, J::kRAnkle},   {J::kLHip, J::kLKnee},       {J::kLKnee, J::kLAnkle},
                                   {J::kNeck, J::kNose}};
  for (auto [a, b] : bones) EXPECT_TRUE(edges.count(std::minmax(idx(a), idx(b)))) << idx(a) << "-" << idx(b);
  EXPECT_EQ(default_limb_graph().edges(), g.edges());
}

TEST(LimbGraph, UpperBodyLandmarks) {
  std::set<Joint> got(kUpperBodyLandmarks.begin(), kUpperBodyLandmarks.end());
  std::set<Joint> want = {Joint::kRShoulder, Joint::kLShoulder, Joint::kRElbow,
                          Joint::kLElbow,    Joint::kRWrist,    Joint::kLWrist};
  EXPECT_EQ(got, want);
}

TEST(LimbGraph, FileParsingAndValidation) {
  std::istringstream in("# two limbs\n1 2\n3,4\n\n");
  auto g = parse_limb_graph(in);
  ASSERT_EQ(g.size(), 2u);
  EXPECT_EQ(g.edges()[1].a, 3u);
  std::istringstream dup("1 2\n2 1\n");
  EXPECT_THROW(parse_limb_graph(dup), SchemaError);
  std::istringstream range("1 18\n");
  EXPECT_THROW(parse_limb_graph(range), SchemaError);
}
