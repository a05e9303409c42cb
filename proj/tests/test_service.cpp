#include <gtest/gtest.h>

#include <sstream>
#include <thread>

#include "affectkit/http_api.hpp"

using namespace affectkit;

namespace {

struct Fixture {
  std::int64_t now = 1'000'000;
  std::unique_ptr<AnnotationService> svc;

  explicit Fixture(ServiceConfig cfg = {}) {
    std::vector<PoolInstance> pool;
    for (int i = 0; i < 30; ++i) {
      auto id = std::string(i < 10 ? "p0" : "p") + std::to_string(i);
      pool.push_back({id, "m" + std::to_string(i / 10), "/media/" + id + ".mp4", 300});
    }
    GoldStandard g;
    g.control_instance_id = "ctl";
    g.ranges[0] = {1, 6};
    svc = std::make_unique<AnnotationService>(pool, std::vector<PoolInstance>{{"ctl", "mc", "/media/ctl.mp4", 300}},
                                              std::vector<GoldStandard>{g}, cfg, [this] { return now; });
  }
};

AnnotationRecord answer(int v, int a, std::initializer_list<std::string_view> cats = {}) {
  AnnotationRecord r;
  r.valence = v;
  r.arousal = a;
  r.dominance = 5;
  r.end_frame = 300;
  for (auto c : cats) r.categories[*category_index(c)] = true;
  return r;
}

// Position of the hidden control, read from the admin-side event log.
std::size_t control_position(const AnnotationService& svc, const std::string& sid) {
  for (const auto& e : svc.events())
    if (e.body["type"] == "session" && e.body["session_id"] == sid)
      for (std::size_t i = 0; i < e.body["items"].size(); ++i)
        if (e.body["items"][i]["control"]) return i;
  throw std::runtime_error("no control");
}

// Answers every item; `violating` task answers break a sanity rule and the
// control answer is inside or outside the gold range.
CompletionResult run_session(AnnotationService& svc, const std::string& sid, std::size_t violating, bool gold_ok) {
  const auto ctl = control_position(svc, sid);
  std::size_t bad = 0;
  while (auto item = svc.next_item(sid)) {
    AnnotationRecord r = answer(5, 5);
    if (item->position == ctl) r = answer(gold_ok ? 3 : 9, 5);
    else if (bad < violating) {
      r = answer(2, 5, {"happiness"});
      ++bad;
    }
    svc.submit(sid, item->token, r);
  }
  return svc.complete(sid);
}

int status_of(auto&& fn) {
  try {
    fn();
  } catch (const ServiceError& e) {
    return e.status();
  }
  return 0;
}

}  // namespace

TEST(Service, SessionHasTwentyTasksAndOneControl) {
  Fixture f;
  f.svc->register_participant("alice", true);
  auto sid = f.svc->create_session("alice");
  EXPECT_EQ(sid, "s1");
  auto item = f.svc->next_item(sid);
  ASSERT_TRUE(item);
  EXPECT_EQ(item->total, 21u);
  EXPECT_EQ(item->position, 0u);
  EXPECT_EQ(item->token.size(), 16u);
  std::size_t controls = 0;
  std::set<std::string> ids;
  const auto log = f.svc->events();
  for (const auto& it : log.back().body["items"]) {
    controls += it["control"].get<bool>();
    ids.insert(it["instance_id"].get<std::string>());
  }
  EXPECT_EQ(controls, 1u);
  EXPECT_EQ(ids.size(), 21u);
}

TEST(Service, Refusals) {
  Fixture f;
  EXPECT_EQ(status_of([&] { f.svc->create_session("ghost"); }), 404);
  f.svc->register_participant("noeq", false);
  EXPECT_EQ(status_of([&] { f.svc->create_session("noeq"); }), 403);
  EXPECT_EQ(status_of([&] { f.svc->register_participant("", true); }), 400);
  EXPECT_EQ(status_of([&] { f.svc->next_item("s99"); }), 404);
}

TEST(Service, LiveViolationsAndOrdering) {
  Fixture f;
  f.svc->register_participant("bob", true);
  auto sid = f.svc->create_session("bob");
  auto first = f.svc->next_item(sid);
  const auto ctl = control_position(*f.svc, sid);
  auto v = f.svc->submit(sid, first->token, first->position == ctl ? answer(3, 5) : answer(2, 5, {"happiness"}));
  if (first->position != ctl) {
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].category, *category_index("happiness"));
  }
  EXPECT_EQ(status_of([&] { f.svc->submit(sid, first->token, answer(5, 5)); }), 409);
  EXPECT_EQ(status_of([&] { f.svc->submit(sid, "0000000000000000", answer(5, 5)); }), 409);
  auto second = f.svc->next_item(sid);
  EXPECT_EQ(status_of([&] { f.svc->submit(sid, second->token, answer(0, 5)); }), 400);
  EXPECT_EQ(status_of([&] { f.svc->complete(sid); }), 409);
}

TEST(Service, TwoViolationsBlockForAnHour) {
  Fixture f;
  f.svc->register_participant("carol", true);
  auto res = run_session(*f.svc, f.svc->create_session("carol"), 2, true);
  EXPECT_EQ(res.outcome.violations, 2u);
  EXPECT_TRUE(res.outcome.low_performance);
  EXPECT_EQ(res.decision.status, ParticipantStatus::blocked(f.now + 3600));
  f.now += 1800;
  try {
    f.svc->create_session("carol");
    FAIL() << "expected a block";
  } catch (const ServiceError& e) {
    EXPECT_EQ(e.status(), 403);
    EXPECT_EQ(e.retry_after(), 1800);
  }
  f.now += 1800;
  EXPECT_NO_THROW(f.svc->create_session("carol"));
  EXPECT_EQ(f.svc->profile("carol").status, ParticipantStatus::active());
}

TEST(Service, GoldBreachAloneIsLowPerformance) {
  Fixture f;
  f.svc->register_participant("dan", true);
  auto res = run_session(*f.svc, f.svc->create_session("dan"), 0, false);
  EXPECT_EQ(res.outcome.violations, 0u);
  EXPECT_TRUE(res.outcome.gold_failed);
  EXPECT_TRUE(res.outcome.low_performance);
  EXPECT_EQ(res.decision.status.kind, ParticipantStatus::Kind::kBlocked);
}

TEST(Service, CleanSessionKeepsStatusAndCompletedSessionIsClosed) {
  Fixture f;
  f.svc->register_participant("erin", true);
  auto sid = f.svc->create_session("erin");
  auto res = run_session(*f.svc, sid, 1, true);
  EXPECT_FALSE(res.outcome.low_performance);
  EXPECT_EQ(res.decision.status, ParticipantStatus::active());
  EXPECT_FALSE(f.svc->next_item(sid));
  EXPECT_EQ(status_of([&] { f.svc->submit(sid, "x", answer(5, 5)); }), 409);
  EXPECT_EQ(status_of([&] { f.svc->complete(sid); }), 409);
  // A returning participant no longer needs the qualification flag.
  f.svc->register_participant("erin", false);
  EXPECT_NO_THROW(f.svc->create_session("erin"));
}

TEST(Service, ReliabilityFailureExcludesPermanently) {
  ServiceConfig cfg;
  cfg.policy.reliability_threshold = 1.01;
  cfg.policy.min_effective = 1;
  Fixture f(cfg);
  f.svc->register_participant("fay", true);
  auto res = run_session(*f.svc, f.svc->create_session("fay"), 0, true);
  EXPECT_TRUE(res.decision.reliability_failed);
  EXPECT_EQ(res.decision.status, ParticipantStatus::excluded());
  f.now += 1'000'000;
  try {
    f.svc->create_session("fay");
    FAIL() << "expected exclusion";
  } catch (const ServiceError& e) {
    EXPECT_EQ(e.status(), 403);
    EXPECT_FALSE(e.retry_after().has_value());
  }
}

TEST(Service, LeastAnnotatedFirst) {
  Fixture f;
  for (const char* p : {"a", "b", "c"}) f.svc->register_participant(p, true);
  f.svc->create_session("a");
  auto sid = f.svc->create_session("b");
  std::map<std::string, int> count;
  for (const auto& e : f.svc->events())
    if (e.body["type"] == "session")
      for (const auto& it : e.body["items"])
        if (!it["control"]) ++count[it["instance_id"].get<std::string>()];
  // 40 assignments over 30 instances: nobody gets a third before all have one.
  EXPECT_EQ(count.size(), 30u);
  for (const auto& [id, n] : count) EXPECT_LE(n, 2);
  (void)sid;
}

TEST(Service, ReplayRebuildsState) {
  Fixture f;
  std::ostringstream sink;
  f.svc->set_event_sink(&sink);
  for (const char* p : {"g", "h"}) f.svc->register_participant(p, true);
  run_session(*f.svc, f.svc->create_session("g"), 2, true);
  run_session(*f.svc, f.svc->create_session("h"), 0, true);
  auto open = f.svc->create_session("h");
  f.svc->submit(open, f.svc->next_item(open)->token, answer(5, 5));

  std::vector<ServiceEvent> events;
  std::istringstream in(sink.str());
  for (std::string line; std::getline(in, line);) events.push_back(event_from_json(json::parse(line)));
  ASSERT_EQ(events.size(), f.svc->events().size());

  Fixture g;
  g.svc->replay(events);
  EXPECT_EQ(g.svc->profile("g").status, f.svc->profile("g").status);
  EXPECT_EQ(g.svc->profile("h").status, f.svc->profile("h").status);
  EXPECT_DOUBLE_EQ(g.svc->profile("h").r, f.svc->profile("h").r);
  EXPECT_EQ(g.svc->pool_status(), f.svc->pool_status());
  EXPECT_EQ(g.svc->next_item(open)->token, f.svc->next_item(open)->token);
  EXPECT_EQ(to_json(g.svc->qc_report()), to_json(f.svc->qc_report()));
  EXPECT_EQ(status_of([&] { g.svc->create_session("g"); }), 403);
  EXPECT_EQ(g.svc->create_session("h"), f.svc->create_session("h"));
}

TEST(Service, ConstructorChecks) {
  GoldStandard g;
  g.control_instance_id = "other";
  std::vector<PoolInstance> pool(25);
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i].instance_id = "p" + std::to_string(i);
  EXPECT_THROW(AnnotationService(pool, {{"ctl"}}, {g}), DomainError);
  EXPECT_THROW(AnnotationService(pool, {}, {g}), DomainError);
  pool.resize(5);
  EXPECT_THROW(AnnotationService(pool, {{"other"}}, {g}), DomainError);
}

namespace {

struct Server {
  httplib::Server srv;
  std::thread th;
  int port = 0;

  explicit Server(AnnotationService& svc) {
    mount_api(srv, svc);
    port = srv.bind_to_any_port("127.0.0.1");
    th = std::thread([this] { srv.listen_after_bind(); });
    srv.wait_until_ready();
  }
  ~Server() {
    srv.stop();
    th.join();
  }
};

json body_of(const httplib::Result& r) { return json::parse(r->body); }

}  // namespace

TEST(Http, EndToEndBlockAfterTwoViolations) {
  Fixture f;
  Server s(*f.svc);
  httplib::Client cli("127.0.0.1", s.port);
  const auto ct = "application/json";

  auto reg = cli.Post("/v1/participants", R"({"participant_id":"w1","eq_passed":true})", ct);
  ASSERT_TRUE(reg);
  EXPECT_EQ(reg->status, 200);
  EXPECT_EQ(body_of(reg)["status"], "active");
  EXPECT_EQ(body_of(reg)["version"], 1);

  auto ses = cli.Post("/v1/sessions", R"({"participant_id":"w1"})", ct);
  ASSERT_EQ(ses->status, 201);
  auto sid = body_of(ses)["session_id"].get<std::string>();
  EXPECT_EQ(body_of(ses)["items"], 21);

  const auto ctl = control_position(*f.svc, sid);
  std::set<std::string> keys;
  int sent_bad = 0;
  for (int i = 0; i < 21; ++i) {
    auto next = cli.Get("/v1/sessions/" + sid + "/next");
    ASSERT_EQ(next->status, 200);
    auto item = body_of(next);
    std::string k;
    for (const auto& [key, v] : item.items()) k += key + ",";
    keys.insert(k);
    EXPECT_EQ(item["position"], i);
    json a = record_to_json(answer(5, 5));
    if (static_cast<std::size_t>(i) == ctl) a = record_to_json(answer(3, 5));
    else if (sent_bad < 2) {
      a = record_to_json(answer(8, 5, {"sadness"}));
      ++sent_bad;
    }
    auto sub = cli.Post("/v1/sessions/" + sid + "/items/" + item["item_token"].get<std::string>(), a.dump(), ct);
    ASSERT_EQ(sub->status, 200);
    EXPECT_EQ(body_of(sub)["violations"].size(), a["valence"] == 8 ? 1u : 0u);
  }
  // Control and task items look the same to the client.
  EXPECT_EQ(keys.size(), 1u);
  EXPECT_EQ(cli.Get("/v1/sessions/" + sid + "/next")->status, 409);

  auto done = cli.Post("/v1/sessions/" + sid + "/complete", "{}", ct);
  ASSERT_EQ(done->status, 200);
  auto out = body_of(done);
  EXPECT_EQ(out["violations"], 2);
  EXPECT_EQ(out["low_performance"], true);
  EXPECT_EQ(out["status"], "blocked_until(" + std::to_string(f.now + 3600) + ")");

  f.now += 60;
  auto again = cli.Post("/v1/sessions", R"({"participant_id":"w1"})", ct);
  EXPECT_EQ(again->status, 403);
  EXPECT_EQ(body_of(again)["retry_after_seconds"], 3540);

  auto pool = body_of(cli.Get("/v1/admin/pool"));
  std::size_t total = 0;
  for (const auto& p : pool["instances"]) total += p["annotations"].get<std::size_t>();
  EXPECT_EQ(total, 20u);
  auto qc = body_of(cli.Get("/v1/admin/qc"));
  EXPECT_EQ(qc["hits"].size(), 1u);
}

TEST(Http, BadRequests) {
  Fixture f;
  Server s(*f.svc);
  httplib::Client cli("127.0.0.1", s.port);
  auto r = cli.Post("/v1/participants", "{not json", "application/json");
  EXPECT_EQ(r->status, 400);
  EXPECT_TRUE(body_of(r).contains("error"));
  EXPECT_EQ(cli.Post("/v1/sessions", R"({"participant_id":"nobody"})", "application/json")->status, 404);
  EXPECT_EQ(cli.Get("/v1/sessions/s7/next")->status, 404);
  cli.Post("/v1/participants", R"({"participant_id":"x","eq_passed":true})", "application/json");
  auto sid = body_of(cli.Post("/v1/sessions", R"({"participant_id":"x"})", "application/json"))["session_id"];
  auto tok = body_of(cli.Get("/v1/sessions/" + sid.get<std::string>() + "/next"))["item_token"].get<std::string>();
  auto bad = cli.Post("/v1/sessions/" + sid.get<std::string>() + "/items/" + tok, R"({"categories":["joyfulness"]})",
                      "application/json");
  EXPECT_EQ(bad->status, 400);
}
