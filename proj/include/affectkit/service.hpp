#pragma once

// Annotation sessions: 20 task instances plus one hidden control per HIT,
// live sanity feedback, HIT outcomes and participant policy. Every state
// change is an event in an append-only log; replaying the log rebuilds the
// same state.

#include <algorithm>
#include <cstdint>
#include <ctime>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "affectkit/annotations.hpp"
#include "affectkit/quality_control.hpp"

namespace affectkit {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Record JSON.

inline json record_to_json(const AnnotationRecord& r) {
  json cats = json::array();
  for (std::size_t c = 0; c < kNumCategories; ++c)
    if (r.categories[c]) cats.push_back(kCategoryNames[c]);
  json j = {{"instance_id", r.instance_id}, {"participant_id", r.participant_id}, {"corrupted", r.corrupted},
            {"categories", cats},          {"valence", r.valence},                {"arousal", r.arousal},
            {"dominance", r.dominance},    {"start_frame", r.start_frame},        {"end_frame", r.end_frame},
            {"char_gender", kGenderNames[static_cast<std::size_t>(r.gender)]},
            {"char_age", kAgeNames[static_cast<std::size_t>(r.age)]},
            {"char_ethnicity", kEthnicityNames[static_cast<std::size_t>(r.ethnicity)]}};
  if (!r.movie_id.empty()) j["movie_id"] = r.movie_id;
  if (!r.hit_id.empty()) j["hit_id"] = r.hit_id;
  return j;
}

// Reads the annotation fields of a record; ids are optional here because the
// service fills them in.
inline AnnotationRecord record_from_json(const json& j) {
  AnnotationRecord r;
  try {
    r.instance_id = j.value("instance_id", "");
    r.participant_id = j.value("participant_id", "");
    r.corrupted = j.value("corrupted", false);
    for (const auto& c : j.value("categories", json::array())) {
      auto k = category_index(c.get<std::string>());
      if (!k) throw SchemaError("unknown category '" + c.get<std::string>() + "'");
      r.categories[*k] = true;
    }
    r.valence = j.value("valence", 0);
    r.arousal = j.value("arousal", 0);
    r.dominance = j.value("dominance", 0);
    r.start_frame = j.value("start_frame", std::int64_t{0});
    r.end_frame = j.value("end_frame", std::int64_t{0});
    auto demographic = [&j]<typename E, std::size_t N>(const char* key, const std::array<std::string_view, N>& names,
                                                       E fallback) {
      if (!j.contains(key)) return fallback;
      auto v = enum_from_name<E>(names, j.at(key).get<std::string>());
      if (!v) throw SchemaError(std::string("bad ") + key);
      return *v;
    };
    r.gender = demographic("char_gender", kGenderNames, Gender::kMale);
    r.age = demographic("char_age", kAgeNames, AgeGroup::kAdult);
    r.ethnicity = demographic("char_ethnicity", kEthnicityNames, Ethnicity::kOther);
    r.movie_id = j.value("movie_id", "");
    r.hit_id = j.value("hit_id", "");
  } catch (const json::exception& e) {
    throw SchemaError(std::string("annotation body: ") + e.what());
  }
  return r;
}

// ---------------------------------------------------------------------------
// Service.

struct PoolInstance {
  std::string instance_id;
  std::string movie_id;
  std::string media_url;
  std::int64_t frame_count = 0;
};

struct ServiceConfig {
  std::size_t tasks_per_session = kHitTasks;
  std::size_t target_annotations = 5;
  bool uniform_sampling = false;  // default: least-annotated first
  std::uint64_t seed = 0;
  PolicyParams policy;
  ReliabilityParams reliability;
};

// HTTP-style status carried by refusals and bad requests.
class ServiceError : public Error {
 public:
  ServiceError(int status, const std::string& msg, std::optional<std::int64_t> retry_after = std::nullopt)
      : Error(msg), status_(status), retry_after_(retry_after) {}
  int status() const noexcept { return status_; }
  std::optional<std::int64_t> retry_after() const noexcept { return retry_after_; }

 private:
  int status_;
  std::optional<std::int64_t> retry_after_;
};

struct SessionItem {
  std::string instance_id;
  std::string token;  // opaque handle given to the client
  bool control = false;
};

struct Session {
  std::string session_id;
  std::string participant_id;
  std::vector<SessionItem> items;
  std::size_t cursor = 0;
  std::vector<std::optional<AnnotationRecord>> records;
  std::size_t live_violations = 0;
  bool completed = false;
  std::optional<HitOutcome> outcome;
};

struct ItemView {
  std::string token;
  std::size_t position = 0;
  std::size_t total = 0;
  std::string media_url;
  std::int64_t frame_count = 0;
};

struct CompletionResult {
  HitOutcome outcome;
  PolicyDecision decision;
};

struct ServiceEvent {
  std::uint64_t seq = 0;
  std::int64_t time = 0;
  json body;  // {"type": ..., ...}
};

inline json to_json(const ServiceEvent& e) { return {{"seq", e.seq}, {"time", e.time}, {"event", e.body}}; }
inline ServiceEvent event_from_json(const json& j) {
  return {j.at("seq").get<std::uint64_t>(), j.at("time").get<std::int64_t>(), j.at("event")};
}

class AnnotationService {
 public:
  using Clock = std::function<std::int64_t()>;

  AnnotationService(std::vector<PoolInstance> pool, std::vector<PoolInstance> controls, std::vector<GoldStandard> gold,
                    ServiceConfig cfg = {}, Clock clock = {})
      : cfg_(cfg), clock_(std::move(clock)) {
    if (!clock_) clock_ = [] { return static_cast<std::int64_t>(std::time(nullptr)); };
    for (auto& p : pool) pool_[p.instance_id] = std::move(p);
    for (auto& c : controls) controls_[c.instance_id] = std::move(c);
    for (auto& g : gold) gold_[g.control_instance_id] = std::move(g);
    if (pool_.size() < cfg_.tasks_per_session) throw DomainError("instance pool smaller than one session");
    if (controls_.empty()) throw DomainError("no control instances");
    for (const auto& [id, c] : controls_)
      if (!gold_.count(id)) throw DomainError("control " + id + " has no gold standard");
  }

  void set_event_sink(std::ostream* sink) {
    std::lock_guard lk(mu_);
    sink_ = sink;
  }

  // --- operations -------------------------------------------------------

  ParticipantStatus register_participant(const std::string& pid, bool eq_passed) {
    std::lock_guard lk(mu_);
    if (pid.empty()) throw ServiceError(400, "empty participant_id");
    commit({{"type", "register"}, {"participant_id", pid}, {"eq_passed", eq_passed}});
    return profiles_.at(pid).status;
  }

  // Returns the session id.
  std::string create_session(const std::string& pid) {
    std::lock_guard lk(mu_);
    const auto now = clock_();
    auto it = profiles_.find(pid);
    if (it == profiles_.end()) throw ServiceError(404, "unknown participant " + pid);
    auto status = it->second.status;
    if (status.kind == ParticipantStatus::Kind::kExcluded)
      throw ServiceError(403, "participant " + pid + " is permanently excluded");
    if (status.kind == ParticipantStatus::Kind::kBlocked && status.blocked_until > now)
      throw ServiceError(403, "participant " + pid + " is blocked", status.blocked_until - now);
    if (!it->second.eq_passed && !has_history(pid))
      throw ServiceError(403, "participant " + pid + " has not passed the qualification test");

    const std::string sid = "s" + std::to_string(next_session_ + 1);
    auto rng = keyed(next_session_ + 1);
    auto tasks = sample_tasks(pid, rng);
    std::vector<std::string> control_ids;
    for (const auto& [id, c] : controls_) control_ids.push_back(id);
    const auto& control = control_ids[std::uniform_int_distribution<std::size_t>(0, control_ids.size() - 1)(rng)];
    const auto pos = std::uniform_int_distribution<std::size_t>(0, tasks.size())(rng);
    json items = json::array();
    for (std::size_t i = 0, t = 0; i <= tasks.size(); ++i) {
      const bool is_control = i == pos;
      items.push_back({{"instance_id", is_control ? control : tasks[t]}, {"token", token(rng)}, {"control", is_control}});
      if (!is_control) ++t;
    }
    commit({{"type", "session"}, {"session_id", sid}, {"participant_id", pid}, {"items", items}});
    return sid;
  }

  std::optional<ItemView> next_item(const std::string& sid) const {
    std::lock_guard lk(mu_);
    const auto& s = session(sid);
    if (s.completed || s.cursor >= s.items.size()) return std::nullopt;
    const auto& item = s.items[s.cursor];
    const auto& inst = item.control ? controls_.at(item.instance_id) : pool_.at(item.instance_id);
    return ItemView{item.token, s.cursor, s.items.size(), inst.media_url, inst.frame_count};
  }

  // Stores the answer for the cursor item and returns its sanity violations.
  std::vector<SanityViolation> submit(const std::string& sid, const std::string& item_token, AnnotationRecord rec) {
    std::lock_guard lk(mu_);
    const auto& s = session(sid);
    if (s.completed) throw ServiceError(409, "session " + sid + " is completed");
    if (s.cursor >= s.items.size()) throw ServiceError(409, "session " + sid + " has no pending item");
    if (s.items[s.cursor].token != item_token) throw ServiceError(409, "answer is not for the current item");
    rec.instance_id = s.items[s.cursor].instance_id;
    rec.participant_id = s.participant_id;
    rec.hit_id = sid;
    const auto& inst = s.items[s.cursor].control ? controls_.at(rec.instance_id) : pool_.at(rec.instance_id);
    rec.movie_id = inst.movie_id;
    try {
      check_record(rec);
    } catch (const DomainError& e) {
      throw ServiceError(400, e.what());
    }
    commit({{"type", "submit"}, {"session_id", sid}, {"record", record_to_json(rec)}});
    return sanity_check(rec);
  }

  CompletionResult complete(const std::string& sid) {
    std::lock_guard lk(mu_);
    const auto& s = session(sid);
    if (s.completed) throw ServiceError(409, "session " + sid + " is already completed");
    std::string missing;
    for (std::size_t i = 0; i < s.records.size(); ++i)
      if (!s.records[i]) missing += (missing.empty() ? "" : ",") + std::to_string(i);
    if (!missing.empty()) throw ServiceError(409, "session " + sid + " is missing items at positions " + missing);
    commit({{"type", "complete"}, {"session_id", sid}});
    return last_completion_;
  }

  // --- queries ----------------------------------------------------------

  ParticipantProfile profile(const std::string& pid) const {
    std::lock_guard lk(mu_);
    auto it = profiles_.find(pid);
    if (it == profiles_.end()) throw ServiceError(404, "unknown participant " + pid);
    return it->second;
  }

  ProfileMap profiles() const {
    std::lock_guard lk(mu_);
    return profiles_;
  }

  std::vector<AnnotationRecord> store() const {
    std::lock_guard lk(mu_);
    return store_;
  }

  std::vector<ServiceEvent> events() const {
    std::lock_guard lk(mu_);
    return log_;
  }

  std::map<std::string, std::size_t> pool_status() const {
    std::lock_guard lk(mu_);
    std::map<std::string, std::size_t> out;
    for (const auto& [id, p] : pool_) out[id] = 0;
    for (const auto& r : store_)
      if (pool_.count(r.instance_id)) ++out[r.instance_id];
    return out;
  }

  QcReport qc_report() const {
    std::lock_guard lk(mu_);
    std::vector<GoldStandard> gold;
    for (const auto& [id, g] : gold_) gold.push_back(g);
    auto rep = quality_report(store_, gold, ExponentialErrorScorer(cfg_.reliability), cfg_.policy, clock_());
    // Statuses as the service recorded them.
    for (auto& [pid, p] : rep.profiles)
      if (auto it = profiles_.find(pid); it != profiles_.end()) p.status = it->second.status;
    return rep;
  }

  // Rebuilds state from a log; the result carries the same log.
  void replay(const std::vector<ServiceEvent>& events) {
    std::lock_guard lk(mu_);
    for (const auto& e : events) {
      apply(e);
      log_.push_back(e);
    }
  }

 private:
  std::mt19937_64 keyed(std::uint64_t n) const {
    std::seed_seq sq{static_cast<std::uint32_t>(cfg_.seed), static_cast<std::uint32_t>(cfg_.seed >> 32),
                     static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(n >> 32)};
    return std::mt19937_64(sq);
  }

  static std::string token(std::mt19937_64& rng) {
    static const char* hex = "0123456789abcdef";
    auto v = rng();
    std::string s(16, '0');
    for (int i = 0; i < 16; ++i) s[i] = hex[(v >> (4 * i)) & 0xF];
    return s;
  }

  bool has_history(const std::string& pid) const {
    return std::any_of(sessions_.begin(), sessions_.end(),
                       [&](const auto& kv) { return kv.second.participant_id == pid; });
  }

  const Session& session(const std::string& sid) const {
    auto it = sessions_.find(sid);
    if (it == sessions_.end()) throw ServiceError(404, "unknown session " + sid);
    return it->second;
  }

  // Pool instances this participant has not been assigned yet, ordered by
  // assignment count with random tie-breaks (or uniformly at random).
  std::vector<std::string> sample_tasks(const std::string& pid, std::mt19937_64& rng) const {
    std::set<std::string> seen;
    for (const auto& [sid, s] : sessions_)
      if (s.participant_id == pid)
        for (const auto& it : s.items) seen.insert(it.instance_id);
    struct Cand {
      std::size_t count;
      std::uint64_t key;
      std::string id;
    };
    std::vector<Cand> fresh, stale;
    for (const auto& [id, p] : pool_) {
      auto a = assigned_.find(id);
      Cand c{a == assigned_.end() ? 0 : a->second, rng(), id};
      if (cfg_.uniform_sampling) c.count = 0;
      (seen.count(id) ? stale : fresh).push_back(c);
    }
    auto by_need = [](const Cand& a, const Cand& b) { return std::tie(a.count, a.key) < std::tie(b.count, b.key); };
    std::sort(fresh.begin(), fresh.end(), by_need);
    std::sort(stale.begin(), stale.end(), by_need);
    fresh.insert(fresh.end(), stale.begin(), stale.end());
    std::vector<std::string> out;
    for (std::size_t i = 0; i < cfg_.tasks_per_session; ++i) out.push_back(fresh[i].id);
    return out;
  }

  void commit(json body) {
    ServiceEvent e{log_.size() + 1, clock_(), std::move(body)};
    apply(e);
    log_.push_back(e);
    if (sink_) *sink_ << to_json(e).dump() << '\n' << std::flush;
  }

  void apply(const ServiceEvent& e) {
    const auto& b = e.body;
    const auto type = b.at("type").get<std::string>();
    if (type == "register") {
      auto pid = b.at("participant_id").get<std::string>();
      auto& p = profiles_[pid];
      p.participant_id = pid;
      p.eq_passed = b.at("eq_passed").get<bool>();
    } else if (type == "session") {
      Session s;
      s.session_id = b.at("session_id").get<std::string>();
      s.participant_id = b.at("participant_id").get<std::string>();
      for (const auto& it : b.at("items")) {
        s.items.push_back({it.at("instance_id").get<std::string>(), it.at("token").get<std::string>(),
                           it.at("control").get<bool>()});
        if (!s.items.back().control) ++assigned_[s.items.back().instance_id];
      }
      s.records.resize(s.items.size());
      ++next_session_;
      // Expired blocks are lifted when the participant returns.
      auto& prof = profiles_[s.participant_id];
      if (prof.status.kind == ParticipantStatus::Kind::kBlocked && prof.status.blocked_until <= e.time)
        prof.status = ParticipantStatus::active();
      sessions_[s.session_id] = std::move(s);
    } else if (type == "submit") {
      auto& s = sessions_.at(b.at("session_id").get<std::string>());
      auto rec = record_from_json(b.at("record"));
      if (!sanity_check(rec).empty()) ++s.live_violations;
      s.records[s.cursor++] = std::move(rec);
    } else if (type == "complete") {
      auto& s = sessions_.at(b.at("session_id").get<std::string>());
      std::vector<AnnotationRecord> tasks;
      const AnnotationRecord* control = nullptr;
      for (std::size_t i = 0; i < s.items.size(); ++i) {
        if (s.items[i].control) control = &*s.records[i];
        else tasks.push_back(*s.records[i]);
      }
      CompletionResult res;
      res.outcome = hit_outcome(s.session_id, tasks, *control, gold_.at(control->instance_id));
      for (const auto& r : s.records) store_.push_back(*r);
      // Reliability over everything stored so far, then the policy.
      profiles_ = reliability_scores(store_, ExponentialErrorScorer(cfg_.reliability), profiles_);
      auto& prof = profiles_[s.participant_id];
      res.decision = participant_policy(prof, res.outcome, e.time, cfg_.policy);
      res.outcome.work_rejected = res.decision.work_rejected;
      prof.status = res.decision.status;
      s.completed = true;
      s.outcome = res.outcome;
      last_completion_ = res;
    } else {
      throw SchemaError("unknown event type " + type);
    }
  }

  ServiceConfig cfg_;
  Clock clock_;
  mutable std::mutex mu_;
  std::ostream* sink_ = nullptr;

  std::map<std::string, PoolInstance> pool_;
  std::map<std::string, PoolInstance> controls_;
  std::map<std::string, GoldStandard> gold_;

  std::vector<ServiceEvent> log_;
  ProfileMap profiles_;
  std::map<std::string, Session> sessions_;
  std::map<std::string, std::size_t> assigned_;
  std::vector<AnnotationRecord> store_;
  std::uint64_t next_session_ = 0;
  CompletionResult last_completion_;
};

inline json to_json(const SanityViolation& v) {
  return {{"category", kCategoryNames[v.category]},
          {"dimension", kDimensionNames[static_cast<std::size_t>(v.dimension)]},
          {"expected", v.expected_above ? "above" : "below"},
          {"observed", v.observed},
          {"message", v.describe()}};
}

inline json to_json(const CompletionResult& r) {
  return {{"hit_id", r.outcome.hit_id},
          {"violations", r.outcome.violations},
          {"gold_failed", r.outcome.gold_failed},
          {"low_performance", r.outcome.low_performance},
          {"work_rejected", r.outcome.work_rejected},
          {"reliability_failed", r.decision.reliability_failed},
          {"status", to_string(r.decision.status)}};
}

}  // namespace affectkit
