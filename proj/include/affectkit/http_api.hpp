#pragma once

// JSON over HTTP for AnnotationService. All bodies carry "version": 1.
//
//   POST /v1/participants              {participant_id, eq_passed}
//   POST /v1/sessions                  {participant_id} -> {session_id, items}
//   GET  /v1/sessions/:sid/next        -> {item_token, position, total, media_url, frame_count}
//   POST /v1/sessions/:sid/items/:tok  annotation body -> {violations: [...]}
//   POST /v1/sessions/:sid/complete    -> HIT outcome and participant status
//   GET  /v1/admin/qc                  -> QC report
//   GET  /v1/admin/pool                -> per-instance annotation counts
//
// Errors: {"version": 1, "error": msg[, "retry_after_seconds": n]} with a 4xx status.

#include <httplib.h>
#include <json.hpp>

#include "affectkit/service.hpp"

namespace affectkit {

inline constexpr int kApiVersion = 1;

namespace http_detail {

inline void reply(httplib::Response& res, int status, json body) {
  body["version"] = kApiVersion;
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const ServiceError& e) {
    json body = {{"error", e.what()}};
    if (e.retry_after()) body["retry_after_seconds"] = *e.retry_after();
    reply(res, e.status(), body);
  } catch (const json::exception& e) {
    reply(res, 400, {{"error", std::string("malformed body: ") + e.what()}});
  } catch (const Error& e) {
    reply(res, 400, {{"error", e.what()}});
  }
}

}  // namespace http_detail

inline void mount_api(httplib::Server& srv, AnnotationService& svc) {
  using http_detail::guarded;
  using http_detail::reply;

  srv.Post("/v1/participants", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto body = json::parse(req.body);
      auto st = svc.register_participant(body.at("participant_id").get<std::string>(), body.value("eq_passed", false));
      reply(res, 200, {{"participant_id", body.at("participant_id")}, {"status", to_string(st)}});
    });
  });

  srv.Post("/v1/sessions", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto body = json::parse(req.body);
      auto sid = svc.create_session(body.at("participant_id").get<std::string>());
      auto item = svc.next_item(sid);
      reply(res, 201, {{"session_id", sid}, {"items", item ? item->total : 0}});
    });
  });

  srv.Get("/v1/sessions/:sid/next", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto item = svc.next_item(req.path_params.at("sid"));
      if (!item) {
        reply(res, 409, {{"error", "no pending item"}});
        return;
      }
      reply(res, 200,
            {{"item_token", item->token},
             {"position", item->position},
             {"total", item->total},
             {"media_url", item->media_url},
             {"frame_count", item->frame_count}});
    });
  });

  srv.Post("/v1/sessions/:sid/items/:token", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto rec = record_from_json(json::parse(req.body));
      auto v = svc.submit(req.path_params.at("sid"), req.path_params.at("token"), rec);
      json list = json::array();
      for (const auto& x : v) list.push_back(to_json(x));
      reply(res, 200, {{"violations", list}});
    });
  });

  srv.Post("/v1/sessions/:sid/complete", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { reply(res, 200, to_json(svc.complete(req.path_params.at("sid")))); });
  });

  srv.Get("/v1/admin/qc", [&svc](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { reply(res, 200, to_json(svc.qc_report())); });
  });

  srv.Get("/v1/admin/pool", [&svc](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      json inst = json::array();
      for (const auto& [id, n] : svc.pool_status()) inst.push_back({{"instance_id", id}, {"annotations", n}});
      reply(res, 200, {{"instances", inst}});
    });
  });
}

}  // namespace affectkit
