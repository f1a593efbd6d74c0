#include "crowdnlg/server.hpp"

#include <httplib.h>

#include <algorithm>
#include <iostream>

#include <nlohmann/json.hpp>

#include "crowdnlg/text.hpp"

namespace crowdnlg {

using ojson = nlohmann::ordered_json;

namespace {

int http_status(ServiceError::Kind kind) {
  using K = ServiceError::Kind;
  switch (kind) {
    case K::UnknownBatch:
    case K::NoSuchTask:
    case K::NoSuchUtterance:
    case K::UnknownMr: return 404;
    case K::BatchClosed: return 403;
    case K::TaskAlreadyClosed:
    case K::DuplicateRating: return 409;
    case K::InvalidRequest: return 400;
  }
  return 400;
}

void send_json(httplib::Response& res, int status, const ojson& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view kind, const std::string& message) {
  send_json(res, status, ojson{{"error", std::string(kind)}, {"message", message}});
}

RequestContext context_of(const httplib::Request& req) {
  RequestContext ctx;
  ctx.remote_addr = req.remote_addr;
  for (const auto& [k, v] : req.headers) ctx.headers[text::fold_case(k)] = v;
  return ctx;
}

ojson verdicts_json(const ValidationReport& report) {
  auto arr = ojson::array();
  for (const auto& [name, v] : report.verdicts) {
    arr.push_back(ojson{{"validator", name}, {"pass", v.pass}, {"detail", v.detail}});
  }
  return arr;
}

template <class F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const ServiceError& e) {
    send_error(res, http_status(e.kind()), to_string(e.kind()), e.what());
  } catch (const nlohmann::json::exception& e) {
    send_error(res, 400, "InvalidRequest", e.what());
  } catch (const std::invalid_argument& e) {
    send_error(res, 400, "InvalidRequest", e.what());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    send_error(res, 500, "Internal", e.what());
  }
}

}  // namespace

HttpServer::HttpServer(CollectionService& service, std::string token)
    : service_(service), token_(std::move(token)), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return server_->listen_after_bind(); }
void HttpServer::stop() { server_->stop(); }
void HttpServer::wait_until_ready() const { server_->wait_until_ready(); }

void HttpServer::install_routes() {
  auto& srv = *server_;

  srv.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
    if (token_.empty()) return httplib::Server::HandlerResponse::Unhandled;
    if (req.get_header_value("Authorization") == "Bearer " + token_) {
      return httplib::Server::HandlerResponse::Unhandled;
    }
    send_error(res, 401, "Unauthorized", "missing or wrong bearer token");
    return httplib::Server::HandlerResponse::Handled;
  });

  srv.Get(R"(/batches/([^/]+)/next-task)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto worker = req.get_param_value("worker");
      if (worker.empty()) throw ServiceError(ServiceError::Kind::InvalidRequest, "missing ?worker=");
      const auto next = service_.next_task(worker, req.matches[1]);
      if (!next.task) {
        send_json(res, 200, ojson{{"status", "exhausted"}, {"reason", next.reason}});
        return;
      }
      const auto& t = *next.task;
      const auto ext = t.modality == Modality::Textual ? ".txt" : ".svg";
      ojson body{{"status", "issued"},
                 {"task_id", t.id},
                 {"mr_id", t.mr_id},
                 {"batch", t.batch_id},
                 {"modality", std::string(to_string(t.modality))},
                 {"issued_at", t.issued_at.time_since_epoch().count()},
                 {"mr_url", "/mrs/" + t.mr_id + ext}};
      send_json(res, 200, body);
    });
  });

  srv.Get(R"(/mrs/([^/]+)\.txt)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { res.set_content(service_.mr_text(req.matches[1]), "text/plain; charset=utf-8"); });
  });

  srv.Get(R"(/mrs/([^/]+)\.svg)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { res.set_content(service_.mr_svg(req.matches[1]), "image/svg+xml"); });
  });

  srv.Post("/submissions", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto j = nlohmann::json::parse(req.body);
      const auto result = service_.submit(j.at("task_id").get<std::string>(), j.at("worker").get<std::string>(),
                                          j.at("text").get<std::string>(), context_of(req));
      if (result.accepted) {
        send_json(res, 200,
                  ojson{{"status", "accepted"},
                        {"utterance_id", result.utterance_id},
                        {"verdicts", verdicts_json(result.report)}});
      } else {
        send_json(res, 422, ojson{{"status", "rejected"}, {"verdicts", verdicts_json(result.report)}});
      }
    });
  });

  srv.Post("/ratings", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto id = service_.rate(rating_from_json(req.body));
      send_json(res, 201, ojson{{"id", id}});
    });
  });

  srv.Get("/export", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      std::string body;
      for (const auto& e : service_.export_bundle().entries) body += export_line(e) + "\n";
      res.set_content(body, "application/x-ndjson");
    });
  });

  srv.Get("/report", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      analysis::AnalysisOptions options;
      options.include_self = req.get_param_value("include_self") == "1";
      options.scorer = req.get_param_value("scorer");
      const auto report = service_.analyze(options);
      if (req.get_param_value("format") == "text") {
        res.set_content(analysis::report_to_text(report), "text/plain; charset=utf-8");
      } else {
        res.set_content(analysis::report_to_json(report), "application/json");
      }
    });
  });
}

}  // namespace crowdnlg
