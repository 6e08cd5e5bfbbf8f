#include "allpay/api_server.hpp"

#include "httplib.h"

namespace allpay {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error&) {
    throw ApiError(400, "InvalidJson", "request body is not valid JSON");
  }
}

template <class Handler>
httplib::Server::Handler guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      send_json(res, 200, handler(req));
    } catch (const ApiError& e) {
      send_json(res, e.status(), {{"error", e.code()}, {"message", e.what()}});
    } catch (const Error& e) {
      send_json(res, 500, {{"error", e.name()}, {"message", e.what()}});
    } catch (const std::exception& e) {
      send_json(res, 500, {{"error", "InternalError"}, {"message", e.what()}});
    }
  };
}

}  // namespace

ApiServer::ApiServer(std::shared_ptr<SessionManager> sessions, std::string cors_origin)
    : sessions_(std::move(sessions)), http_(std::make_unique<httplib::Server>()) {
  http_->set_default_headers({{"Access-Control-Allow-Origin", cors_origin},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  http_->Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });

  auto* sessions_ptr = sessions_.get();
  http_->Post("/v1/games", guarded([sessions_ptr](const httplib::Request& req) {
                return sessions_ptr->create(parse_body(req));
              }));
  http_->Post(R"(/v1/games/([^/]+)/bids)", guarded([sessions_ptr](const httplib::Request& req) {
                return sessions_ptr->bid(req.matches[1], parse_body(req));
              }));
  http_->Post(R"(/v1/games/([^/]+)/moves)", guarded([sessions_ptr](const httplib::Request& req) {
                return sessions_ptr->move(req.matches[1], parse_body(req));
              }));
  http_->Get(R"(/v1/games/([^/]+)/hint)", guarded([sessions_ptr](const httplib::Request& req) {
               return sessions_ptr->hint(req.matches[1]);
             }));
  http_->Get(R"(/v1/games/([^/]+))", guarded([sessions_ptr](const httplib::Request& req) {
               return sessions_ptr->state(req.matches[1]);
             }));
  http_->set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      send_json(res, res.status, {{"error", "NotFound"}, {"message", "no such route"}});
    }
  });
}

ApiServer::~ApiServer() { stop(); }

bool ApiServer::listen(const std::string& host, int port) { return http_->listen(host, port); }

int ApiServer::bind_any_port(const std::string& host) { return http_->bind_to_any_port(host); }

bool ApiServer::listen_after_bind() { return http_->listen_after_bind(); }

void ApiServer::stop() {
  if (http_) http_->stop();
}

bool ApiServer::wait_until_ready() const {
  http_->wait_until_ready();
  return http_->is_running();
}

}  // namespace allpay
