#pragma once

#include <memory>
#include <string>

#include "allpay/session.hpp"

namespace httplib {
class Server;
}

namespace allpay {

// /v1 JSON routes over a SessionManager:
//   POST /v1/games               create a session
//   POST /v1/games/{id}/bids     sealed bid, engine replies
//   POST /v1/games/{id}/moves    designation and move after a won bid
//   GET  /v1/games/{id}          state
//   GET  /v1/games/{id}/hint     human-side equilibrium strategy
class ApiServer {
 public:
  explicit ApiServer(std::shared_ptr<SessionManager> sessions,
                     std::string cors_origin = "*");
  ~ApiServer();

  // Binds and serves until stop(); returns false if binding fails.
  bool listen(const std::string& host, int port);
  // Binds to a free port and returns it, or -1. Serve with listen_after_bind().
  int bind_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();
  bool wait_until_ready() const;

 private:
  std::shared_ptr<SessionManager> sessions_;
  std::unique_ptr<httplib::Server> http_;
};

}  // namespace allpay
