#pragma once

#include <memory>
#include <string>

#include "crowdnlg/service.hpp"

namespace httplib {
class Server;
}

namespace crowdnlg {

/// HTTP front end for a CollectionService.
///
///   GET  /batches/{id}/next-task?worker=W
///   GET  /mrs/{id}.txt
///   GET  /mrs/{id}.svg
///   POST /submissions   {"task_id","worker","text"}
///   POST /ratings       {"utterance_id","rater","kind",<criteria>,"grammatical"}
///   GET  /export        corpus export lines
///   GET  /report        ?format=text, ?include_self=1
///
/// With a non-empty token every request needs "Authorization: Bearer <token>".
class HttpServer {
 public:
  HttpServer(CollectionService& service, std::string token = {});
  ~HttpServer();

  /// Port 0 picks a free port. Returns the bound port, or -1.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  bool listen();
  void stop();
  void wait_until_ready() const;

 private:
  void install_routes();

  CollectionService& service_;
  std::string token_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace crowdnlg
