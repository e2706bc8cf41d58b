#pragma once

#include <memory>
#include <string>

#include "semtrace/service.hpp"

namespace semtrace {

// JSON-over-HTTP front end.  Bodies are the same documents the CLI prints
// with --json.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  // Port 0 picks a free port.  Returns the bound port; throws IoError.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void run();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Binds config host/port and serves until interrupted.
void serve(Service& service);

}  // namespace semtrace
