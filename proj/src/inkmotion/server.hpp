#pragma once

#include <memory>
#include <string>

#include "inkmotion/service.hpp"

namespace inkmotion::service {

// WebSocket transport for a Hub. Each text message is one request envelope;
// responses and events come back as text messages on the same connection.
class Server {
 public:
  Server();
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and starts serving on a background thread. Port 0 picks a free
  // port. Returns the bound port.
  unsigned short start(const std::string& host, unsigned short port);
  unsigned short port() const;

  // Cancels running simulations and closes all connections.
  void stop();

  Hub& hub();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace inkmotion::service
