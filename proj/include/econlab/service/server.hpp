#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include "econlab/knowledge/index.hpp"
#include "econlab/orchestrator/workflow.hpp"
#include "econlab/toolbox/toolbox.hpp"

namespace econlab::service {

/// Startup failure (port taken, unusable data directory).
class ServiceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ServiceDeps {
  orchestrator::Workflow* workflow = nullptr;
  toolbox::Toolbox* toolbox = nullptr;
  std::shared_ptr<const knowledge::Index> index;
  const econ::ParameterRegistry* registry = &econ::default_registry();
};

/// HTTP front end. Bodies are JSON; errors come back as
/// {"error": {"category", "message", "fields"}} with 400/404/409/500.
class Server {
 public:
  explicit Server(ServiceDeps deps);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds `host:port` (port 0 picks a free one) and returns the bound port. Throws
  /// ServiceError naming the port when it cannot be bound.
  int bind(const std::string& host, int port);
  /// Serves until stop(). Requires bind().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace econlab::service
