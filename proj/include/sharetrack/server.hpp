#pragma once

#include <chrono>
#include <filesystem>
#include <future>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "sharetrack/error.hpp"

namespace httplib {
class Server;
}

namespace sharetrack {

class Store;
struct ApiRoutes;

SHARETRACK_DEFINE_ERROR(BindFailure);

struct ApiConfig {
  std::string listen_address = "127.0.0.1:8080";
  std::filesystem::path data_dir = "data";
  int default_max_lag = 48;
  int default_window = 24;
  std::chrono::milliseconds time_budget{10000};  // per analysis request; 504 beyond it
};

// Read-only JSON API over a store. Routes:
//   GET /sites /stats /timeseries /ccf /ccdf /powerlaw /breakdown /urls/search
// Errors are {"error": <kind>, "detail": <message>}: 400 for bad parameters,
// 404 for unknown paths, 422 when the data cannot support the analysis,
// 504 when the time budget runs out.
class ApiServer {
 public:
  ApiServer(Store& store, ApiConfig config);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  // Binds listen_address (port 0 picks a free port) and returns the port.
  int bind();
  // Serves until stop(); call after bind().
  void serve();
  void stop();

 private:
  void install_routes();

  Store& store_;
  ApiConfig config_;
  std::unique_ptr<httplib::Server> http_;
  std::mutex pending_mu_;
  std::vector<std::future<void>> pending_;  // analyses that outlived their budget
  std::unique_ptr<ApiRoutes> routes_;
  friend struct ApiRoutes;
};

// Splits "host:port"; throws BindFailure on a malformed address.
std::pair<std::string, int> split_listen_address(const std::string& address);

}  // namespace sharetrack
