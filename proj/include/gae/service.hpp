#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "gae/core_model.hpp"

namespace httplib {
class Server;
}

namespace gae {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path model_path;
  bool log_requests = false;

  void validate() const;
};

struct ServiceResponse {
  int status = 200;
  nlohmann::json body;
};

/// JSON facade over one immutable embedding model.
///
///   GET  /v1/avatars                  -> [{"index","name"}]
///   POST /v1/predict   {red, blue}    -> {"p_red_win"}
///   POST /v1/recommend {ally, enemy, pool?, familiar?, top_k?, sim_k?}
///                                     -> {"recommendations":[...], "familiar_best"?}
///   GET  /v1/similar?avatar=&top_k=   -> {"avatar", "similar":[{"avatar","index","score"}]}
///   GET  /v1/pair?a=&b=               -> {"a","b","synergy","opposition","similarity"}
///
/// Errors are {"error":{"code","message","offenders"?}} with status 400
/// (404 for unknown routes). Handlers are const and safe to call concurrently.
class Service {
 public:
  explicit Service(ModelParams model);

  [[nodiscard]] const ModelParams& model() const { return model_; }

  [[nodiscard]] ServiceResponse avatars() const;
  [[nodiscard]] ServiceResponse predict(std::string_view body) const;
  [[nodiscard]] ServiceResponse recommend(std::string_view body) const;
  [[nodiscard]] ServiceResponse similar(const std::optional<std::string>& avatar,
                                        const std::optional<std::string>& top_k) const;
  [[nodiscard]] ServiceResponse pair(const std::optional<std::string>& a,
                                     const std::optional<std::string>& b) const;

  /// Registers the routes on `server`. The Service must outlive it.
  void mount(httplib::Server& server, bool log_requests = false) const;

 private:
  ModelParams model_;
};

/// Loads the model, binds and blocks until the server stops. Returns false
/// when the address cannot be bound.
bool run_service(const ServiceConfig& config);

}  // namespace gae
