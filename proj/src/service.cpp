#include "gae/service.hpp"

#include <charconv>
#include <iostream>

#include <fmt/format.h>
#include <httplib.h>

#include "gae/error.hpp"
#include "gae/model_io.hpp"
#include "gae/recommend.hpp"

namespace gae {
namespace {

using nlohmann::json;

/// Carries a machine-readable code to the response writer.
struct RequestError {
  std::string code;
  std::string message;
  std::vector<std::string> offenders;
};

ServiceResponse error_response(const RequestError& e) {
  json err = {{"code", e.code}, {"message", e.message}};
  if (!e.offenders.empty()) err["offenders"] = e.offenders;
  return {400, json{{"error", err}}};
}

template <typename Handler>
ServiceResponse guarded(Handler&& handler) {
  try {
    return handler();
  } catch (const RequestError& e) {
    return error_response(e);
  } catch (const ContractError& e) {
    return error_response({"invalid_request", e.what(), {}});
  } catch (const std::exception& e) {
    return {500, json{{"error", {{"code", "internal_error"}, {"message", e.what()}}}}};
  }
}

json parse_body(std::string_view body) {
  json obj = json::parse(body, nullptr, false);
  if (obj.is_discarded() || !obj.is_object()) {
    throw RequestError{"invalid_json", "request body must be a JSON object", {}};
  }
  return obj;
}

std::vector<std::string> string_list(const json& obj, const char* key, bool required) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    if (required) throw RequestError{"missing_field", fmt::format("field \"{}\" is required", key), {}};
    return {};
  }
  if (!it->is_array()) {
    throw RequestError{"invalid_field", fmt::format("field \"{}\" must be an array of names", key), {}};
  }
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string()) {
      throw RequestError{"invalid_field", fmt::format("field \"{}\" must contain strings", key), {}};
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::size_t positive_count(const json& obj, const char* key, std::size_t fallback) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  if (!it->is_number_integer() || it->get<long long>() < 1) {
    throw RequestError{"invalid_field", fmt::format("field \"{}\" must be a positive integer", key), {}};
  }
  return it->get<std::size_t>();
}

class NameResolver {
 public:
  explicit NameResolver(const AvatarRegistry& registry) : registry_(registry) {}

  std::vector<AvatarIndex> resolve(const std::vector<std::string>& names) {
    std::vector<AvatarIndex> out;
    for (const auto& n : names) {
      if (auto idx = registry_.find(n)) {
        out.push_back(*idx);
      } else if (std::find(unknown_.begin(), unknown_.end(), n) == unknown_.end()) {
        unknown_.push_back(n);
      }
    }
    return out;
  }

  void throw_if_unknown() const {
    if (!unknown_.empty()) {
      throw RequestError{"unknown_avatar",
                         fmt::format("unknown avatar(s): {}", fmt::join(unknown_, ", ")), unknown_};
    }
  }

 private:
  const AvatarRegistry& registry_;
  std::vector<std::string> unknown_;
};

Roster make_roster(std::vector<AvatarIndex> members, const char* side, std::size_t min_size,
                   std::size_t max_size) {
  if (members.size() < min_size || members.size() > max_size) {
    throw RequestError{"invalid_roster",
                       fmt::format("{} must list {} to {} avatars (got {})", side, min_size, max_size,
                                   members.size()),
                       {}};
  }
  try {
    return Roster(std::move(members));
  } catch (const ContractError& e) {
    throw RequestError{"invalid_roster", fmt::format("{}: {}", side, e.what()), {}};
  }
}

void check_no_overlap(const Roster& a, const Roster& b, const AvatarRegistry& registry) {
  std::vector<std::string> shared;
  for (AvatarIndex i : a) {
    if (b.contains(i)) shared.push_back(registry.name(i));
  }
  if (!shared.empty()) {
    throw RequestError{"overlapping_rosters",
                       fmt::format("avatar(s) on both teams: {}", fmt::join(shared, ", ")), shared};
  }
}

json scored_list(const std::vector<ScoredAvatar>& items, const AvatarRegistry& registry) {
  json arr = json::array();
  for (const auto& s : items) {
    arr.push_back({{"avatar", registry.name(s.avatar)}, {"index", s.avatar}, {"score", s.score}});
  }
  return arr;
}

json recommendation_json(const Recommendation& r, const AvatarRegistry& registry) {
  return {{"avatar", registry.name(r.avatar)},
          {"index", r.avatar},
          {"win_probability", r.win_probability},
          {"logit", r.logit},
          {"bias", r.bias},
          {"synergy", r.synergy},
          {"opposition", r.opposition},
          {"similar_familiar", scored_list(r.similar_familiar, registry)}};
}

AvatarIndex single_avatar(const std::optional<std::string>& name, const char* param,
                          const AvatarRegistry& registry) {
  if (!name || name->empty()) {
    throw RequestError{"missing_field", fmt::format("query parameter \"{}\" is required", param), {}};
  }
  if (auto idx = registry.find(*name)) return *idx;
  throw RequestError{"unknown_avatar", fmt::format("unknown avatar: {}", *name), {*name}};
}

}  // namespace

void ServiceConfig::validate() const {
  if (port < 1 || port > 65535) {
    throw ContractError(fmt::format("port {} outside [1, 65535]", port));
  }
}

Service::Service(ModelParams model) : model_(std::move(model)) { model_.validate(); }

ServiceResponse Service::avatars() const {
  json arr = json::array();
  for (AvatarIndex i = 0; i < model_.registry.size(); ++i) {
    arr.push_back({{"index", i}, {"name", model_.registry.name(i)}});
  }
  return {200, arr};
}

ServiceResponse Service::predict(std::string_view body) const {
  return guarded([&]() -> ServiceResponse {
    const json req = parse_body(body);
    const auto red_names = string_list(req, "red", true);
    const auto blue_names = string_list(req, "blue", true);
    NameResolver resolver(model_.registry);
    auto red_idx = resolver.resolve(red_names);
    auto blue_idx = resolver.resolve(blue_names);
    resolver.throw_if_unknown();
    const Roster red = make_roster(std::move(red_idx), "red", 1, kTeamSize);
    const Roster blue = make_roster(std::move(blue_idx), "blue", 1, kTeamSize);
    check_no_overlap(red, blue, model_.registry);
    return {200, json{{"p_red_win", win_probability(model_, red, blue)}}};
  });
}

ServiceResponse Service::recommend(std::string_view body) const {
  return guarded([&]() -> ServiceResponse {
    const json req = parse_body(body);
    NameResolver resolver(model_.registry);
    auto ally_idx = resolver.resolve(string_list(req, "ally", false));
    auto enemy_idx = resolver.resolve(string_list(req, "enemy", false));
    const bool has_pool = req.contains("pool") && !req["pool"].is_null();
    const bool has_familiar = req.contains("familiar") && !req["familiar"].is_null();
    auto pool_idx = resolver.resolve(string_list(req, "pool", false));
    auto familiar_idx = resolver.resolve(string_list(req, "familiar", false));
    resolver.throw_if_unknown();

    DraftState draft;
    draft.ally = make_roster(std::move(ally_idx), "ally", 0, kTeamSize - 1);
    draft.enemy = make_roster(std::move(enemy_idx), "enemy", 0, kTeamSize);
    check_no_overlap(draft.ally, draft.enemy, model_.registry);
    if (has_pool) {
      std::vector<std::string> picked;
      for (AvatarIndex c : pool_idx) {
        if (draft.ally.contains(c) || draft.enemy.contains(c)) picked.push_back(model_.registry.name(c));
      }
      if (!picked.empty()) {
        throw RequestError{"candidate_already_picked",
                           fmt::format("pool contains picked avatar(s): {}", fmt::join(picked, ", ")),
                           picked};
      }
      draft.pool = std::move(pool_idx);
    }
    const std::size_t top_k = positive_count(req, "top_k", 5);
    const std::size_t sim_k = positive_count(req, "sim_k", 3);

    json resp;
    resp["recommendations"] = json::array();
    if (has_familiar && !familiar_idx.empty()) {
      draft.familiar = std::move(familiar_idx);
      const auto result = recommend_with_familiarity(model_, draft, top_k, sim_k);
      for (const auto& r : result.picks) resp["recommendations"].push_back(recommendation_json(r, model_.registry));
      resp["familiar_best"] =
          result.familiar_best ? recommendation_json(*result.familiar_best, model_.registry) : json(nullptr);
    } else {
      for (const auto& r : recommend_pick(model_, draft, top_k)) {
        resp["recommendations"].push_back(recommendation_json(r, model_.registry));
      }
    }
    return {200, resp};
  });
}

ServiceResponse Service::similar(const std::optional<std::string>& avatar,
                                 const std::optional<std::string>& top_k) const {
  return guarded([&]() -> ServiceResponse {
    const AvatarIndex i = single_avatar(avatar, "avatar", model_.registry);
    std::size_t k = 5;
    if (top_k) {
      auto [ptr, ec] = std::from_chars(top_k->data(), top_k->data() + top_k->size(), k);
      if (ec != std::errc() || ptr != top_k->data() + top_k->size() || k < 1) {
        throw RequestError{"invalid_field", "top_k must be a positive integer", {}};
      }
    }
    return {200, json{{"avatar", model_.registry.name(i)},
                      {"similar", scored_list(similar_avatars(model_, i, k), model_.registry)}}};
  });
}

ServiceResponse Service::pair(const std::optional<std::string>& a,
                              const std::optional<std::string>& b) const {
  return guarded([&]() -> ServiceResponse {
    const AvatarIndex i = single_avatar(a, "a", model_.registry);
    const AvatarIndex j = single_avatar(b, "b", model_.registry);
    if (i == j) {
      throw RequestError{"same_avatar", "a and b must name different avatars", {}};
    }
    const auto e = explain_pair(model_, i, j);
    return {200, json{{"a", model_.registry.name(i)},
                      {"b", model_.registry.name(j)},
                      {"synergy", e.synergy},
                      {"opposition", e.opposition},
                      {"similarity", e.similarity}}};
  });
}

void Service::mount(httplib::Server& server, bool log_requests) const {
  auto send = [](httplib::Response& res, const ServiceResponse& out) {
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
  };
  auto param = [](const httplib::Request& req, const char* key) -> std::optional<std::string> {
    if (!req.has_param(key)) return std::nullopt;
    return req.get_param_value(key);
  };
  server.Get("/v1/avatars", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, avatars());
  });
  server.Post("/v1/predict", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, predict(req.body));
  });
  server.Post("/v1/recommend", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, recommend(req.body));
  });
  server.Get("/v1/similar", [this, send, param](const httplib::Request& req, httplib::Response& res) {
    send(res, similar(param(req, "avatar"), param(req, "top_k")));
  });
  server.Get("/v1/pair", [this, send, param](const httplib::Request& req, httplib::Response& res) {
    send(res, pair(param(req, "a"), param(req, "b")));
  });
  server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    const json body = {{"error", {{"code", res.status == 404 ? "not_found" : "http_error"},
                                  {"message", fmt::format("HTTP status {}", res.status)}}}};
    res.set_content(body.dump(), "application/json");
  });
  if (log_requests) {
    server.set_logger([](const httplib::Request& req, const httplib::Response& res) {
      std::cerr << fmt::format("{} {} -> {}\n", req.method, req.path, res.status);
    });
  }
}

bool run_service(const ServiceConfig& config) {
  config.validate();
  const Service service(load_embedding_model(config.model_path));
  httplib::Server server;
  service.mount(server, config.log_requests);
  std::cerr << fmt::format("serving {} avatars on http://{}:{}\n", service.model().num_avatars(),
                           config.host, config.port);
  return server.listen(config.host, config.port);
}

}  // namespace gae
