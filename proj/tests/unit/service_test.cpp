#include <gtest/gtest.h>

#include <random>
#include <thread>

#include "gae/recommend.hpp"
#include "gae/service.hpp"
#include "oracles.hpp"

#include <httplib.h>

using namespace gae;
using nlohmann::json;

namespace {

Service make_service(std::uint64_t seed = 1, std::size_t n = 20) {
  std::mt19937_64 rng(seed);
  return Service(oracle::random_model(rng, n, 3));
}

std::string error_code(const ServiceResponse& r) { return r.body["error"]["code"].get<std::string>(); }

}  // namespace

TEST(ServiceAvatars, ListsRegistryInIndexOrder) {
  std::mt19937_64 rng(1);
  Service s(oracle::random_model(rng, 58, 2));
  auto r = s.avatars();
  ASSERT_EQ(r.status, 200);
  ASSERT_EQ(r.body.size(), 58u);
  for (std::size_t i = 0; i < 58; ++i) {
    EXPECT_EQ(r.body[i]["index"], i);
    EXPECT_EQ(r.body[i]["name"], s.model().registry.name(i));
  }
}

TEST(ServicePredict, MatchesInProcessAndIsAntisymmetric) {
  auto s = make_service();
  auto r = s.predict(R"({"red":["h0","h1","h2"],"blue":["h3","h4"]})");
  ASSERT_EQ(r.status, 200);
  const double p = r.body["p_red_win"];
  EXPECT_EQ(p, win_probability(s.model(), {0, 1, 2}, {3, 4}));
  auto swapped = s.predict(R"({"red":["h3","h4"],"blue":["h0","h1","h2"]})");
  EXPECT_NEAR(swapped.body["p_red_win"].get<double>(), 1.0 - p, 1e-12);
  // Serialised text parses back to the identical double.
  EXPECT_EQ(json::parse(r.body.dump())["p_red_win"].get<double>(), p);
}

TEST(ServicePredict, Errors) {
  auto s = make_service();
  auto unknown = s.predict(R"({"red":["h0","zed"],"blue":["h3"]})");
  EXPECT_EQ(unknown.status, 400);
  EXPECT_EQ(error_code(unknown), "unknown_avatar");
  EXPECT_EQ(unknown.body["error"]["offenders"], json::array({"zed"}));
  EXPECT_NE(unknown.body["error"]["message"].get<std::string>().find("zed"), std::string::npos);

  EXPECT_EQ(error_code(s.predict(R"({"red":["h0"],"blue":["h0"]})")), "overlapping_rosters");
  EXPECT_EQ(error_code(s.predict(R"({"red":[],"blue":["h0"]})")), "invalid_roster");
  EXPECT_EQ(error_code(s.predict(R"({"red":["h0","h1","h2","h5","h6","h7"],"blue":["h3"]})")), "invalid_roster");
  EXPECT_EQ(error_code(s.predict(R"({"red":["h0","h0"],"blue":["h3"]})")), "invalid_roster");
  EXPECT_EQ(error_code(s.predict(R"({"red":["h0"]})")), "missing_field");
  EXPECT_EQ(error_code(s.predict(R"({"red":"h0","blue":["h1"]})")), "invalid_field");
  EXPECT_EQ(error_code(s.predict("not json")), "invalid_json");
  EXPECT_EQ(error_code(s.predict("[1,2]")), "invalid_json");
}

TEST(ServiceRecommend, DefaultsAndDelegation) {
  auto s = make_service();
  auto r = s.recommend(R"({"ally":["h0","h1"],"enemy":["h2"]})");
  ASSERT_EQ(r.status, 200);
  const auto& recs = r.body["recommendations"];
  ASSERT_EQ(recs.size(), 5u);
  DraftState d{{0, 1}, {2}, std::nullopt, std::nullopt};
  auto expected = recommend_pick(s.model(), d, 5);
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_EQ(recs[k]["index"], expected[k].avatar);
    EXPECT_EQ(recs[k]["avatar"], s.model().registry.name(expected[k].avatar));
    EXPECT_EQ(recs[k]["win_probability"].get<double>(), expected[k].win_probability);
    EXPECT_EQ(recs[k]["synergy"].get<double>(), expected[k].synergy);
    EXPECT_EQ(recs[k]["opposition"].get<double>(), expected[k].opposition);
    EXPECT_EQ(recs[k]["bias"].get<double>(), expected[k].bias);
    EXPECT_TRUE(recs[k]["similar_familiar"].empty());
  }
  EXPECT_FALSE(r.body.contains("familiar_best"));
  auto all = s.recommend(R"({"ally":["h0","h1"],"enemy":["h2"],"top_k":100})");
  EXPECT_EQ(all.body["recommendations"].size(), 17u);
}

TEST(ServiceRecommend, FamiliarExpansions) {
  auto s = make_service();
  auto r = s.recommend(R"({"ally":["h0"],"enemy":["h2"],"pool":["h5","h6","h7","h8"],
                          "familiar":["h9","h10","h11","h12"],"top_k":2,"sim_k":2})");
  ASSERT_EQ(r.status, 200) << r.body.dump();
  DraftState d{{0}, {2}, std::vector<AvatarIndex>{5, 6, 7, 8}, std::vector<AvatarIndex>{9, 10, 11, 12}};
  auto expected = recommend_with_familiarity(s.model(), d, 2, 2);
  ASSERT_EQ(r.body["recommendations"].size(), 2u);
  for (std::size_t k = 0; k < 2; ++k) {
    const auto& sf = r.body["recommendations"][k]["similar_familiar"];
    ASSERT_EQ(sf.size(), 2u);
    for (std::size_t j = 0; j < 2; ++j) {
      EXPECT_EQ(sf[j]["index"], expected.picks[k].similar_familiar[j].avatar);
      EXPECT_EQ(sf[j]["score"].get<double>(), expected.picks[k].similar_familiar[j].score);
    }
  }
  // Familiar avatars outside the pool cannot be picked.
  EXPECT_TRUE(r.body["familiar_best"].is_null());
  auto r2 = s.recommend(R"({"ally":["h0"],"enemy":["h2"],"familiar":["h9","h10"]})");
  EXPECT_EQ(r2.body["familiar_best"]["index"].get<std::size_t>(),
            recommend_with_familiarity(s.model(), DraftState{{0}, {2}, {}, std::vector<AvatarIndex>{9, 10}}, 5, 3)
                .familiar_best->avatar);
}

TEST(ServiceRecommend, Errors) {
  auto s = make_service();
  EXPECT_EQ(error_code(s.recommend(R"({"ally":["h0","h1","h2","h3","h4"],"enemy":[]})")), "invalid_roster");
  EXPECT_EQ(error_code(s.recommend(R"({"ally":["h0"],"enemy":["h1"],"pool":["h1"]})")), "candidate_already_picked");
  EXPECT_EQ(error_code(s.recommend(R"({"ally":["h0"],"enemy":["h0"]})")), "overlapping_rosters");
  EXPECT_EQ(error_code(s.recommend(R"({"ally":["h0"],"enemy":[],"top_k":0})")), "invalid_field");
  EXPECT_EQ(error_code(s.recommend(R"({"ally":["nope"],"enemy":[]})")), "unknown_avatar");
}

TEST(ServiceSimilarAndPair, DelegateAndValidate) {
  auto s = make_service();
  auto r = s.similar(std::string("h4"), std::string("3"));
  ASSERT_EQ(r.status, 200);
  auto expected = similar_avatars(s.model(), 4, 3);
  ASSERT_EQ(r.body["similar"].size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(r.body["similar"][k]["index"], expected[k].avatar);
    EXPECT_EQ(r.body["similar"][k]["score"].get<double>(), expected[k].score);
    EXPECT_NE(r.body["similar"][k]["avatar"], "h4");
  }
  EXPECT_EQ(s.similar(std::string("h4"), std::nullopt).body["similar"].size(), 5u);
  EXPECT_EQ(error_code(s.similar(std::nullopt, std::nullopt)), "missing_field");
  EXPECT_EQ(error_code(s.similar(std::string("h4"), std::string("x"))), "invalid_field");
  EXPECT_EQ(error_code(s.similar(std::string("zz"), std::nullopt)), "unknown_avatar");

  auto ab = s.pair(std::string("h1"), std::string("h7"));
  auto ba = s.pair(std::string("h7"), std::string("h1"));
  auto e = explain_pair(s.model(), 1, 7);
  EXPECT_EQ(ab.body["synergy"].get<double>(), e.synergy);
  EXPECT_EQ(ab.body["opposition"].get<double>(), e.opposition);
  EXPECT_EQ(ab.body["similarity"].get<double>(), e.similarity);
  EXPECT_EQ(ab.body["synergy"], ba.body["synergy"]);
  EXPECT_EQ(ab.body["opposition"], ba.body["opposition"]);
  EXPECT_EQ(ab.body["similarity"], ba.body["similarity"]);
  EXPECT_EQ(error_code(s.pair(std::string("h1"), std::string("h1"))), "same_avatar");
  EXPECT_EQ(error_code(s.pair(std::string("h1"), std::nullopt)), "missing_field");
}

TEST(ServiceHttp, EndpointsOverLoopback) {
  auto s = make_service();
  httplib::Server server;
  s.mount(server);
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  auto avatars = client.Get("/v1/avatars");
  ASSERT_TRUE(avatars);
  EXPECT_EQ(avatars->status, 200);
  EXPECT_EQ(avatars->get_header_value("Content-Type"), "application/json");
  EXPECT_EQ(json::parse(avatars->body).size(), 20u);

  const std::string body = R"({"red":["h0","h1"],"blue":["h2"]})";
  auto p1 = client.Post("/v1/predict", body, "application/json");
  auto p2 = client.Post("/v1/predict", body, "application/json");
  ASSERT_TRUE(p1 && p2);
  EXPECT_EQ(p1->body, p2->body);
  EXPECT_EQ(json::parse(p1->body)["p_red_win"].get<double>(), win_probability(s.model(), {0, 1}, {2}));

  auto bad = client.Post("/v1/predict", R"({"red":["ghost"],"blue":["h2"]})", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  EXPECT_EQ(json::parse(bad->body)["error"]["code"], "unknown_avatar");

  auto rec = client.Post("/v1/recommend", R"({"ally":["h0"],"enemy":["h1"]})", "application/json");
  ASSERT_TRUE(rec);
  EXPECT_EQ(json::parse(rec->body)["recommendations"].size(), 5u);

  auto sim = client.Get("/v1/similar?avatar=h3&top_k=2");
  ASSERT_TRUE(sim);
  EXPECT_EQ(json::parse(sim->body)["similar"].size(), 2u);

  auto pair = client.Get("/v1/pair?a=h3&b=h3");
  ASSERT_TRUE(pair);
  EXPECT_EQ(pair->status, 400);
  EXPECT_EQ(json::parse(pair->body)["error"]["code"], "same_avatar");

  auto missing = client.Get("/v2/nothing");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  EXPECT_EQ(json::parse(missing->body)["error"]["code"], "not_found");

  server.stop();
  t.join();
}

TEST(ServiceConfig, PortRange) {
  ServiceConfig c;
  c.port = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.port = 65536;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.port = 65535;
  EXPECT_NO_THROW(c.validate());
}
