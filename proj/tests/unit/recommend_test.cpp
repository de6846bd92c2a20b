#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "gae/error.hpp"
#include "gae/recommend.hpp"
#include "oracles.hpp"

using namespace gae;

namespace {

/// Ranking by brute-force logit with ascending-index tie-break.
std::vector<AvatarIndex> brute_force_ranking(const ModelParams& m, const DraftState& d,
                                             const std::vector<AvatarIndex>& pool) {
  std::vector<std::pair<double, AvatarIndex>> scored;
  for (AvatarIndex c : pool) {
    auto ally = oracle::members(d.ally);
    ally.push_back(c);
    scored.emplace_back(oracle::logit(m, ally, oracle::members(d.enemy)), c);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) {
    return x.first != y.first ? x.first > y.first : x.second < y.second;
  });
  std::vector<AvatarIndex> out;
  for (const auto& s : scored) out.push_back(s.second);
  return out;
}

std::vector<AvatarIndex> avatars_of(const std::vector<Recommendation>& recs) {
  std::vector<AvatarIndex> out;
  for (const auto& r : recs) out.push_back(r.avatar);
  return out;
}

ModelParams hand_model_4() {
  auto m = ModelParams::zeros(oracle::registry(4), 2);
  m.embeddings << 1, 0,
                  2, 0.1,
                  0, 1,
                  -1, 0.5;
  return m;
}

}  // namespace

TEST(SimilarAvatars, HandBuiltModelMatchesBruteForce) {
  auto m = hand_model_4();
  auto r = similar_avatars(m, 0, 3);
  ASSERT_EQ(r.size(), 3u);
  std::vector<std::pair<double, AvatarIndex>> ref;
  for (AvatarIndex j = 1; j < 4; ++j) ref.emplace_back(-oracle::cosine(m.embedding(0), m.embedding(j)), j);
  std::sort(ref.begin(), ref.end());
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(r[k].avatar, ref[k].second);
    EXPECT_NEAR(r[k].score, -ref[k].first, 1e-15);
  }
}

TEST(SimilarAvatars, CompletenessScaleInvarianceAndTies) {
  std::mt19937_64 rng(2);
  auto m = oracle::random_model(rng, 9, 3);
  m.embeddings.row(6) = 3.0 * m.embeddings.row(2);
  auto all = similar_avatars(m, 2, 8);
  ASSERT_EQ(all.size(), 8u);
  EXPECT_EQ(all[0].avatar, 6u);
  EXPECT_NEAR(all[0].score, 1.0, 1e-15);
  std::vector<AvatarIndex> seen;
  for (const auto& s : all) seen.push_back(s.avatar);
  std::sort(seen.begin(), seen.end());
  EXPECT_EQ(seen, (std::vector<AvatarIndex>{0, 1, 3, 4, 5, 6, 7, 8}));
  EXPECT_EQ(similar_avatars(m, 2, 100).size(), 8u);

  auto tie = ModelParams::zeros(oracle::registry(4), 2);
  tie.embeddings.setOnes();
  auto t = similar_avatars(tie, 2, 3);
  EXPECT_EQ(t[0].avatar, 0u);
  EXPECT_EQ(t[1].avatar, 1u);
  EXPECT_EQ(t[2].avatar, 3u);
}

TEST(SimilarAvatars, Errors) {
  auto m = hand_model_4();
  EXPECT_THROW(similar_avatars(m, 0, 0), ContractError);
  EXPECT_THROW(similar_avatars(m, 4, 1), ContractError);
  m.embeddings.row(3).setZero();
  EXPECT_THROW(similar_avatars(m, 0, 3), ContractError);
}

TEST(RecommendPick, SingleCandidatePool) {
  std::mt19937_64 rng(3);
  auto m = oracle::random_model(rng, 20, 3);
  DraftState d{{0, 1}, {2, 3, 4}, std::vector<AvatarIndex>{9}, std::nullopt};
  auto r = recommend_pick(m, d, 5);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].avatar, 9u);
}

TEST(RecommendPick, ZeroModelTiesInIndexOrder) {
  auto m = ModelParams::zeros(oracle::registry(12), 2);
  DraftState d{{3}, {0, 7}, std::nullopt, std::nullopt};
  auto r = recommend_pick(m, d, 20);
  EXPECT_EQ(avatars_of(r), (std::vector<AvatarIndex>{1, 2, 4, 5, 6, 8, 9, 10, 11}));
  for (const auto& x : r) EXPECT_EQ(x.win_probability, 0.5);
}

TEST(RecommendPick, RandomDraftsMatchBruteForce) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 30; ++t) {
    auto m = oracle::random_model(rng, 20, 4);
    auto picks = oracle::draw_distinct(rng, 20, 9);
    DraftState d{Roster(std::vector<AvatarIndex>(picks.begin(), picks.begin() + 4)),
                 Roster(std::vector<AvatarIndex>(picks.begin() + 4, picks.end())), std::nullopt, std::nullopt};
    std::vector<AvatarIndex> pool;
    for (AvatarIndex c = 0; c < 20; ++c)
      if (!d.ally.contains(c) && !d.enemy.contains(c)) pool.push_back(c);
    auto r = recommend_pick(m, d, 100);
    EXPECT_EQ(avatars_of(r), brute_force_ranking(m, d, pool));
    for (const auto& x : r) {
      // With four allies the candidate completes a 5v5 match.
      EXPECT_EQ(x.win_probability, win_probability(m, d.ally.with(x.avatar), d.enemy));
      EXPECT_NEAR(x.logit - match_logit(m, d.ally, d.enemy), x.bias + x.synergy + x.opposition, 1e-10);
    }
  }
}

TEST(RecommendPick, ContributionsMatchDefinitions) {
  std::mt19937_64 rng(5);
  auto m = oracle::random_model(rng, 15, 3);
  DraftState d{{1, 2}, {5, 6, 7}, std::vector<AvatarIndex>{10}, std::nullopt};
  auto r = recommend_pick(m, d, 1).front();
  EXPECT_EQ(r.bias, m.bias(10));
  EXPECT_NEAR(r.synergy, oracle::S(m, 10, 1) + oracle::S(m, 1, 10) + oracle::S(m, 10, 2) + oracle::S(m, 2, 10), 1e-12);
  double opp = 0;
  for (std::size_t e : {5u, 6u, 7u}) opp += oracle::C(m, 10, e) - oracle::C(m, e, 10);
  EXPECT_NEAR(r.opposition, opp, 1e-12);
}

TEST(RecommendPick, GaugeRescalingAndPoolGrowthPreserveOrder) {
  std::mt19937_64 rng(6);
  auto m = oracle::random_model(rng, 20, 3);
  auto g = m;
  g.embeddings *= 0.3;
  g.synergy /= 0.09;
  g.opposition /= 0.09;
  DraftState d{{0, 1, 2}, {3, 4}, std::nullopt, std::nullopt};
  EXPECT_EQ(avatars_of(recommend_pick(m, d, 20)), avatars_of(recommend_pick(g, d, 20)));

  DraftState small = d;
  small.pool = std::vector<AvatarIndex>{5, 8, 11, 14};
  DraftState big = d;
  big.pool = std::vector<AvatarIndex>{5, 8, 11, 14, 6, 9, 19};
  auto a = avatars_of(recommend_pick(m, small, 20));
  auto b = avatars_of(recommend_pick(m, big, 20));
  std::erase_if(b, [](AvatarIndex i) { return i == 6 || i == 9 || i == 19; });
  EXPECT_EQ(a, b);
}

TEST(RecommendPick, Errors) {
  auto m = ModelParams::zeros(oracle::registry(12), 2);
  EXPECT_THROW(recommend_pick(m, DraftState{{0, 1}, {2}, std::vector<AvatarIndex>{1}, {}}, 3), ContractError);
  EXPECT_THROW(recommend_pick(m, DraftState{{0, 1}, {2}, std::vector<AvatarIndex>{2}, {}}, 3), ContractError);
  EXPECT_THROW(recommend_pick(m, DraftState{{0, 1, 2, 3, 4}, {5}, {}, {}}, 3), ContractError);
  EXPECT_THROW(recommend_pick(m, DraftState{{0, 1}, {1}, {}, {}}, 3), ContractError);
  EXPECT_THROW(recommend_pick(m, DraftState{{0}, {}, std::vector<AvatarIndex>{}, {}}, 3), ContractError);
  EXPECT_THROW(recommend_pick(m, DraftState{{0}, {}, {}, {}}, 0), ContractError);
}

TEST(RecommendWithFamiliarity, FamiliarEqualsPoolGivesGlobalBest) {
  std::mt19937_64 rng(7);
  auto m = oracle::random_model(rng, 20, 3);
  std::vector<AvatarIndex> pool{4, 6, 9, 12, 15};
  DraftState d{{0, 1}, {2, 3}, pool, pool};
  auto r = recommend_with_familiarity(m, d, 3, 2);
  ASSERT_TRUE(r.familiar_best.has_value());
  EXPECT_EQ(r.familiar_best->avatar, r.picks.front().avatar);
  EXPECT_EQ(r.familiar_best->win_probability, r.picks.front().win_probability);
  // A pick that is itself familiar lists itself first.
  EXPECT_EQ(r.picks.front().similar_familiar.front().avatar, r.picks.front().avatar);
}

TEST(RecommendWithFamiliarity, SingleFamiliarAvatar) {
  std::mt19937_64 rng(8);
  auto m = oracle::random_model(rng, 20, 3);
  DraftState d{{0}, {1}, std::nullopt, std::vector<AvatarIndex>{13}};
  auto r = recommend_with_familiarity(m, d, 5, 3);
  for (const auto& p : r.picks) {
    ASSERT_EQ(p.similar_familiar.size(), 1u);
    EXPECT_EQ(p.similar_familiar[0].avatar, 13u);
  }
  EXPECT_EQ(r.familiar_best->avatar, 13u);
}

TEST(RecommendWithFamiliarity, ExpansionsMatchBruteForceCosine) {
  auto m = ModelParams::zeros(oracle::registry(6), 2);
  m.embeddings << 1, 0,
                  0.8, 0.6,
                  0, 1,
                  -1, 0.2,
                  0.5, -0.5,
                  0.3, 0.9;
  m.bias << 0.0, 0.4, -0.2, 0.1, 0.3, -0.1;
  m.synergy << 0.2, 0.1, -0.3, 0.5;
  m.opposition << 0.0, 0.7, -0.4, 0.1;
  DraftState d{{0}, {3}, std::nullopt, std::vector<AvatarIndex>{0, 2, 4, 5}};
  auto r = recommend_with_familiarity(m, d, 4, 2);
  ASSERT_EQ(r.picks.size(), 4u);
  for (const auto& p : r.picks) {
    std::vector<std::pair<double, AvatarIndex>> ref;
    for (AvatarIndex f : {2u, 4u, 5u}) {  // avatar 0 is already picked
      ref.emplace_back(f == p.avatar ? 1.0 : oracle::cosine(m.embedding(p.avatar), m.embedding(f)), f);
    }
    std::sort(ref.begin(), ref.end(), [](auto& x, auto& y) { return x.first != y.first ? x.first > y.first : x.second < y.second; });
    ASSERT_EQ(p.similar_familiar.size(), 2u);
    for (std::size_t k = 0; k < 2; ++k) {
      EXPECT_EQ(p.similar_familiar[k].avatar, ref[k].second);
      EXPECT_NEAR(p.similar_familiar[k].score, ref[k].first, 1e-15);
    }
  }
}

TEST(RecommendWithFamiliarity, Errors) {
  std::mt19937_64 rng(9);
  auto m = oracle::random_model(rng, 12, 2);
  EXPECT_THROW(recommend_with_familiarity(m, DraftState{{0}, {1}, {}, std::nullopt}, 3, 2), ContractError);
  EXPECT_THROW(recommend_with_familiarity(m, DraftState{{0}, {1}, {}, std::vector<AvatarIndex>{}}, 3, 2), ContractError);
  EXPECT_THROW(recommend_with_familiarity(m, DraftState{{0}, {1}, {}, std::vector<AvatarIndex>{2}}, 3, 0), ContractError);
  auto r = recommend_with_familiarity(m, DraftState{{0}, {1}, {}, std::vector<AvatarIndex>{0, 1}}, 3, 2);
  EXPECT_FALSE(r.familiar_best.has_value());
  for (const auto& p : r.picks) EXPECT_TRUE(p.similar_familiar.empty());
}

TEST(ExplainPair, DelegatesAndIsSymmetric) {
  auto m = ModelParams::zeros(oracle::registry(3), 2);
  m.embeddings << 1, 2,
                  3, 4,
                  0, 1;
  m.synergy << 0, 1, 1, 0;
  m.opposition << 0, 1, 0, 0;
  auto e = explain_pair(m, 0, 1);
  EXPECT_DOUBLE_EQ(e.synergy, 20.0);
  EXPECT_DOUBLE_EQ(e.opposition, std::abs(1.0 * 4 - 3.0 * 2));
  EXPECT_NEAR(e.similarity, 11.0 / (std::sqrt(5.0) * 5.0), 1e-15);
  auto f = explain_pair(m, 1, 0);
  EXPECT_EQ(e.synergy, f.synergy);
  EXPECT_EQ(e.opposition, f.opposition);
  EXPECT_EQ(e.similarity, f.similarity);
  EXPECT_EQ(e.opposition, pair_opposition_level(m, 0, 1));
  EXPECT_THROW(explain_pair(m, 2, 2), ContractError);
}
