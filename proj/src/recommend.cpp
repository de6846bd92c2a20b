#include "gae/recommend.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "gae/error.hpp"

namespace gae {
namespace {

bool ranks_before(double score_a, AvatarIndex a, double score_b, AvatarIndex b) {
  if (score_a != score_b) return score_a > score_b;
  return a < b;
}

void check_draft(const ModelParams& params, const DraftState& draft) {
  check_disjoint(draft.ally, draft.enemy, params.num_avatars());
  if (draft.ally.size() >= kTeamSize) {
    throw ContractError("the ally roster is already complete");
  }
}

std::vector<AvatarIndex> candidate_pool(const ModelParams& params, const DraftState& draft) {
  std::vector<AvatarIndex> pool;
  if (draft.pool) {
    pool = *draft.pool;
    std::sort(pool.begin(), pool.end());
    if (std::adjacent_find(pool.begin(), pool.end()) != pool.end()) {
      throw ContractError("candidate pool contains a duplicate avatar");
    }
    for (AvatarIndex c : pool) {
      if (c >= params.num_avatars()) {
        throw ContractError(fmt::format("candidate {} out of range (N = {})", c, params.num_avatars()));
      }
      if (draft.ally.contains(c) || draft.enemy.contains(c)) {
        throw ContractError(fmt::format("candidate {} is already picked", params.registry.name(c)));
      }
    }
  } else {
    for (AvatarIndex c = 0; c < params.num_avatars(); ++c) {
      if (!draft.ally.contains(c) && !draft.enemy.contains(c)) pool.push_back(c);
    }
  }
  if (pool.empty()) {
    throw ContractError("no candidate avatars to recommend");
  }
  return pool;
}

Recommendation score_candidate(const ModelParams& params, const DraftState& draft, AvatarIndex c) {
  Recommendation rec;
  rec.avatar = c;
  rec.logit = match_logit(params, draft.ally.with(c), draft.enemy);
  rec.win_probability = sigmoid(rec.logit);
  rec.bias = params.bias(static_cast<Eigen::Index>(c));
  const auto a_c = params.embedding(c);
  for (AvatarIndex j : draft.ally) {
    const auto a_j = params.embedding(j);
    rec.synergy += synergy_score(a_c, params.synergy, a_j) + synergy_score(a_j, params.synergy, a_c);
  }
  for (AvatarIndex e : draft.enemy) {
    const auto a_e = params.embedding(e);
    rec.opposition +=
        opposition_score(a_c, params.opposition, a_e) - opposition_score(a_e, params.opposition, a_c);
  }
  return rec;
}

void rank(std::vector<Recommendation>& recs) {
  std::sort(recs.begin(), recs.end(), [](const Recommendation& x, const Recommendation& y) {
    return ranks_before(x.logit, x.avatar, y.logit, y.avatar);
  });
}

}  // namespace

std::vector<ScoredAvatar> similar_avatars(const ModelParams& params, AvatarIndex avatar,
                                          std::size_t top_k) {
  if (top_k < 1) {
    throw ContractError("top_k must be >= 1");
  }
  if (avatar >= params.num_avatars()) {
    throw ContractError(fmt::format("avatar {} out of range (N = {})", avatar, params.num_avatars()));
  }
  std::vector<ScoredAvatar> out;
  for (AvatarIndex j = 0; j < params.num_avatars(); ++j) {
    if (j != avatar) out.push_back({j, embedding_similarity(params, avatar, j)});
  }
  std::sort(out.begin(), out.end(), [](const ScoredAvatar& x, const ScoredAvatar& y) {
    return ranks_before(x.score, x.avatar, y.score, y.avatar);
  });
  out.resize(std::min(out.size(), top_k));
  return out;
}

std::vector<Recommendation> recommend_pick(const ModelParams& params, const DraftState& draft,
                                           std::size_t top_k) {
  if (top_k < 1) {
    throw ContractError("top_k must be >= 1");
  }
  check_draft(params, draft);
  std::vector<Recommendation> recs;
  for (AvatarIndex c : candidate_pool(params, draft)) {
    recs.push_back(score_candidate(params, draft, c));
  }
  rank(recs);
  recs.resize(std::min(recs.size(), top_k));
  return recs;
}

FamiliarRecommendation recommend_with_familiarity(const ModelParams& params, const DraftState& draft,
                                                  std::size_t top_k, std::size_t sim_k) {
  if (!draft.familiar || draft.familiar->empty()) {
    throw ContractError("familiar set is empty");
  }
  if (sim_k < 1) {
    throw ContractError("sim_k must be >= 1");
  }
  FamiliarRecommendation out;
  out.picks = recommend_pick(params, draft, top_k);

  std::vector<AvatarIndex> familiar = *draft.familiar;
  std::sort(familiar.begin(), familiar.end());
  familiar.erase(std::unique(familiar.begin(), familiar.end()), familiar.end());
  for (AvatarIndex f : familiar) {
    if (f >= params.num_avatars()) {
      throw ContractError(fmt::format("familiar avatar {} out of range (N = {})", f, params.num_avatars()));
    }
  }
  std::erase_if(familiar, [&](AvatarIndex f) { return draft.ally.contains(f) || draft.enemy.contains(f); });

  for (auto& rec : out.picks) {
    for (AvatarIndex f : familiar) {
      const double s = f == rec.avatar ? 1.0 : embedding_similarity(params, rec.avatar, f);
      rec.similar_familiar.push_back({f, s});
    }
    std::sort(rec.similar_familiar.begin(), rec.similar_familiar.end(),
              [](const ScoredAvatar& x, const ScoredAvatar& y) {
                return ranks_before(x.score, x.avatar, y.score, y.avatar);
              });
    rec.similar_familiar.resize(std::min(rec.similar_familiar.size(), sim_k));
  }

  const auto pool = candidate_pool(params, draft);
  std::vector<Recommendation> familiar_recs;
  for (AvatarIndex f : familiar) {
    if (std::binary_search(pool.begin(), pool.end(), f)) {
      familiar_recs.push_back(score_candidate(params, draft, f));
    }
  }
  if (!familiar_recs.empty()) {
    rank(familiar_recs);
    out.familiar_best = familiar_recs.front();
  }
  return out;
}

PairExplanation explain_pair(const ModelParams& params, AvatarIndex i, AvatarIndex j) {
  PairExplanation e;
  e.synergy = pair_synergy_level(params, i, j);
  e.opposition = pair_opposition_level(params, i, j);
  e.similarity = embedding_similarity(params, i, j);
  return e;
}

}  // namespace gae
