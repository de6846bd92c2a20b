#pragma once

#include <optional>
#include <vector>

#include "gae/core_model.hpp"

namespace gae {

struct ScoredAvatar {
  AvatarIndex avatar = 0;
  double score = 0.0;

  friend bool operator==(const ScoredAvatar&, const ScoredAvatar&) = default;
};

/// A draft seen from the picking side: `ally` plays red, `enemy` blue.
struct DraftState {
  Roster ally;   // 0-4 members
  Roster enemy;  // 0-5 members
  /// Candidates; all unpicked avatars when unset.
  std::optional<std::vector<AvatarIndex>> pool;
  std::optional<std::vector<AvatarIndex>> familiar;
};

/// One candidate pick. bias + synergy + opposition equals the change in the
/// match logit caused by adding `avatar` to the ally roster.
struct Recommendation {
  AvatarIndex avatar = 0;
  double win_probability = 0.0;
  double logit = 0.0;
  double bias = 0.0;        // b_c
  double synergy = 0.0;     // sum over allies j of S(c,j) + S(j,c)
  double opposition = 0.0;  // sum over enemies e of C(c,e) - C(e,c)
  std::vector<ScoredAvatar> similar_familiar;
};

/// Every other avatar ranked by embedding cosine (descending, ties by index),
/// truncated to top_k.
std::vector<ScoredAvatar> similar_avatars(const ModelParams& params, AvatarIndex avatar,
                                          std::size_t top_k);

/// Candidates ranked by the logit (equivalently the win probability) of
/// ally + {c} against enemy, ties by ascending index.
std::vector<Recommendation> recommend_pick(const ModelParams& params, const DraftState& draft,
                                           std::size_t top_k);

struct FamiliarRecommendation {
  std::vector<Recommendation> picks;
  /// Best candidate drawn from the familiar set; empty when every familiar
  /// avatar is already picked or outside the pool.
  std::optional<Recommendation> familiar_best;
};

/// recommend_pick, plus for each pick the sim_k unpicked familiar avatars
/// closest to it by embedding cosine.
FamiliarRecommendation recommend_with_familiarity(const ModelParams& params, const DraftState& draft,
                                                  std::size_t top_k, std::size_t sim_k);

struct PairExplanation {
  double synergy = 0.0;     // S(i,j) + S(j,i)
  double opposition = 0.0;  // |C(i,j) - C(j,i)|
  double similarity = 0.0;  // embedding cosine
};

PairExplanation explain_pair(const ModelParams& params, AvatarIndex i, AvatarIndex j);

}  // namespace gae
