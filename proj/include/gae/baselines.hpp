#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "gae/core_model.hpp"

namespace gae {

/// Binary team-indicator encoding over 2N features: index i is set when
/// avatar i plays red, index N + i when it plays blue.
struct SparseFeature {
  std::array<std::size_t, 2 * kTeamSize> active{};  // red half first, each half ascending
  std::size_t dimension = 0;                         // 2N
};

SparseFeature encode_match(const MatchRecord& match, std::size_t num_avatars);

// ---------------------------------------------------------------------------
// Logistic regression

struct LogisticConfig {
  double l2 = 1e-5;
  double learning_rate = 0.5;
  double decay = 0.1;  // step size at epoch e (0-based) is lr / (1 + decay * e)
  std::size_t epochs = 10;
  std::size_t batch_size = 256;
  std::uint64_t seed = 1;

  void validate() const;
};

struct LogisticModel {
  AvatarRegistry registry;
  Vector weights;  // 2N
  double intercept = 0.0;

  void validate() const;
};

double lr_logit(const LogisticModel& model, const SparseFeature& feature);

/// Mini-batch gradient descent on mean log loss + l2/2 * ||w||^2 (intercept
/// unpenalised). Deterministic in the seed.
LogisticModel train_logistic_regression(const Dataset& dataset, const LogisticConfig& config);

// ---------------------------------------------------------------------------
// Two-way factorization machine

struct FmConfig {
  std::size_t factors = 8;
  double l2 = 0.0;
  double learning_rate = 0.05;
  double adagrad_epsilon = 1e-8;
  std::size_t batch_size = 256;
  std::size_t epochs = 20;
  /// Half-width of the uniform factor initialisation; 0.1 / sqrt(factors) when unset.
  std::optional<double> init_scale;
  std::uint64_t seed = 1;

  void validate() const;
};

struct FMParams {
  AvatarRegistry registry;
  double intercept = 0.0;
  Vector linear;      // 2N first-order weights
  RowMatrix factors;  // 2N x K second-order factors

  [[nodiscard]] std::size_t num_avatars() const { return registry.size(); }
  void validate() const;
};

/// intercept + sum of active linear weights + sum over unordered active pairs
/// of <v_i, v_j>, evaluated with the sum-of-squares identity.
double fm_logit(const FMParams& fm, const SparseFeature& feature);

/// Same loss and optimiser as the embedding model (AdaGrad on mean log loss).
/// With a validation set, returns the epoch with the best validation AUC.
FMParams train_fm(const Dataset& dataset, const FmConfig& config,
                  const Dataset* validation = nullptr);

/// <v_i, v_j>: red-side interaction of two teammates.
double fm_synergy(const FMParams& fm, AvatarIndex i, AvatarIndex j);
/// <v_i, v_{j+N}>: interaction of red avatar i facing blue avatar j.
double fm_opposition(const FMParams& fm, AvatarIndex i, AvatarIndex j);

// ---------------------------------------------------------------------------
// Win-ratio similarity baseline

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// ratio(i, j)     = same-team win rate of avatars i and j
/// ratio(i, j + N) = rate at which i's team beats a team containing j
/// Cells without any co-occurrence hold 0.5 with count 0. The diagonal of the
/// same-team block is the avatar's own win rate.
struct WinRatioMatrix {
  AvatarRegistry registry;
  Matrix ratio;       // N x 2N
  CountMatrix counts; // N x 2N

  void validate() const;
};

WinRatioMatrix build_win_ratio_matrix(const Dataset& dataset);

/// Cosine similarity of rows i and j.
double win_ratio_similarity(const WinRatioMatrix& w, AvatarIndex i, AvatarIndex j);

}  // namespace gae
