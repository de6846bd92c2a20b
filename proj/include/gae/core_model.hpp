#pragma once

#include <Eigen/Dense>

#include "gae/types.hpp"

namespace gae {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
/// Row-major: one contiguous row per avatar.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VectorRef = Eigen::Ref<const Vector>;

/// Parameters of the avatar embedding model.
///
///   embeddings  N x K   one latent vector per avatar
///   synergy     K x K   intra-team interaction matrix
///   opposition  K x K   inter-team interaction matrix
///   bias        N       per-avatar contribution to winning
///
/// Neither interaction matrix is assumed symmetric. Values are treated as
/// immutable once handed to the query functions below.
struct ModelParams {
  AvatarRegistry registry;
  RowMatrix embeddings;
  Matrix synergy;
  Matrix opposition;
  Vector bias;

  [[nodiscard]] std::size_t num_avatars() const { return static_cast<std::size_t>(bias.size()); }
  [[nodiscard]] std::size_t latent_dim() const {
    return static_cast<std::size_t>(embeddings.cols());
  }
  [[nodiscard]] auto embedding(AvatarIndex i) const { return embeddings.row(static_cast<Eigen::Index>(i)).transpose(); }

  /// Throws ContractError on shape mismatch or non-finite entries.
  void validate() const;

  static ModelParams zeros(AvatarRegistry registry, std::size_t latent_dim);
};

/// a_i^T P a_j: how much avatar i helps teammate j.
double synergy_score(const VectorRef& a_i, const Matrix& synergy, const VectorRef& a_j);
/// a_i^T Q a_j: how much avatar i counters opponent j.
double opposition_score(const VectorRef& a_i, const Matrix& opposition, const VectorRef& a_j);

/// Argument of the sigmoid for "red beats blue": bias difference, ordered
/// intra-team synergy pairs, and net cross-team opposition. Rosters may be
/// partial but must be disjoint and in range.
double match_logit(const ModelParams& params, const Roster& red, const Roster& blue);

/// Probability that red beats blue.
double win_probability(const ModelParams& params, const Roster& red, const Roster& blue);

/// Logistic function, evaluated without overflow for any finite input.
double sigmoid(double x);
/// log(sigmoid(x)), stable for large |x|.
double log_sigmoid(double x);

/// S(i,j) + S(j,i). Symmetric; i == j is rejected.
double pair_synergy_level(const ModelParams& params, AvatarIndex i, AvatarIndex j);
/// |C(i,j) - C(j,i)|. Symmetric; i == j is rejected.
double pair_opposition_level(const ModelParams& params, AvatarIndex i, AvatarIndex j);

/// Cosine of the angle between u and v. Zero-norm inputs are an error, not 0.
double cosine_similarity(const VectorRef& u, const VectorRef& v);
double embedding_similarity(const ModelParams& params, AvatarIndex i, AvatarIndex j);

}  // namespace gae
