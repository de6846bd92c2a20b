#include "gae/core_model.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "gae/error.hpp"

namespace gae {
namespace {

double bilinear(const VectorRef& left, const Matrix& m, const VectorRef& right) {
  if (m.rows() != left.size() || m.cols() != right.size()) {
    throw ContractError(fmt::format("bilinear form shape mismatch: {} x ({} x {}) x {}",
                                    left.size(), m.rows(), m.cols(), right.size()));
  }
  return left.dot(m * right);
}

void check_pair(const ModelParams& params, AvatarIndex i, AvatarIndex j) {
  const std::size_t n = params.num_avatars();
  if (i >= n || j >= n) {
    throw ContractError(fmt::format("avatar pair ({}, {}) out of range (N = {})", i, j, n));
  }
  if (i == j) {
    throw ContractError("self-pair scores are undefined");
  }
}

}  // namespace

void ModelParams::validate() const {
  const auto n = bias.size();
  const auto k = embeddings.cols();
  if (embeddings.rows() != n || static_cast<std::size_t>(n) != registry.size()) {
    throw ContractError(fmt::format("inconsistent avatar count: embeddings {}, bias {}, registry {}",
                                    embeddings.rows(), n, registry.size()));
  }
  if (k < 1) {
    throw ContractError("latent dimension must be at least 1");
  }
  if (synergy.rows() != k || synergy.cols() != k || opposition.rows() != k ||
      opposition.cols() != k) {
    throw ContractError(fmt::format("interaction matrices must be {0} x {0}", k));
  }
  if (!embeddings.allFinite() || !synergy.allFinite() || !opposition.allFinite() ||
      !bias.allFinite()) {
    throw ContractError("model parameters contain non-finite values");
  }
}

ModelParams ModelParams::zeros(AvatarRegistry registry, std::size_t latent_dim) {
  const auto n = static_cast<Eigen::Index>(registry.size());
  const auto k = static_cast<Eigen::Index>(latent_dim);
  ModelParams p;
  p.registry = std::move(registry);
  p.embeddings = RowMatrix::Zero(n, k);
  p.synergy = Matrix::Zero(k, k);
  p.opposition = Matrix::Zero(k, k);
  p.bias = Vector::Zero(n);
  return p;
}

double synergy_score(const VectorRef& a_i, const Matrix& synergy, const VectorRef& a_j) {
  return bilinear(a_i, synergy, a_j);
}

double opposition_score(const VectorRef& a_i, const Matrix& opposition, const VectorRef& a_j) {
  return bilinear(a_i, opposition, a_j);
}

double match_logit(const ModelParams& params, const Roster& red, const Roster& blue) {
  check_disjoint(red, blue, params.num_avatars());
  const auto k = static_cast<Eigen::Index>(params.latent_dim());

  // Ordered pairs i != j within a team sum to s^T P s - sum_i a_i^T P a_i,
  // and the cross-team term collapses to s_r^T Q s_b - s_b^T Q s_r.
  Vector red_sum = Vector::Zero(k);
  Vector blue_sum = Vector::Zero(k);
  double logit = 0.0;
  for (AvatarIndex i : red) {
    const auto a = params.embedding(i);
    red_sum += a;
    logit += params.bias(static_cast<Eigen::Index>(i)) - a.dot(params.synergy * a);
  }
  for (AvatarIndex j : blue) {
    const auto a = params.embedding(j);
    blue_sum += a;
    logit -= params.bias(static_cast<Eigen::Index>(j)) - a.dot(params.synergy * a);
  }
  logit += red_sum.dot(params.synergy * red_sum) - blue_sum.dot(params.synergy * blue_sum);
  logit += red_sum.dot(params.opposition * blue_sum) - blue_sum.dot(params.opposition * red_sum);
  return logit;
}

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sigmoid(double x) {
  if (x >= 0.0) {
    return -std::log1p(std::exp(-x));
  }
  return x - std::log1p(std::exp(x));
}

double win_probability(const ModelParams& params, const Roster& red, const Roster& blue) {
  return sigmoid(match_logit(params, red, blue));
}

double pair_synergy_level(const ModelParams& params, AvatarIndex i, AvatarIndex j) {
  check_pair(params, i, j);
  const auto a_i = params.embedding(i);
  const auto a_j = params.embedding(j);
  return synergy_score(a_i, params.synergy, a_j) + synergy_score(a_j, params.synergy, a_i);
}

double pair_opposition_level(const ModelParams& params, AvatarIndex i, AvatarIndex j) {
  check_pair(params, i, j);
  const auto a_i = params.embedding(i);
  const auto a_j = params.embedding(j);
  return std::abs(opposition_score(a_i, params.opposition, a_j) -
                  opposition_score(a_j, params.opposition, a_i));
}

double cosine_similarity(const VectorRef& u, const VectorRef& v) {
  if (u.size() != v.size()) {
    throw ContractError(fmt::format("cosine of vectors with sizes {} and {}", u.size(), v.size()));
  }
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) {
    throw ContractError("cosine similarity of a zero-norm vector");
  }
  return std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
}

double embedding_similarity(const ModelParams& params, AvatarIndex i, AvatarIndex j) {
  const std::size_t n = params.num_avatars();
  if (i >= n || j >= n) {
    throw ContractError(fmt::format("avatar pair ({}, {}) out of range (N = {})", i, j, n));
  }
  return cosine_similarity(params.embedding(i), params.embedding(j));
}

}  // namespace gae
