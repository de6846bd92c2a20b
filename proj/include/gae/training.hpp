#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gae/core_model.hpp"

namespace gae {

struct TrainConfig {
  std::size_t latent_dim = 8;
  double learning_rate = 0.05;
  double adagrad_epsilon = 1e-8;
  std::size_t batch_size = 256;
  std::size_t epochs = 20;
  double l2_lambda = 0.0;
  /// Half-width of the uniform initialisation; 0.1 / sqrt(K) when unset.
  std::optional<double> init_scale;
  std::uint64_t seed = 1;

  [[nodiscard]] double effective_init_scale() const;
  void validate() const;
};

/// Gradient of the objective with the same block layout as ModelParams.
struct GradientSet {
  RowMatrix embeddings;
  Matrix synergy;
  Matrix opposition;
  Vector bias;

  static GradientSet zeros_like(const ModelParams& params);
  void set_zero();
};

struct LossValue {
  double data = 0.0;       // mean negative log-likelihood
  double penalized = 0.0;  // data + l2 / 2 * ||theta||^2
};

/// Mean negative log-likelihood of the outcomes, plus an optional L2 penalty.
LossValue negative_log_likelihood(const ModelParams& params, std::span<const MatchRecord> matches,
                                  double l2_lambda = 0.0);
LossValue negative_log_likelihood(const ModelParams& params, const Dataset& dataset,
                                  double l2_lambda = 0.0);

/// Exact gradient of the batch-mean negative log-likelihood (+ L2 term).
GradientSet gradients(const ModelParams& params, std::span<const MatchRecord> batch,
                      double l2_lambda = 0.0);

/// Per-coordinate running sums of squared gradients.
struct AdagradState {
  GradientSet squared_sums;

  static AdagradState for_params(const ModelParams& params);
};

/// theta -= lr * g / (sqrt(G) + eps) after G += g^2, coordinate-wise.
void adagrad_step(ModelParams& params, AdagradState& state, const GradientSet& grads,
                  const TrainConfig& config);

/// A, P and Q uniform in [-s, s], biases zero. Deterministic in the seed.
ModelParams init_params(const AvatarRegistry& registry, const TrainConfig& config);

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  LossValue train_loss;
  std::optional<double> validation_auc;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochStats> history;
  std::size_t selected_epoch = 0;  // epoch whose parameters were returned
};

/// Mini-batch AdaGrad over a seeded per-epoch shuffle. With a validation set
/// the parameters of the epoch with the best validation AUC are returned,
/// otherwise those of the final epoch. Throws NumericalError when the loss
/// stops being finite.
TrainResult train(const TrainConfig& config, const Dataset& train_set,
                  const Dataset* validation = nullptr);

struct BlockError {
  double max_abs = 0.0;
  double max_rel = 0.0;
};

struct GradientCheckReport {
  BlockError embeddings;
  BlockError synergy;
  BlockError opposition;
  BlockError bias;

  [[nodiscard]] double max_rel() const;
  [[nodiscard]] double max_abs() const;
};

/// Compares `analytic` against central differences of the batch objective.
/// Relative errors use max(|analytic|, |numeric|, 1e-8) as denominator.
GradientCheckReport compare_with_finite_differences(const ModelParams& params,
                                                    std::span<const MatchRecord> batch,
                                                    const GradientSet& analytic, double step,
                                                    double l2_lambda = 0.0);

/// compare_with_finite_differences applied to gradients(params, batch).
GradientCheckReport finite_difference_check(const ModelParams& params,
                                            std::span<const MatchRecord> batch, double step,
                                            double l2_lambda = 0.0);

}  // namespace gae
