#include "gae/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "gae/error.hpp"
#include "gae/evaluation.hpp"

namespace gae {
namespace {

/// Buffers reused across matches; sized for one latent dimension.
struct Workspace {
  Matrix synergy_sym;     // P + P^T
  Matrix opposition_anti; // Q - Q^T
  Vector red_sum, blue_sum, red_dir, blue_dir, tmp;

  explicit Workspace(const ModelParams& params) { refresh(params); }

  void refresh(const ModelParams& params) {
    const auto k = static_cast<Eigen::Index>(params.latent_dim());
    synergy_sym = params.synergy + params.synergy.transpose();
    opposition_anti = params.opposition - params.opposition.transpose();
    red_sum.resize(k);
    blue_sum.resize(k);
    red_dir.resize(k);
    blue_dir.resize(k);
    tmp.resize(k);
  }
};

/// Logit of one match using the cached symmetric/antisymmetric parts.
/// Leaves the team sums in the workspace.
double fast_logit(const ModelParams& params, const MatchRecord& match, Workspace& ws) {
  ws.red_sum.setZero();
  ws.blue_sum.setZero();
  double logit = 0.0;
  for (AvatarIndex i : match.red) {
    const auto a = params.embedding(i);
    ws.red_sum += a;
    ws.tmp.noalias() = ws.synergy_sym * a;
    logit += params.bias(static_cast<Eigen::Index>(i)) - 0.5 * a.dot(ws.tmp);
  }
  for (AvatarIndex j : match.blue) {
    const auto a = params.embedding(j);
    ws.blue_sum += a;
    ws.tmp.noalias() = ws.synergy_sym * a;
    logit -= params.bias(static_cast<Eigen::Index>(j)) - 0.5 * a.dot(ws.tmp);
  }
  ws.tmp.noalias() = ws.synergy_sym * ws.red_sum;
  logit += 0.5 * ws.red_sum.dot(ws.tmp);
  ws.tmp.noalias() = ws.synergy_sym * ws.blue_sum;
  logit -= 0.5 * ws.blue_sum.dot(ws.tmp);
  ws.tmp.noalias() = ws.opposition_anti * ws.blue_sum;
  logit += ws.red_sum.dot(ws.tmp);
  return logit;
}

double match_nll(double logit, int outcome) {
  return outcome == 1 ? -log_sigmoid(logit) : -log_sigmoid(-logit);
}

/// Adds weight * d(logit)/d(theta) to grads. Requires fast_logit to have run
/// on the same match so the team sums are current.
void add_logit_gradient(const ModelParams& params, const MatchRecord& match, double weight,
                        Workspace& ws, GradientSet& grads) {
  // d logit / d a_k = (P+P^T)(s_r - a_k) + (Q-Q^T) s_b       for red k
  //                 = -(P+P^T)(s_b - a_k) - (Q-Q^T) s_r      for blue k
  ws.red_dir.noalias() = ws.synergy_sym * ws.red_sum;
  ws.red_dir.noalias() += ws.opposition_anti * ws.blue_sum;
  ws.blue_dir.noalias() = ws.synergy_sym * ws.blue_sum;
  ws.blue_dir.noalias() += ws.opposition_anti * ws.red_sum;

  for (AvatarIndex i : match.red) {
    const auto row = static_cast<Eigen::Index>(i);
    const auto a = params.embedding(i);
    ws.tmp.noalias() = ws.synergy_sym * a;
    grads.embeddings.row(row) += weight * (ws.red_dir - ws.tmp).transpose();
    grads.synergy.noalias() -= weight * (a * a.transpose());
    grads.bias(row) += weight;
  }
  for (AvatarIndex j : match.blue) {
    const auto row = static_cast<Eigen::Index>(j);
    const auto a = params.embedding(j);
    ws.tmp.noalias() = ws.synergy_sym * a;
    grads.embeddings.row(row) -= weight * (ws.blue_dir - ws.tmp).transpose();
    grads.synergy.noalias() += weight * (a * a.transpose());
    grads.bias(row) -= weight;
  }
  grads.synergy.noalias() += weight * (ws.red_sum * ws.red_sum.transpose());
  grads.synergy.noalias() -= weight * (ws.blue_sum * ws.blue_sum.transpose());
  grads.opposition.noalias() += weight * (ws.red_sum * ws.blue_sum.transpose());
  grads.opposition.noalias() -= weight * (ws.blue_sum * ws.red_sum.transpose());
}

double squared_norm(const ModelParams& p) {
  return p.embeddings.squaredNorm() + p.synergy.squaredNorm() + p.opposition.squaredNorm() +
         p.bias.squaredNorm();
}

void add_l2(const ModelParams& params, double l2_lambda, GradientSet& grads) {
  if (l2_lambda == 0.0) {
    return;
  }
  grads.embeddings += l2_lambda * params.embeddings;
  grads.synergy += l2_lambda * params.synergy;
  grads.opposition += l2_lambda * params.opposition;
  grads.bias += l2_lambda * params.bias;
}

void check_batch(const ModelParams& params, std::span<const MatchRecord> batch) {
  if (batch.empty()) {
    throw ContractError("batch must contain at least one match");
  }
  for (const auto& m : batch) {
    validate_match(m, params.num_avatars());
  }
}

template <typename Block>
void adagrad_block(Block& theta, Block& accum, const Block& g, double lr, double eps) {
  accum.array() += g.array().square();
  theta.array() -= lr * g.array() / (accum.array().sqrt() + eps);
}

std::vector<double> predict_all(const ModelParams& params, const Dataset& data, Workspace& ws) {
  std::vector<double> scores;
  scores.reserve(data.size());
  for (const auto& m : data.matches) {
    scores.push_back(fast_logit(params, m, ws));
  }
  return scores;
}

std::vector<int> labels_of(const Dataset& data) {
  std::vector<int> labels;
  labels.reserve(data.size());
  for (const auto& m : data.matches) {
    labels.push_back(m.outcome);
  }
  return labels;
}

}  // namespace

double TrainConfig::effective_init_scale() const {
  return init_scale ? *init_scale : 0.1 / std::sqrt(static_cast<double>(latent_dim));
}

void TrainConfig::validate() const {
  if (latent_dim < 1) throw ContractError("latent_dim must be >= 1");
  if (!(learning_rate > 0.0)) throw ContractError("learning_rate must be > 0");
  if (!(adagrad_epsilon > 0.0)) throw ContractError("adagrad_epsilon must be > 0");
  if (batch_size < 1) throw ContractError("batch_size must be >= 1");
  if (epochs < 1) throw ContractError("epochs must be >= 1");
  if (!(l2_lambda >= 0.0)) throw ContractError("l2_lambda must be >= 0");
  if (init_scale && !(*init_scale >= 0.0)) throw ContractError("init_scale must be >= 0");
}

GradientSet GradientSet::zeros_like(const ModelParams& params) {
  GradientSet g;
  g.embeddings = RowMatrix::Zero(params.embeddings.rows(), params.embeddings.cols());
  g.synergy = Matrix::Zero(params.synergy.rows(), params.synergy.cols());
  g.opposition = Matrix::Zero(params.opposition.rows(), params.opposition.cols());
  g.bias = Vector::Zero(params.bias.size());
  return g;
}

void GradientSet::set_zero() {
  embeddings.setZero();
  synergy.setZero();
  opposition.setZero();
  bias.setZero();
}

LossValue negative_log_likelihood(const ModelParams& params, std::span<const MatchRecord> matches,
                                  double l2_lambda) {
  if (matches.empty()) {
    throw ContractError("negative log-likelihood of an empty dataset");
  }
  Workspace ws(params);
  double total = 0.0;
  for (const auto& m : matches) {
    validate_match(m, params.num_avatars());
    total += match_nll(fast_logit(params, m, ws), m.outcome);
  }
  LossValue loss;
  loss.data = total / static_cast<double>(matches.size());
  loss.penalized = loss.data + 0.5 * l2_lambda * squared_norm(params);
  return loss;
}

LossValue negative_log_likelihood(const ModelParams& params, const Dataset& dataset,
                                  double l2_lambda) {
  return negative_log_likelihood(params, std::span<const MatchRecord>(dataset.matches), l2_lambda);
}

GradientSet gradients(const ModelParams& params, std::span<const MatchRecord> batch,
                      double l2_lambda) {
  check_batch(params, batch);
  Workspace ws(params);
  GradientSet grads = GradientSet::zeros_like(params);
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (const auto& m : batch) {
    const double p = sigmoid(fast_logit(params, m, ws));
    add_logit_gradient(params, m, inv * (p - m.outcome), ws, grads);
  }
  add_l2(params, l2_lambda, grads);
  return grads;
}

AdagradState AdagradState::for_params(const ModelParams& params) {
  return AdagradState{GradientSet::zeros_like(params)};
}

void adagrad_step(ModelParams& params, AdagradState& state, const GradientSet& grads,
                  const TrainConfig& config) {
  auto& acc = state.squared_sums;
  if (acc.embeddings.rows() != params.embeddings.rows() ||
      acc.embeddings.cols() != params.embeddings.cols() ||
      grads.embeddings.rows() != params.embeddings.rows() ||
      grads.embeddings.cols() != params.embeddings.cols() ||
      acc.synergy.size() != params.synergy.size() || grads.synergy.size() != params.synergy.size() ||
      acc.opposition.size() != params.opposition.size() ||
      grads.opposition.size() != params.opposition.size() ||
      acc.bias.size() != params.bias.size() || grads.bias.size() != params.bias.size()) {
    throw ContractError("AdaGrad state or gradient shape does not match the parameters");
  }
  const double lr = config.learning_rate;
  const double eps = config.adagrad_epsilon;
  adagrad_block(params.embeddings, acc.embeddings, grads.embeddings, lr, eps);
  adagrad_block(params.synergy, acc.synergy, grads.synergy, lr, eps);
  adagrad_block(params.opposition, acc.opposition, grads.opposition, lr, eps);
  adagrad_block(params.bias, acc.bias, grads.bias, lr, eps);
}

ModelParams init_params(const AvatarRegistry& registry, const TrainConfig& config) {
  config.validate();
  if (registry.size() < 2) {
    throw ContractError("at least two avatars are required");
  }
  ModelParams params = ModelParams::zeros(registry, config.latent_dim);
  const double s = config.effective_init_scale();
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> uniform(-s, s);
  auto draw = [&](auto& block) {
    for (Eigen::Index r = 0; r < block.rows(); ++r) {
      for (Eigen::Index c = 0; c < block.cols(); ++c) {
        block(r, c) = s == 0.0 ? 0.0 : uniform(rng);
      }
    }
  };
  draw(params.embeddings);
  draw(params.synergy);
  draw(params.opposition);
  return params;
}

TrainResult train(const TrainConfig& config, const Dataset& train_set, const Dataset* validation) {
  config.validate();
  if (train_set.empty()) {
    throw ContractError("training set is empty");
  }
  train_set.validate();
  std::vector<int> validation_labels;
  if (validation != nullptr) {
    if (validation->registry.size() != train_set.registry.size()) {
      throw ContractError("validation set uses a different avatar registry");
    }
    validation->validate();
    validation_labels = labels_of(*validation);
  }

  TrainResult result;
  ModelParams params = init_params(train_set.registry, config);
  AdagradState state = AdagradState::for_params(params);
  GradientSet grads = GradientSet::zeros_like(params);
  Workspace ws(params);

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  double best_auc = -1.0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      const double inv = 1.0 / static_cast<double>(stop - start);
      grads.set_zero();
      ws.refresh(params);
      for (std::size_t t = start; t < stop; ++t) {
        const auto& m = train_set.matches[order[t]];
        const double p = sigmoid(fast_logit(params, m, ws));
        add_logit_gradient(params, m, inv * (p - m.outcome), ws, grads);
      }
      add_l2(params, config.l2_lambda, grads);
      adagrad_step(params, state, grads, config);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = negative_log_likelihood(params, train_set, config.l2_lambda);
    if (!std::isfinite(stats.train_loss.penalized)) {
      throw NumericalError(fmt::format("training loss became non-finite at epoch {}", epoch));
    }
    if (validation != nullptr) {
      ws.refresh(params);
      const double v = auc(predict_all(params, *validation, ws), validation_labels);
      stats.validation_auc = v;
      if (v > best_auc) {
        best_auc = v;
        result.params = params;
        result.selected_epoch = epoch;
      }
    }
    result.history.push_back(stats);
  }
  if (validation == nullptr) {
    result.params = std::move(params);
    result.selected_epoch = config.epochs;
  }
  return result;
}

double GradientCheckReport::max_rel() const {
  return std::max({embeddings.max_rel, synergy.max_rel, opposition.max_rel, bias.max_rel});
}

double GradientCheckReport::max_abs() const {
  return std::max({embeddings.max_abs, synergy.max_abs, opposition.max_abs, bias.max_abs});
}

GradientCheckReport compare_with_finite_differences(const ModelParams& params,
                                                    std::span<const MatchRecord> batch,
                                                    const GradientSet& analytic, double step,
                                                    double l2_lambda) {
  if (!(step > 0.0)) {
    throw ContractError("finite-difference step must be > 0");
  }
  check_batch(params, batch);
  ModelParams probe = params;
  auto objective = [&] { return negative_log_likelihood(probe, batch, l2_lambda).penalized; };

  auto check_block = [&](auto& theta, const auto& grad) {
    if (theta.rows() != grad.rows() || theta.cols() != grad.cols()) {
      throw ContractError("analytic gradient shape does not match the parameters");
    }
    BlockError err;
    for (Eigen::Index r = 0; r < theta.rows(); ++r) {
      for (Eigen::Index c = 0; c < theta.cols(); ++c) {
        const double saved = theta(r, c);
        theta(r, c) = saved + step;
        const double up = objective();
        theta(r, c) = saved - step;
        const double down = objective();
        theta(r, c) = saved;
        const double numeric = (up - down) / (2.0 * step);
        const double a = grad(r, c);
        const double abs_err = std::abs(a - numeric);
        const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
        err.max_abs = std::max(err.max_abs, abs_err);
        err.max_rel = std::max(err.max_rel, abs_err / denom);
      }
    }
    return err;
  };

  GradientCheckReport report;
  report.embeddings = check_block(probe.embeddings, analytic.embeddings);
  report.synergy = check_block(probe.synergy, analytic.synergy);
  report.opposition = check_block(probe.opposition, analytic.opposition);
  report.bias = check_block(probe.bias, analytic.bias);
  return report;
}

GradientCheckReport finite_difference_check(const ModelParams& params,
                                            std::span<const MatchRecord> batch, double step,
                                            double l2_lambda) {
  return compare_with_finite_differences(params, batch, gradients(params, batch, l2_lambda), step,
                                         l2_lambda);
}

}  // namespace gae
