#include "gae/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "gae/error.hpp"
#include "gae/evaluation.hpp"

namespace gae {
namespace {

void check_training_set(const Dataset& dataset) {
  if (dataset.empty()) {
    throw ContractError("training set is empty");
  }
  dataset.validate();
}

std::vector<SparseFeature> encode_all(const Dataset& dataset) {
  std::vector<SparseFeature> features;
  features.reserve(dataset.size());
  for (const auto& m : dataset.matches) {
    features.push_back(encode_match(m, dataset.registry.size()));
  }
  return features;
}

std::vector<int> outcomes(const Dataset& dataset) {
  std::vector<int> labels;
  labels.reserve(dataset.size());
  for (const auto& m : dataset.matches) labels.push_back(m.outcome);
  return labels;
}

std::vector<std::size_t> identity_order(std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  return order;
}

template <typename Block>
void adagrad_block(Block& theta, Block& accum, const Block& g, double lr, double eps) {
  accum.array() += g.array().square();
  theta.array() -= lr * g.array() / (accum.array().sqrt() + eps);
}

}  // namespace

SparseFeature encode_match(const MatchRecord& match, std::size_t num_avatars) {
  validate_match(match, num_avatars);
  SparseFeature f;
  f.dimension = 2 * num_avatars;
  std::size_t k = 0;
  for (AvatarIndex i : match.red) f.active[k++] = i;
  for (AvatarIndex j : match.blue) f.active[k++] = j + num_avatars;
  return f;
}

// ---------------------------------------------------------------------------

void LogisticConfig::validate() const {
  if (!(l2 >= 0.0)) throw ContractError("l2 must be >= 0");
  if (!(learning_rate > 0.0)) throw ContractError("learning_rate must be > 0");
  if (!(decay >= 0.0)) throw ContractError("decay must be >= 0");
  if (epochs < 1) throw ContractError("epochs must be >= 1");
  if (batch_size < 1) throw ContractError("batch_size must be >= 1");
}

void LogisticModel::validate() const {
  if (static_cast<std::size_t>(weights.size()) != 2 * registry.size()) {
    throw ContractError("logistic weights must have 2N entries");
  }
  if (!weights.allFinite() || !std::isfinite(intercept)) {
    throw ContractError("logistic weights contain non-finite values");
  }
}

double lr_logit(const LogisticModel& model, const SparseFeature& feature) {
  if (static_cast<std::size_t>(model.weights.size()) != feature.dimension) {
    throw ContractError("feature dimension does not match the logistic model");
  }
  double z = model.intercept;
  for (std::size_t i : feature.active) z += model.weights(static_cast<Eigen::Index>(i));
  return z;
}

LogisticModel train_logistic_regression(const Dataset& dataset, const LogisticConfig& config) {
  config.validate();
  check_training_set(dataset);
  const auto features = encode_all(dataset);
  const auto dim = static_cast<Eigen::Index>(2 * dataset.registry.size());

  LogisticModel model;
  model.registry = dataset.registry;
  model.weights = Vector::Zero(dim);
  Vector grad = Vector::Zero(dim);

  auto order = identity_order(dataset.size());
  std::mt19937_64 rng(config.seed);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = config.learning_rate / (1.0 + config.decay * static_cast<double>(epoch));
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      const double inv = 1.0 / static_cast<double>(stop - start);
      grad = config.l2 * model.weights;
      double grad_intercept = 0.0;
      for (std::size_t t = start; t < stop; ++t) {
        const auto& f = features[order[t]];
        const double r = inv * (sigmoid(lr_logit(model, f)) - dataset.matches[order[t]].outcome);
        for (std::size_t i : f.active) grad(static_cast<Eigen::Index>(i)) += r;
        grad_intercept += r;
      }
      model.weights -= lr * grad;
      model.intercept -= lr * grad_intercept;
    }
    if (!model.weights.allFinite() || !std::isfinite(model.intercept)) {
      throw NumericalError(fmt::format("logistic regression diverged at epoch {}", epoch + 1));
    }
  }
  return model;
}

// ---------------------------------------------------------------------------

void FmConfig::validate() const {
  if (factors < 1) throw ContractError("factors must be >= 1");
  if (!(l2 >= 0.0)) throw ContractError("l2 must be >= 0");
  if (!(learning_rate > 0.0)) throw ContractError("learning_rate must be > 0");
  if (!(adagrad_epsilon > 0.0)) throw ContractError("adagrad_epsilon must be > 0");
  if (batch_size < 1) throw ContractError("batch_size must be >= 1");
  if (epochs < 1) throw ContractError("epochs must be >= 1");
  if (init_scale && !(*init_scale >= 0.0)) throw ContractError("init_scale must be >= 0");
}

void FMParams::validate() const {
  const auto dim = static_cast<Eigen::Index>(2 * registry.size());
  if (linear.size() != dim || factors.rows() != dim || factors.cols() < 1) {
    throw ContractError("factorization machine parameters must have 2N rows");
  }
  if (!linear.allFinite() || !factors.allFinite() || !std::isfinite(intercept)) {
    throw ContractError("factorization machine parameters contain non-finite values");
  }
}

double fm_logit(const FMParams& fm, const SparseFeature& feature) {
  if (static_cast<std::size_t>(fm.linear.size()) != feature.dimension) {
    throw ContractError("feature dimension does not match the factorization machine");
  }
  double z = fm.intercept;
  Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(fm.factors.cols());
  double squares = 0.0;
  for (std::size_t i : feature.active) {
    const auto row = fm.factors.row(static_cast<Eigen::Index>(i));
    z += fm.linear(static_cast<Eigen::Index>(i));
    sum += row;
    squares += row.squaredNorm();
  }
  return z + 0.5 * (sum.squaredNorm() - squares);
}

FMParams train_fm(const Dataset& dataset, const FmConfig& config, const Dataset* validation) {
  config.validate();
  check_training_set(dataset);
  const auto features = encode_all(dataset);
  const auto dim = static_cast<Eigen::Index>(2 * dataset.registry.size());
  const auto k = static_cast<Eigen::Index>(config.factors);

  std::vector<SparseFeature> validation_features;
  std::vector<int> validation_labels;
  if (validation != nullptr) {
    if (validation->registry.size() != dataset.registry.size()) {
      throw ContractError("validation set uses a different avatar registry");
    }
    validation_features = encode_all(*validation);
    validation_labels = outcomes(*validation);
  }

  FMParams fm;
  fm.registry = dataset.registry;
  fm.linear = Vector::Zero(dim);
  fm.factors = RowMatrix::Zero(dim, k);
  const double s = config.init_scale ? *config.init_scale : 0.1 / std::sqrt(static_cast<double>(k));
  std::mt19937_64 rng(config.seed);
  if (s > 0.0) {
    std::uniform_real_distribution<double> uniform(-s, s);
    for (Eigen::Index r = 0; r < dim; ++r) {
      for (Eigen::Index c = 0; c < k; ++c) fm.factors(r, c) = uniform(rng);
    }
  }

  Vector g_linear = Vector::Zero(dim), acc_linear = Vector::Zero(dim);
  RowMatrix g_factors = RowMatrix::Zero(dim, k), acc_factors = RowMatrix::Zero(dim, k);
  double acc_intercept = 0.0;
  Eigen::RowVectorXd sum(k);

  FMParams best;
  double best_auc = -1.0;
  auto order = identity_order(dataset.size());
  std::mt19937_64 shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      const double inv = 1.0 / static_cast<double>(stop - start);
      g_linear = config.l2 * fm.linear;
      g_factors = config.l2 * fm.factors;
      double g_intercept = 0.0;
      for (std::size_t t = start; t < stop; ++t) {
        const auto& f = features[order[t]];
        const double r = inv * (sigmoid(fm_logit(fm, f)) - dataset.matches[order[t]].outcome);
        sum.setZero();
        for (std::size_t i : f.active) sum += fm.factors.row(static_cast<Eigen::Index>(i));
        for (std::size_t i : f.active) {
          const auto row = static_cast<Eigen::Index>(i);
          g_linear(row) += r;
          g_factors.row(row) += r * (sum - fm.factors.row(row));
        }
        g_intercept += r;
      }
      adagrad_block(fm.linear, acc_linear, g_linear, config.learning_rate, config.adagrad_epsilon);
      adagrad_block(fm.factors, acc_factors, g_factors, config.learning_rate,
                    config.adagrad_epsilon);
      acc_intercept += g_intercept * g_intercept;
      fm.intercept -=
          config.learning_rate * g_intercept / (std::sqrt(acc_intercept) + config.adagrad_epsilon);
    }
    if (!fm.linear.allFinite() || !fm.factors.allFinite() || !std::isfinite(fm.intercept)) {
      throw NumericalError(fmt::format("factorization machine diverged at epoch {}", epoch));
    }
    if (validation != nullptr) {
      std::vector<double> scores;
      scores.reserve(validation_features.size());
      for (const auto& f : validation_features) scores.push_back(fm_logit(fm, f));
      const double v = auc(scores, validation_labels);
      if (v > best_auc) {
        best_auc = v;
        best = fm;
      }
    }
  }
  return validation != nullptr ? best : fm;
}

double fm_synergy(const FMParams& fm, AvatarIndex i, AvatarIndex j) {
  const std::size_t n = fm.num_avatars();
  if (i >= n || j >= n || i == j) {
    throw ContractError(fmt::format("invalid avatar pair ({}, {})", i, j));
  }
  return fm.factors.row(static_cast<Eigen::Index>(i))
      .dot(fm.factors.row(static_cast<Eigen::Index>(j)));
}

double fm_opposition(const FMParams& fm, AvatarIndex i, AvatarIndex j) {
  const std::size_t n = fm.num_avatars();
  if (i >= n || j >= n || i == j) {
    throw ContractError(fmt::format("invalid avatar pair ({}, {})", i, j));
  }
  return fm.factors.row(static_cast<Eigen::Index>(i))
      .dot(fm.factors.row(static_cast<Eigen::Index>(j + n)));
}

// ---------------------------------------------------------------------------

void WinRatioMatrix::validate() const {
  const auto n = static_cast<Eigen::Index>(registry.size());
  if (ratio.rows() != n || ratio.cols() != 2 * n || counts.rows() != n || counts.cols() != 2 * n) {
    throw ContractError("win-ratio matrix must be N x 2N");
  }
  if (!ratio.allFinite() || (ratio.array() < 0.0).any() || (ratio.array() > 1.0).any()) {
    throw ContractError("win ratios must lie in [0, 1]");
  }
  if ((counts.array() < 0).any()) {
    throw ContractError("co-occurrence counts must be non-negative");
  }
}

WinRatioMatrix build_win_ratio_matrix(const Dataset& dataset) {
  if (dataset.empty()) {
    throw ContractError("win-ratio matrix of an empty dataset");
  }
  dataset.validate();
  const std::size_t n = dataset.registry.size();
  const auto ni = static_cast<Eigen::Index>(n);
  CountMatrix wins = CountMatrix::Zero(ni, 2 * ni);
  WinRatioMatrix w;
  w.registry = dataset.registry;
  w.counts = CountMatrix::Zero(ni, 2 * ni);

  auto tally_team = [&](const Roster& team, bool won) {
    for (AvatarIndex i : team) {
      for (AvatarIndex j : team) {
        const auto r = static_cast<Eigen::Index>(i), c = static_cast<Eigen::Index>(j);
        ++w.counts(r, c);
        if (won) ++wins(r, c);
      }
    }
  };
  auto tally_versus = [&](const Roster& team, const Roster& other, bool won) {
    for (AvatarIndex i : team) {
      for (AvatarIndex j : other) {
        const auto r = static_cast<Eigen::Index>(i), c = static_cast<Eigen::Index>(j + n);
        ++w.counts(r, c);
        if (won) ++wins(r, c);
      }
    }
  };
  for (const auto& m : dataset.matches) {
    const bool red_won = m.outcome == 1;
    tally_team(m.red, red_won);
    tally_team(m.blue, !red_won);
    tally_versus(m.red, m.blue, red_won);
    tally_versus(m.blue, m.red, !red_won);
  }

  w.ratio = Matrix::Constant(ni, 2 * ni, 0.5);
  for (Eigen::Index r = 0; r < ni; ++r) {
    for (Eigen::Index c = 0; c < 2 * ni; ++c) {
      if (w.counts(r, c) > 0) {
        w.ratio(r, c) = static_cast<double>(wins(r, c)) / static_cast<double>(w.counts(r, c));
      }
    }
  }
  return w;
}

double win_ratio_similarity(const WinRatioMatrix& w, AvatarIndex i, AvatarIndex j) {
  const std::size_t n = w.registry.size();
  if (i >= n || j >= n) {
    throw ContractError(fmt::format("avatar pair ({}, {}) out of range (N = {})", i, j, n));
  }
  return cosine_similarity(w.ratio.row(static_cast<Eigen::Index>(i)).transpose(),
                           w.ratio.row(static_cast<Eigen::Index>(j)).transpose());
}

}  // namespace gae
