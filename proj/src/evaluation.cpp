#include "gae/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "csv.hpp"
#include "gae/data.hpp"
#include "gae/error.hpp"

namespace gae {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double mean(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_sd(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

std::string optional_scale(const std::optional<double>& s) {
  return s ? fmt::format("{}", *s) : std::string("auto");
}

}  // namespace

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw ContractError("auc: scores and labels differ in length");
  }
  std::uint64_t positives = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw ContractError("auc: labels must be 0 or 1");
    if (std::isnan(scores[i])) throw ContractError("auc: NaN score");
    positives += static_cast<std::uint64_t>(labels[i]);
  }
  const std::uint64_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw ContractError("auc: both classes must be present");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Twice the Mann-Whitney count, kept integral so the result is exact.
  std::uint64_t twice_wins = 0;
  std::uint64_t negatives_below = 0;
  for (std::size_t start = 0; start < order.size();) {
    std::size_t stop = start;
    std::uint64_t pos = 0, neg = 0;
    while (stop < order.size() && scores[order[stop]] == scores[order[start]]) {
      (labels[order[stop]] == 1 ? pos : neg) += 1;
      ++stop;
    }
    twice_wins += 2 * pos * negatives_below + pos * neg;
    negatives_below += neg;
    start = stop;
  }
  return static_cast<double>(twice_wins) /
         (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::gae: return "gae";
    case ModelKind::lr: return "lr";
    case ModelKind::fm: return "fm";
    case ModelKind::winratio: return "winratio";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "gae") return ModelKind::gae;
  if (name == "lr") return ModelKind::lr;
  if (name == "fm") return ModelKind::fm;
  if (name == "winratio") return ModelKind::winratio;
  throw ContractError(fmt::format("unknown model kind \"{}\"", name));
}

ModelKind kind_of(const ModelConfig& config) {
  return std::visit(overloaded{[](const TrainConfig&) { return ModelKind::gae; },
                               [](const LogisticConfig&) { return ModelKind::lr; },
                               [](const FmConfig&) { return ModelKind::fm; }},
                    config);
}

std::string describe(const ModelConfig& config) {
  return std::visit(
      overloaded{
          [](const TrainConfig& c) {
            return fmt::format("dim={};lr={};eps={};batch={};epochs={};l2={};init={};seed={}",
                               c.latent_dim, c.learning_rate, c.adagrad_epsilon, c.batch_size,
                               c.epochs, c.l2_lambda, optional_scale(c.init_scale), c.seed);
          },
          [](const LogisticConfig& c) {
            return fmt::format("l2={};lr={};decay={};batch={};epochs={};seed={}", c.l2,
                               c.learning_rate, c.decay, c.batch_size, c.epochs, c.seed);
          },
          [](const FmConfig& c) {
            return fmt::format("factors={};lr={};eps={};batch={};epochs={};l2={};init={};seed={}",
                               c.factors, c.learning_rate, c.adagrad_epsilon, c.batch_size,
                               c.epochs, c.l2, optional_scale(c.init_scale), c.seed);
          }},
      config);
}

TrainedModel fit(const ModelConfig& config, const Dataset& train_set, const Dataset* validation) {
  return std::visit(
      overloaded{
          [&](const TrainConfig& c) -> TrainedModel { return train(c, train_set, validation).params; },
          [&](const LogisticConfig& c) -> TrainedModel {
            return train_logistic_regression(train_set, c);
          },
          [&](const FmConfig& c) -> TrainedModel { return train_fm(train_set, c, validation); }},
      config);
}

double predict_logit(const TrainedModel& model, const MatchRecord& match) {
  return std::visit(
      overloaded{[&](const ModelParams& p) { return match_logit(p, match.red, match.blue); },
                 [&](const LogisticModel& m) {
                   return lr_logit(m, encode_match(match, m.registry.size()));
                 },
                 [&](const FMParams& fm) {
                   return fm_logit(fm, encode_match(match, fm.registry.size()));
                 }},
      model);
}

double evaluate_auc(const TrainedModel& model, const Dataset& dataset) {
  std::vector<double> scores;
  std::vector<int> labels;
  scores.reserve(dataset.size());
  labels.reserve(dataset.size());
  for (const auto& m : dataset.matches) {
    scores.push_back(predict_logit(model, m));
    labels.push_back(m.outcome);
  }
  return auc(scores, labels);
}

std::vector<FoldResult> cross_validate(const Dataset& dataset, std::span<const ModelConfig> grid,
                                       std::size_t folds, std::uint64_t seed) {
  if (grid.empty()) {
    throw ContractError("hyperparameter grid is empty");
  }
  const ModelKind kind = kind_of(grid.front());
  for (const auto& point : grid) {
    if (kind_of(point) != kind) {
      throw ContractError("all grid points must use the same model kind");
    }
  }
  std::vector<FoldResult> results;
  const auto splits = kfold_split(dataset.size(), folds, seed);
  for (std::size_t f = 0; f < splits.size(); ++f) {
    const Dataset train_set = dataset.subset(splits[f].train);
    const Dataset validation = dataset.subset(splits[f].validation);
    const Dataset test = dataset.subset(splits[f].test);

    std::optional<TrainedModel> best;
    FoldResult result;
    result.kind = kind;
    result.fold = f;
    result.validation_auc = -1.0;
    for (const auto& point : grid) {
      TrainedModel model = fit(point, train_set, &validation);
      const double v = evaluate_auc(model, validation);
      if (v > result.validation_auc) {
        result.validation_auc = v;
        result.chosen = point;
        best = std::move(model);
      }
    }
    result.test_auc = evaluate_auc(*best, test);
    results.push_back(std::move(result));
  }
  return results;
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw ContractError("paired t-test needs two equal-length samples of size >= 2");
  }
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  const double m = mean(diff);
  const double sd = sample_sd(diff);
  TTestResult out;
  out.df = diff.size() - 1;
  if (sd == 0.0) {
    if (m == 0.0) {
      throw NumericalError("paired t-test undefined: all differences are zero");
    }
    out.t = std::copysign(std::numeric_limits<double>::infinity(), m);
    out.p_value = 0.0;
    return out;
  }
  out.t = m / (sd / std::sqrt(static_cast<double>(diff.size())));
  boost::math::students_t dist(static_cast<double>(out.df));
  out.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(out.t)));
  return out;
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ContractError("pearson_r needs two equal-length samples of size >= 2");
  }
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw NumericalError("pearson_r undefined for constant input");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

void write_benchmark_csv(std::span<const FoldResult> results, std::ostream& out) {
  out << "model,fold,auc,hyperparameters\n";
  for (const auto& r : results) {
    out << fmt::format("{},{},{},\"{}\"\n", to_string(r.kind), r.fold, r.test_auc,
                       describe(r.chosen));
  }
}

std::string benchmark_summary(std::span<const FoldResult> results) {
  std::map<ModelKind, std::vector<double>> by_kind;
  for (const auto& r : results) by_kind[r.kind].push_back(r.test_auc);

  std::string out = fmt::format("{:<8} {:>5} {:>10} {:>10}\n", "model", "folds", "mean_auc", "sd_auc");
  for (const auto& [kind, aucs] : by_kind) {
    out += fmt::format("{:<8} {:>5} {:>10.4f} {:>10.4f}\n", to_string(kind), aucs.size(),
                       mean(aucs), sample_sd(aucs));
  }
  if (by_kind.size() < 2) {
    return out;
  }
  out += "\npaired t-tests on per-fold test AUC (two-sided; * marks p < 0.001)\n";
  out += fmt::format("{:<8} {:<8} {:>10} {:>10} {:>12}\n", "a", "b", "mean_diff", "t", "p_value");
  for (auto i = by_kind.begin(); i != by_kind.end(); ++i) {
    for (auto j = std::next(i); j != by_kind.end(); ++j) {
      const auto& a = i->second;
      const auto& b = j->second;
      std::string row = fmt::format("{:<8} {:<8} ", to_string(i->first), to_string(j->first));
      if (a.size() != b.size() || a.size() < 2) {
        out += row + "fold counts differ; not tested\n";
        continue;
      }
      std::vector<double> diff(a.size());
      for (std::size_t k = 0; k < a.size(); ++k) diff[k] = a[k] - b[k];
      try {
        const auto t = paired_t_test(a, b);
        out += row + fmt::format("{:>10.4f} {:>10.3f} {:>12.4g}{}\n", mean(diff), t.t, t.p_value,
                                 t.p_value < 0.001 ? " *" : "");
      } catch (const NumericalError&) {
        out += row + fmt::format("{:>10.4f} {:>10} {:>12}\n", 0.0, "-", "undefined");
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(Relationship relationship) {
  switch (relationship) {
    case Relationship::similarity: return "similarity";
    case Relationship::synergy: return "synergy";
    case Relationship::opposition: return "opposition";
  }
  return "unknown";
}

std::vector<PairRating> read_ratings(std::istream& in) {
  std::vector<PairRating> ratings;
  std::string text;
  std::size_t line = 0;
  bool header_seen = false;
  while (std::getline(in, text)) {
    ++line;
    if (detail::trim(text).empty()) continue;
    const auto fields = detail::split_csv(text, line);
    if (!header_seen) {
      if (fields != std::vector<std::string>{"avatar_a", "avatar_b", "relationship", "rating"}) {
        throw DataError(fmt::format("line {}: expected header avatar_a,avatar_b,relationship,rating", line));
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 4) {
      throw DataError(fmt::format("line {}: expected 4 columns, got {}", line, fields.size()));
    }
    PairRating r;
    r.avatar_a = fields[0];
    r.avatar_b = fields[1];
    if (fields[2] == "similarity") r.relationship = Relationship::similarity;
    else if (fields[2] == "synergy") r.relationship = Relationship::synergy;
    else if (fields[2] == "opposition") r.relationship = Relationship::opposition;
    else throw DataError(fmt::format("line {}: unknown relationship \"{}\"", line, fields[2]));
    try {
      std::size_t used = 0;
      r.rating = std::stod(fields[3], &used);
      if (used != fields[3].size()) throw std::invalid_argument("trailing text");
    } catch (const std::exception&) {
      throw DataError(fmt::format("line {}: rating \"{}\" is not a number", line, fields[3]));
    }
    ratings.push_back(std::move(r));
  }
  return ratings;
}

std::vector<PairRating> load_ratings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open rating file {}", path.string()));
  return read_ratings(in);
}

RelationshipScorer embedding_scorer(const ModelParams& params) {
  return [&params](Relationship rel, AvatarIndex i, AvatarIndex j) -> std::optional<double> {
    switch (rel) {
      case Relationship::similarity: return embedding_similarity(params, i, j);
      case Relationship::synergy: return pair_synergy_level(params, i, j);
      case Relationship::opposition: return pair_opposition_level(params, i, j);
    }
    return std::nullopt;
  };
}

RelationshipScorer fm_scorer(const FMParams& fm) {
  return [&fm](Relationship rel, AvatarIndex i, AvatarIndex j) -> std::optional<double> {
    switch (rel) {
      case Relationship::similarity: return std::nullopt;
      case Relationship::synergy: return fm_synergy(fm, i, j);
      case Relationship::opposition: return fm_opposition(fm, i, j);
    }
    return std::nullopt;
  };
}

RelationshipScorer win_ratio_scorer(const WinRatioMatrix& w) {
  return [&w](Relationship rel, AvatarIndex i, AvatarIndex j) -> std::optional<double> {
    if (rel != Relationship::similarity) return std::nullopt;
    return win_ratio_similarity(w, i, j);
  };
}

std::vector<RelationshipCorrelation> correlate_ratings(const AvatarRegistry& registry,
                                                       const RelationshipScorer& scorer,
                                                       std::span<const PairRating> ratings) {
  std::vector<std::string> unknown;
  for (const auto& r : ratings) {
    for (const auto* name : {&r.avatar_a, &r.avatar_b}) {
      if (!registry.find(*name) &&
          std::find(unknown.begin(), unknown.end(), *name) == unknown.end()) {
        unknown.push_back(*name);
      }
    }
  }
  if (!unknown.empty()) {
    throw DataError(fmt::format("unknown avatars in rating file: {}", fmt::join(unknown, ", ")));
  }

  std::vector<RelationshipCorrelation> out;
  for (Relationship rel : {Relationship::similarity, Relationship::synergy, Relationship::opposition}) {
    std::vector<double> model_scores, human;
    bool answerable = true;
    for (const auto& r : ratings) {
      if (r.relationship != rel) continue;
      auto s = scorer(rel, registry.at(r.avatar_a), registry.at(r.avatar_b));
      if (!s) {
        answerable = false;
        break;
      }
      model_scores.push_back(*s);
      human.push_back(r.rating);
    }
    if (!answerable || model_scores.empty()) continue;
    RelationshipCorrelation c;
    c.relationship = rel;
    c.pairs = model_scores.size();
    if (c.pairs >= 2) {
      try {
        c.r = pearson_r(model_scores, human);
      } catch (const NumericalError&) {
        c.r = std::nullopt;
      }
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace gae
