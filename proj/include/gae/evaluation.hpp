#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gae/baselines.hpp"
#include "gae/core_model.hpp"
#include "gae/training.hpp"

namespace gae {

/// Probability that a random positive outscores a random negative, ties
/// counting one half. O(n log n). Requires both classes and labels in {0,1}.
double auc(std::span<const double> scores, std::span<const int> labels);

enum class ModelKind { gae, lr, fm, winratio };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

/// One hyperparameter point; the alternative determines the model kind.
using ModelConfig = std::variant<TrainConfig, LogisticConfig, FmConfig>;
using TrainedModel = std::variant<ModelParams, LogisticModel, FMParams>;

ModelKind kind_of(const ModelConfig& config);
/// Stable "key=value;..." rendering used in benchmark reports.
std::string describe(const ModelConfig& config);

TrainedModel fit(const ModelConfig& config, const Dataset& train_set,
                 const Dataset* validation = nullptr);
double predict_logit(const TrainedModel& model, const MatchRecord& match);
double evaluate_auc(const TrainedModel& model, const Dataset& dataset);

struct FoldResult {
  ModelKind kind = ModelKind::gae;
  std::size_t fold = 0;
  double test_auc = 0.0;
  double validation_auc = 0.0;
  ModelConfig chosen;
};

/// For each of `folds` splits, trains every grid point on the training part,
/// keeps the one with the best validation AUC (first wins ties) and records
/// its test AUC. All grid points must share one model kind.
std::vector<FoldResult> cross_validate(const Dataset& dataset, std::span<const ModelConfig> grid,
                                       std::size_t folds, std::uint64_t seed);

struct TTestResult {
  double t = 0.0;
  double p_value = 1.0;  // two-sided
  std::size_t df = 0;
};

/// Paired t-test on a[i] - b[i]. Differences that are all equal and nonzero
/// give t = +-inf and p = 0; all-zero differences are a NumericalError.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

/// Sample correlation coefficient. Constant input is a NumericalError.
double pearson_r(std::span<const double> x, std::span<const double> y);

/// csv with header model,fold,auc,hyperparameters.
void write_benchmark_csv(std::span<const FoldResult> results, std::ostream& out);
/// Per-kind mean/sd of test AUC and paired t-tests between every pair of kinds.
std::string benchmark_summary(std::span<const FoldResult> results);

// ---------------------------------------------------------------------------
// Correlating model scores with human pair ratings

enum class Relationship { similarity, synergy, opposition };

std::string_view to_string(Relationship relationship);

struct PairRating {
  std::string avatar_a;
  std::string avatar_b;
  Relationship relationship = Relationship::similarity;
  double rating = 0.0;
};

/// csv with header avatar_a,avatar_b,relationship,rating.
std::vector<PairRating> read_ratings(std::istream& in);
std::vector<PairRating> load_ratings(const std::filesystem::path& path);

/// Model score for a relationship between two avatars, or nullopt when the
/// model cannot answer that kind of query.
using RelationshipScorer =
    std::function<std::optional<double>(Relationship, AvatarIndex, AvatarIndex)>;

/// Cosine of embeddings, S(i,j)+S(j,i) and |C(i,j)-C(j,i)|.
RelationshipScorer embedding_scorer(const ModelParams& params);
/// <v_i,v_j> for synergy and <v_i,v_{j+N}> for opposition; no similarity.
RelationshipScorer fm_scorer(const FMParams& fm);
/// Row cosine of the win-ratio matrix; similarity only.
RelationshipScorer win_ratio_scorer(const WinRatioMatrix& w);

struct RelationshipCorrelation {
  Relationship relationship = Relationship::similarity;
  std::size_t pairs = 0;
  std::optional<double> r;  // empty when fewer than two pairs or a constant side
};

/// Pearson's r per relationship group. Unknown avatar names are a DataError
/// listing every offender. Groups the scorer cannot answer are omitted.
std::vector<RelationshipCorrelation> correlate_ratings(const AvatarRegistry& registry,
                                                       const RelationshipScorer& scorer,
                                                       std::span<const PairRating> ratings);

}  // namespace gae
