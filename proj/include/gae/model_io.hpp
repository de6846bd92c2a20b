#pragma once

#include <filesystem>
#include <iosfwd>
#include <variant>

#include "gae/baselines.hpp"
#include "gae/core_model.hpp"
#include "gae/evaluation.hpp"

namespace gae {

inline constexpr int kModelFormatVersion = 1;

/// Any model that can be written to a model file.
using StoredModel = std::variant<ModelParams, LogisticModel, FMParams, WinRatioMatrix>;

/// Versioned plain-text model file:
///
///   gae-model-file
///   format_version 1
///   kind gae|lr|fm|winratio
///   avatars <N>
///   <one name per line, in index order>
///   <blocks>
///
/// Each block is a header line "matrix <name> <rows> <cols>",
/// "vector <name> <len>" or "scalar <name> <value>" followed by the values,
/// one matrix row (or the whole vector) per line, space separated. Reals use
/// the shortest representation that round-trips exactly.
///
///   gae:      matrix embeddings N K, matrix synergy K K, matrix opposition K K, vector bias N
///   lr:       vector weights 2N, scalar intercept
///   fm:       scalar intercept, vector linear 2N, matrix factors 2N K
///   winratio: matrix ratio N 2N, matrix counts N 2N
void save_model(const StoredModel& model, std::ostream& out);
void save_model(const StoredModel& model, const std::filesystem::path& path);

/// Parses and validates a model file. Malformed files are a DataError.
StoredModel load_model(std::istream& in);
StoredModel load_model(const std::filesystem::path& path);

/// load_model, requiring kind gae.
ModelParams load_embedding_model(const std::filesystem::path& path);

ModelKind kind_of(const StoredModel& model);

}  // namespace gae
