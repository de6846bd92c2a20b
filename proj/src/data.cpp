#include "gae/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "gae/error.hpp"
#include "gae/evaluation.hpp"
#include "csv.hpp"

namespace gae {
namespace {

using nlohmann::json;

/// A parsed line before registry interning.
struct RawMatch {
  std::vector<std::string> red;
  std::vector<std::string> blue;
  int outcome = 0;
};

int parse_winner(std::string_view winner, std::size_t line) {
  if (winner == "red") return 1;
  if (winner == "blue") return 0;
  throw DataError(fmt::format("line {}: winner must be \"red\" or \"blue\", got \"{}\"", line, winner));
}

RawMatch parse_json_line(std::string_view text, std::size_t line) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(fmt::format("line {}: malformed JSON: {}", line, e.what()));
  }
  if (!obj.is_object()) {
    throw DataError(fmt::format("line {}: expected a JSON object", line));
  }
  auto names = [&](const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_array()) {
      throw DataError(fmt::format("line {}: missing array \"{}\"", line, key));
    }
    std::vector<std::string> out;
    for (const auto& v : *it) {
      if (!v.is_string()) {
        throw DataError(fmt::format("line {}: \"{}\" must contain strings", line, key));
      }
      out.emplace_back(detail::trim(v.get_ref<const std::string&>()));
    }
    return out;
  };
  RawMatch raw;
  raw.red = names("red");
  raw.blue = names("blue");
  auto win = obj.find("win");
  if (win == obj.end() || !win->is_string()) {
    throw DataError(fmt::format("line {}: missing string \"win\"", line));
  }
  raw.outcome = parse_winner(win->get_ref<const std::string&>(), line);
  return raw;
}

const std::vector<std::string> kCsvHeader = {"r1", "r2", "r3", "r4", "r5", "b1",
                                             "b2", "b3", "b4", "b5", "winner"};

RawMatch parse_csv_row(const std::vector<std::string>& fields, std::size_t line) {
  if (fields.size() != kCsvHeader.size()) {
    throw DataError(
        fmt::format("line {}: expected {} columns, got {}", line, kCsvHeader.size(), fields.size()));
  }
  RawMatch raw;
  for (std::size_t c = 0; c < 5; ++c) {
    raw.red.push_back(fields[c]);
    raw.blue.push_back(fields[c + 5]);
  }
  raw.outcome = parse_winner(fields[10], line);
  return raw;
}

/// Reason the rosters break the 5v5 rules, or empty when they are fine.
std::string roster_problem(const RawMatch& raw) {
  if (raw.red.size() != kTeamSize || raw.blue.size() != kTeamSize) {
    return fmt::format("rosters must have {} avatars each (got {} and {})", kTeamSize,
                       raw.red.size(), raw.blue.size());
  }
  std::vector<std::string> all = raw.red;
  all.insert(all.end(), raw.blue.begin(), raw.blue.end());
  if (std::any_of(all.begin(), all.end(), [](const auto& n) { return n.empty(); })) {
    return "empty avatar name";
  }
  std::sort(all.begin(), all.end());
  auto dup = std::adjacent_find(all.begin(), all.end());
  if (dup != all.end()) {
    return fmt::format("avatar \"{}\" appears twice", *dup);
  }
  return {};
}

}  // namespace

MatchFormat parse_match_format(std::string_view name) {
  if (name == "jsonl") return MatchFormat::jsonl;
  if (name == "csv") return MatchFormat::csv;
  throw DataError(fmt::format("unknown match format \"{}\" (expected jsonl or csv)", name));
}

LoadResult read_matches(std::istream& in, MatchFormat format) {
  LoadResult result;
  std::string text;
  std::size_t line = 0;
  bool header_seen = false;
  while (std::getline(in, text)) {
    ++line;
    if (detail::trim(text).empty()) {
      continue;
    }
    RawMatch raw;
    if (format == MatchFormat::jsonl) {
      raw = parse_json_line(text, line);
    } else {
      auto fields = detail::split_csv(text, line);
      if (!header_seen) {
        if (fields != kCsvHeader) {
          throw DataError(fmt::format("line {}: expected header r1,...,r5,b1,...,b5,winner", line));
        }
        header_seen = true;
        continue;
      }
      raw = parse_csv_row(fields, line);
    }
    if (auto problem = roster_problem(raw); !problem.empty()) {
      result.rejected.push_back({line, std::move(problem)});
      continue;
    }
    MatchRecord record;
    auto intern = [&](const std::vector<std::string>& names) {
      std::vector<AvatarIndex> idx;
      for (const auto& n : names) idx.push_back(result.dataset.registry.intern(n));
      return Roster(std::move(idx));
    };
    record.red = intern(raw.red);
    record.blue = intern(raw.blue);
    record.outcome = raw.outcome;
    result.dataset.matches.push_back(std::move(record));
  }
  if (in.bad()) {
    throw DataError("I/O error while reading matches");
  }
  return result;
}

LoadResult load_matches(const std::filesystem::path& path, MatchFormat format) {
  std::ifstream in(path);
  if (!in) {
    throw DataError(fmt::format("cannot open match file {}", path.string()));
  }
  return read_matches(in, format);
}

void write_matches_jsonl(const Dataset& dataset, std::ostream& out) {
  for (const auto& m : dataset.matches) {
    json obj;
    auto names = [&](const Roster& r) {
      json arr = json::array();
      for (AvatarIndex i : r) arr.push_back(dataset.registry.name(i));
      return arr;
    };
    obj["red"] = names(m.red);
    obj["blue"] = names(m.blue);
    obj["win"] = m.outcome == 1 ? "red" : "blue";
    out << obj.dump() << '\n';
  }
}

void write_matches_jsonl(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw DataError(fmt::format("cannot write {}", path.string()));
  }
  write_matches_jsonl(dataset, out);
}

std::vector<FoldSplit> kfold_split(std::size_t num_matches, std::size_t folds, std::uint64_t seed) {
  if (folds < 3) {
    throw ContractError("k-fold splitting needs at least 3 folds");
  }
  if (num_matches < folds) {
    throw ContractError(fmt::format("{} matches cannot be split into {} folds", num_matches, folds));
  }
  std::vector<std::size_t> perm(num_matches);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);

  // The first (Z mod folds) chunks get one extra element.
  std::vector<std::vector<std::size_t>> chunks(folds);
  const std::size_t base = num_matches / folds;
  const std::size_t extra = num_matches % folds;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t len = base + (f < extra ? 1 : 0);
    chunks[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                     perm.begin() + static_cast<std::ptrdiff_t>(pos + len));
    std::sort(chunks[f].begin(), chunks[f].end());
    pos += len;
  }

  std::vector<FoldSplit> splits(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t v = (f + 1) % folds;
    splits[f].test = chunks[f];
    splits[f].validation = chunks[v];
    for (std::size_t g = 0; g < folds; ++g) {
      if (g != f && g != v) {
        splits[f].train.insert(splits[f].train.end(), chunks[g].begin(), chunks[g].end());
      }
    }
    std::sort(splits[f].train.begin(), splits[f].train.end());
  }
  return splits;
}

void SyntheticSpec::validate() const {
  if (n_avatars < 10) throw ContractError("synthetic data needs at least 10 avatars");
  if (latent_dim < 1) throw ContractError("latent_dim must be >= 1");
  if (!(embedding_scale >= 0.0) || !(matrix_scale >= 0.0) || !(bias_scale >= 0.0)) {
    throw ContractError("synthetic scales must be >= 0");
  }
}

AvatarRegistry synthetic_registry(std::size_t n_avatars) {
  std::vector<std::string> names;
  names.reserve(n_avatars);
  for (std::size_t i = 0; i < n_avatars; ++i) {
    names.push_back(fmt::format("avatar_{:02}", i));
  }
  return AvatarRegistry(std::move(names));
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  SyntheticData out;
  ModelParams& truth = out.truth;
  truth = ModelParams::zeros(synthetic_registry(spec.n_avatars), spec.latent_dim);
  const double matrix_sd = spec.matrix_scale / static_cast<double>(spec.latent_dim);
  auto fill = [&](auto& block, double sd) {
    for (Eigen::Index r = 0; r < block.rows(); ++r) {
      for (Eigen::Index c = 0; c < block.cols(); ++c) {
        block(r, c) = sd * normal(rng);
      }
    }
  };
  fill(truth.embeddings, spec.embedding_scale);
  fill(truth.synergy, matrix_sd);
  fill(truth.opposition, matrix_sd);
  fill(truth.bias, spec.bias_scale);

  out.dataset.registry = truth.registry;
  out.dataset.matches.reserve(spec.n_matches);
  std::vector<AvatarIndex> pool(spec.n_avatars);
  std::iota(pool.begin(), pool.end(), AvatarIndex{0});
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t z = 0; z < spec.n_matches; ++z) {
    // Partial Fisher-Yates: the first ten slots become a uniform sample.
    for (std::size_t s = 0; s < 2 * kTeamSize; ++s) {
      std::uniform_int_distribution<std::size_t> pick(s, pool.size() - 1);
      std::swap(pool[s], pool[pick(rng)]);
    }
    MatchRecord m;
    m.red = Roster(std::vector<AvatarIndex>(pool.begin(), pool.begin() + kTeamSize));
    m.blue = Roster(std::vector<AvatarIndex>(pool.begin() + kTeamSize, pool.begin() + 2 * kTeamSize));
    const double p = win_probability(truth, m.red, m.blue);
    m.outcome = unit(rng) < p ? 1 : 0;
    out.dataset.matches.push_back(std::move(m));
  }
  return out;
}

double bayes_auc(const ModelParams& truth, const Dataset& matches) {
  std::vector<double> scores;
  std::vector<int> labels;
  scores.reserve(matches.size());
  labels.reserve(matches.size());
  for (const auto& m : matches.matches) {
    scores.push_back(match_logit(truth, m.red, m.blue));
    labels.push_back(m.outcome);
  }
  return auc(scores, labels);
}

}  // namespace gae
