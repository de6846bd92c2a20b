#include "gae/cli.hpp"

#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "gae/data.hpp"
#include "gae/error.hpp"
#include "gae/evaluation.hpp"
#include "gae/model_io.hpp"
#include "gae/recommend.hpp"
#include "gae/service.hpp"
#include "gae/training.hpp"

namespace gae::cli {
namespace {

using nlohmann::json;

enum class OutputFormat { table, csv };

const std::map<std::string, OutputFormat> kOutputFormats = {{"table", OutputFormat::table},
                                                            {"csv", OutputFormat::csv}};

void add_format_flag(CLI::App* cmd, OutputFormat& format) {
  cmd->add_option("--format", format, "Output format: table or csv")
      ->transform(CLI::CheckedTransformer(kOutputFormats))
      ->capture_default_str();
}

/// Quotes a csv field when needed.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<AvatarIndex> resolve(const AvatarRegistry& registry, const std::vector<std::string>& names) {
  std::vector<AvatarIndex> out;
  std::vector<std::string> unknown;
  for (const auto& n : names) {
    if (auto idx = registry.find(n)) {
      out.push_back(*idx);
    } else {
      unknown.push_back(n);
    }
  }
  if (!unknown.empty()) {
    throw ContractError(fmt::format("unknown avatar(s): {}", fmt::join(unknown, ", ")));
  }
  return out;
}

LoadResult load_reporting(const std::string& path, const std::string& format, std::ostream& err) {
  auto result = load_matches(path, parse_match_format(format));
  if (!result.rejected.empty()) {
    err << fmt::format("{}: rejected {} record(s)\n", path, result.rejected.size());
    for (std::size_t i = 0; i < std::min<std::size_t>(result.rejected.size(), 10); ++i) {
      err << fmt::format("  line {}: {}\n", result.rejected[i].line, result.rejected[i].reason);
    }
  }
  if (result.dataset.empty()) {
    throw DataError(fmt::format("{} contains no valid matches", path));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Grid files for `eval`

template <typename T>
void read_field(const json& obj, const char* key, T& value) {
  if (auto it = obj.find(key); it != obj.end()) value = it->get<T>();
}

template <typename Config>
void reject_unknown_keys(const json& obj, std::initializer_list<const char*> known, const char* kind) {
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      throw DataError(fmt::format("grid: unknown {} hyperparameter \"{}\"", kind, key));
    }
  }
}

ModelConfig grid_point(ModelKind kind, const json& obj) {
  if (!obj.is_object()) throw DataError("grid: every point must be a JSON object");
  switch (kind) {
    case ModelKind::gae: {
      reject_unknown_keys<TrainConfig>(obj, {"dim", "lr", "eps", "batch", "epochs", "l2", "init_scale", "seed"}, "gae");
      TrainConfig c;
      read_field(obj, "dim", c.latent_dim);
      read_field(obj, "lr", c.learning_rate);
      read_field(obj, "eps", c.adagrad_epsilon);
      read_field(obj, "batch", c.batch_size);
      read_field(obj, "epochs", c.epochs);
      read_field(obj, "l2", c.l2_lambda);
      read_field(obj, "seed", c.seed);
      if (obj.contains("init_scale")) c.init_scale = obj["init_scale"].get<double>();
      return c;
    }
    case ModelKind::lr: {
      reject_unknown_keys<LogisticConfig>(obj, {"l2", "lr", "decay", "batch", "epochs", "seed"}, "lr");
      LogisticConfig c;
      read_field(obj, "l2", c.l2);
      read_field(obj, "lr", c.learning_rate);
      read_field(obj, "decay", c.decay);
      read_field(obj, "batch", c.batch_size);
      read_field(obj, "epochs", c.epochs);
      read_field(obj, "seed", c.seed);
      return c;
    }
    case ModelKind::fm: {
      reject_unknown_keys<FmConfig>(obj, {"factors", "lr", "eps", "batch", "epochs", "l2", "init_scale", "seed"}, "fm");
      FmConfig c;
      read_field(obj, "factors", c.factors);
      read_field(obj, "lr", c.learning_rate);
      read_field(obj, "eps", c.adagrad_epsilon);
      read_field(obj, "batch", c.batch_size);
      read_field(obj, "epochs", c.epochs);
      read_field(obj, "l2", c.l2);
      read_field(obj, "seed", c.seed);
      if (obj.contains("init_scale")) c.init_scale = obj["init_scale"].get<double>();
      return c;
    }
    case ModelKind::winratio:
      break;
  }
  throw DataError(fmt::format("model kind {} cannot be cross-validated", to_string(kind)));
}

std::vector<ModelConfig> load_grid(const std::string& path, ModelKind kind) {
  json root = json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw DataError(fmt::format("cannot open grid file {}", path));
    try {
      root = json::parse(in);
    } catch (const json::exception& e) {
      throw DataError(fmt::format("grid file {}: {}", path, e.what()));
    }
  }
  const auto key = std::string(to_string(kind));
  std::vector<ModelConfig> grid;
  try {
    if (!root.contains(key)) {
      grid.push_back(grid_point(kind, json::object()));
    } else if (root[key].is_array()) {
      for (const auto& point : root[key]) grid.push_back(grid_point(kind, point));
    } else {
      grid.push_back(grid_point(kind, root[key]));
    }
  } catch (const json::exception& e) {
    throw DataError(fmt::format("grid file {}: {}", path, e.what()));
  }
  if (grid.empty()) throw DataError(fmt::format("grid for {} is empty", key));
  return grid;
}

// ---------------------------------------------------------------------------

void print_recommendations(std::ostream& out, const ModelParams& model,
                           const std::vector<Recommendation>& recs, OutputFormat format) {
  const auto& reg = model.registry;
  auto familiar_names = [&](const Recommendation& r) {
    std::vector<std::string> names;
    for (const auto& s : r.similar_familiar) names.push_back(reg.name(s.avatar));
    return names;
  };
  if (format == OutputFormat::csv) {
    out << "rank,avatar,win_probability,logit,bias,synergy,opposition,similar_familiar\n";
    for (std::size_t k = 0; k < recs.size(); ++k) {
      const auto& r = recs[k];
      out << fmt::format("{},{},{},{},{},{},{},{}\n", k + 1, csv_field(reg.name(r.avatar)),
                         r.win_probability, r.logit, r.bias, r.synergy, r.opposition,
                         csv_field(fmt::format("{}", fmt::join(familiar_names(r), ";"))));
    }
    return;
  }
  out << fmt::format("{:>4}  {:<20} {:>8} {:>9} {:>9} {:>10}  {}\n", "rank", "avatar", "p_win",
                     "bias", "synergy", "opposition", "similar familiar");
  for (std::size_t k = 0; k < recs.size(); ++k) {
    const auto& r = recs[k];
    out << fmt::format("{:>4}  {:<20} {:>8.4f} {:>+9.4f} {:>+9.4f} {:>+10.4f}  {}\n", k + 1,
                       reg.name(r.avatar), r.win_probability, r.bias, r.synergy, r.opposition,
                       fmt::join(familiar_names(r), ", "));
  }
}

struct Options {
  // shared
  std::string model_path;
  OutputFormat format = OutputFormat::table;
  // train
  std::string data_path, data_format = "jsonl", valid_path, out_path;
  TrainConfig train;
  double init_scale = -1.0;
  // eval
  std::vector<std::string> model_kinds{"gae", "lr", "fm"};
  std::string grid_path, report_path;
  std::size_t folds = 10;
  std::uint64_t eval_seed = 1;
  // predict
  std::vector<std::string> red, blue;
  // similar / pair
  std::string avatar, pair_a, pair_b;
  std::size_t top_k = 5, sim_k = 3;
  // recommend
  std::vector<std::string> ally, enemy, pool, familiar;
  // synth
  SyntheticSpec synth;
  std::string truth_path;
  // gradcheck
  std::size_t gc_avatars = 10, gc_dim = 4, gc_batch = 8;
  double gc_step = 1e-5, gc_tolerance = 1e-5, gc_init = 0.5, gc_l2 = 0.0;
  std::uint64_t gc_seed = 1;
  // serve
  ServiceConfig service;
};

int cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
  TrainConfig config = o.train;
  if (o.init_scale >= 0.0) config.init_scale = o.init_scale;
  const auto train_data = load_reporting(o.data_path, o.data_format, err).dataset;
  std::optional<Dataset> validation;
  if (!o.valid_path.empty()) {
    // Validation names must index the training registry.
    auto raw = load_reporting(o.valid_path, o.data_format, err).dataset;
    Dataset v;
    v.registry = train_data.registry;
    for (const auto& m : raw.matches) {
      MatchRecord r;
      auto remap = [&](const Roster& roster) {
        std::vector<std::string> names;
        for (AvatarIndex i : roster) names.push_back(raw.registry.name(i));
        return Roster(resolve(train_data.registry, names));
      };
      r.red = remap(m.red);
      r.blue = remap(m.blue);
      r.outcome = m.outcome;
      v.matches.push_back(std::move(r));
    }
    validation = std::move(v);
  }
  const auto result = train(config, train_data, validation ? &*validation : nullptr);
  if (o.format == OutputFormat::csv) {
    out << "epoch,loss,penalized_loss,validation_auc\n";
  } else {
    out << fmt::format("{:>6} {:>12} {:>14} {:>14}\n", "epoch", "loss", "penalized_loss", "validation_auc");
  }
  for (const auto& e : result.history) {
    const std::string v = e.validation_auc ? fmt::format("{:.6f}", *e.validation_auc) : "-";
    if (o.format == OutputFormat::csv) {
      out << fmt::format("{},{},{},{}\n", e.epoch, e.train_loss.data, e.train_loss.penalized,
                         e.validation_auc ? fmt::format("{}", *e.validation_auc) : "");
    } else {
      out << fmt::format("{:>6} {:>12.6f} {:>14.6f} {:>14}\n", e.epoch, e.train_loss.data,
                         e.train_loss.penalized, v);
    }
  }
  save_model(result.params, std::filesystem::path(o.out_path));
  err << fmt::format("wrote {} (epoch {}, N = {}, K = {})\n", o.out_path, result.selected_epoch,
                     result.params.num_avatars(), result.params.latent_dim());
  return kOk;
}

int cmd_eval(const Options& o, std::ostream& out, std::ostream& err) {
  const auto data = load_reporting(o.data_path, o.data_format, err).dataset;
  if (o.folds > data.size()) {
    throw DataError(fmt::format("{} folds requested but only {} matches", o.folds, data.size()));
  }
  std::vector<FoldResult> all;
  for (const auto& name : o.model_kinds) {
    const ModelKind kind = parse_model_kind(name);
    const auto grid = load_grid(o.grid_path, kind);
    err << fmt::format("cross-validating {} ({} grid point(s), {} folds)\n", name, grid.size(), o.folds);
    auto results = cross_validate(data, grid, o.folds, o.eval_seed);
    all.insert(all.end(), results.begin(), results.end());
  }
  if (!o.report_path.empty()) {
    std::ofstream csv(o.report_path, std::ios::binary);
    if (!csv) throw DataError(fmt::format("cannot write {}", o.report_path));
    write_benchmark_csv(all, csv);
  }
  if (o.format == OutputFormat::csv) {
    write_benchmark_csv(all, out);
  } else {
    out << benchmark_summary(all);
  }
  return kOk;
}

int cmd_predict(const Options& o, std::ostream& out) {
  const auto model = load_embedding_model(o.model_path);
  const Roster red(resolve(model.registry, o.red));
  const Roster blue(resolve(model.registry, o.blue));
  if (red.empty() || blue.empty()) throw ContractError("both --red and --blue need at least one avatar");
  const double p = win_probability(model, red, blue);
  if (o.format == OutputFormat::csv) {
    out << "p_red_win\n" << fmt::format("{}\n", p);
  } else {
    out << fmt::format("p_red_win {}\n", p);
  }
  return kOk;
}

int cmd_similar(const Options& o, std::ostream& out) {
  const auto model = load_embedding_model(o.model_path);
  const AvatarIndex i = model.registry.at(o.avatar);
  const auto list = similar_avatars(model, i, o.top_k);
  if (o.format == OutputFormat::csv) {
    out << "rank,avatar,score\n";
    for (std::size_t k = 0; k < list.size(); ++k) {
      out << fmt::format("{},{},{}\n", k + 1, csv_field(model.registry.name(list[k].avatar)), list[k].score);
    }
  } else {
    out << fmt::format("avatars most similar to {}\n", o.avatar);
    for (std::size_t k = 0; k < list.size(); ++k) {
      out << fmt::format("{:>4}  {:<24} {:>9.6f}\n", k + 1, model.registry.name(list[k].avatar), list[k].score);
    }
  }
  return kOk;
}

int cmd_pair(const Options& o, std::ostream& out) {
  const auto model = load_embedding_model(o.model_path);
  const auto e = explain_pair(model, model.registry.at(o.pair_a), model.registry.at(o.pair_b));
  if (o.format == OutputFormat::csv) {
    out << "synergy,opposition,similarity\n" << fmt::format("{},{},{}\n", e.synergy, e.opposition, e.similarity);
  } else {
    out << fmt::format("synergy     {}\nopposition  {}\nsimilarity  {}\n", e.synergy, e.opposition, e.similarity);
  }
  return kOk;
}

int cmd_recommend(const Options& o, std::ostream& out) {
  const auto model = load_embedding_model(o.model_path);
  DraftState draft;
  draft.ally = Roster(resolve(model.registry, o.ally));
  draft.enemy = Roster(resolve(model.registry, o.enemy));
  if (!o.pool.empty()) draft.pool = resolve(model.registry, o.pool);
  if (o.familiar.empty()) {
    print_recommendations(out, model, recommend_pick(model, draft, o.top_k), o.format);
    return kOk;
  }
  draft.familiar = resolve(model.registry, o.familiar);
  const auto result = recommend_with_familiarity(model, draft, o.top_k, o.sim_k);
  print_recommendations(out, model, result.picks, o.format);
  if (o.format == OutputFormat::table) {
    if (result.familiar_best) {
      const auto& b = *result.familiar_best;
      out << fmt::format("\nbest familiar pick: {} (p_win {:.4f})\n", model.registry.name(b.avatar),
                         b.win_probability);
    } else {
      out << "\nno familiar avatar is available to pick\n";
    }
  }
  return kOk;
}

int cmd_synth(const Options& o, std::ostream& out) {
  const auto data = generate_synthetic(o.synth);
  write_matches_jsonl(data.dataset, std::filesystem::path(o.out_path));
  if (!o.truth_path.empty()) {
    save_model(data.truth, std::filesystem::path(o.truth_path));
  }
  out << fmt::format("wrote {} matches over {} avatars to {}\n", data.dataset.size(),
                     data.dataset.registry.size(), o.out_path);
  out << fmt::format("ground-truth AUC {:.6f}\n", bayes_auc(data.truth, data.dataset));
  return kOk;
}

int cmd_gradcheck(const Options& o, std::ostream& out) {
  SyntheticSpec spec;
  spec.n_avatars = std::max<std::size_t>(o.gc_avatars, 10);
  spec.latent_dim = o.gc_dim;
  spec.n_matches = o.gc_batch;
  spec.seed = o.gc_seed;
  const auto batch = generate_synthetic(spec).dataset;
  TrainConfig config;
  config.latent_dim = o.gc_dim;
  config.init_scale = o.gc_init;
  config.seed = o.gc_seed;
  auto params = init_params(batch.registry, config);
  std::mt19937_64 rng(o.gc_seed + 1);
  std::uniform_real_distribution<double> bias(-0.5, 0.5);
  for (Eigen::Index i = 0; i < params.bias.size(); ++i) params.bias(i) = bias(rng);

  const auto report = finite_difference_check(params, batch.matches, o.gc_step, o.gc_l2);
  const bool ok = report.max_rel() < o.gc_tolerance;
  if (o.format == OutputFormat::csv) {
    out << "block,max_abs_error,max_rel_error\n";
  } else {
    out << fmt::format("{:<12} {:>14} {:>14}\n", "block", "max_abs_error", "max_rel_error");
  }
  auto row = [&](const char* name, const BlockError& e) {
    out << (o.format == OutputFormat::csv ? fmt::format("{},{},{}\n", name, e.max_abs, e.max_rel)
                                          : fmt::format("{:<12} {:>14.3e} {:>14.3e}\n", name, e.max_abs, e.max_rel));
  };
  row("embeddings", report.embeddings);
  row("synergy", report.synergy);
  row("opposition", report.opposition);
  row("bias", report.bias);
  if (o.format == OutputFormat::table) {
    out << fmt::format("max relative error {:.3e} ({} tolerance {:.1e})\n", report.max_rel(),
                       ok ? "within" : "EXCEEDS", o.gc_tolerance);
  }
  return ok ? kOk : kNumericalFailure;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Avatar embedding toolkit: learn synergy/opposition embeddings from 5v5 match "
               "outcomes, predict matches and answer draft queries."};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");
  Options o;

  auto* train_cmd = app.add_subcommand("train", "Train an embedding model with mini-batch AdaGrad");
  train_cmd->add_option("--data", o.data_path, "Training matches")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--data-format", o.data_format, "Match file format: jsonl or csv")
      ->check(CLI::IsMember({"jsonl", "csv"}))->capture_default_str();
  train_cmd->add_option("--dim", o.train.latent_dim, "Latent dimension K")->capture_default_str();
  train_cmd->add_option("--lr", o.train.learning_rate, "AdaGrad learning rate")->capture_default_str();
  train_cmd->add_option("--eps", o.train.adagrad_epsilon, "AdaGrad epsilon")->capture_default_str();
  train_cmd->add_option("--epochs", o.train.epochs, "Number of epochs")->capture_default_str();
  train_cmd->add_option("--batch", o.train.batch_size, "Mini-batch size")->capture_default_str();
  train_cmd->add_option("--l2", o.train.l2_lambda, "L2 penalty strength")->capture_default_str();
  train_cmd->add_option("--init-scale", o.init_scale, "Uniform init half-width (negative: 0.1/sqrt(K))")
      ->capture_default_str();
  train_cmd->add_option("--seed", o.train.seed, "Random seed")->capture_default_str();
  train_cmd->add_option("--out", o.out_path, "Model file to write")->required();
  train_cmd->add_option("--valid", o.valid_path, "Validation matches (selects the best epoch by AUC)")
      ->check(CLI::ExistingFile);
  add_format_flag(train_cmd, o.format);

  auto* eval_cmd = app.add_subcommand("eval", "Cross-validated benchmark with paired t-tests");
  eval_cmd->add_option("--data", o.data_path, "Matches to cross-validate on")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--data-format", o.data_format, "Match file format: jsonl or csv")
      ->check(CLI::IsMember({"jsonl", "csv"}))->capture_default_str();
  eval_cmd->add_option("--model-kind", o.model_kinds, "Model kinds to benchmark (gae, lr, fm)")
      ->delimiter(',')->check(CLI::IsMember({"gae", "lr", "fm"}))->capture_default_str();
  eval_cmd->add_option("--grid", o.grid_path,
                       "JSON grid file: {\"gae\":[{...}], \"lr\":[...], \"fm\":[...]}; kinds left out use defaults")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--folds", o.folds, "Number of folds")->capture_default_str();
  eval_cmd->add_option("--seed", o.eval_seed, "Fold assignment seed")->capture_default_str();
  eval_cmd->add_option("--report", o.report_path, "Benchmark csv to write");
  add_format_flag(eval_cmd, o.format);

  auto* predict_cmd = app.add_subcommand("predict", "Win probability of red against blue");
  predict_cmd->add_option("--model", o.model_path, "Model file")->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--red", o.red, "Red roster, comma separated")->required()->delimiter(',');
  predict_cmd->add_option("--blue", o.blue, "Blue roster, comma separated")->required()->delimiter(',');
  add_format_flag(predict_cmd, o.format);

  auto* similar_cmd = app.add_subcommand("similar", "Avatars closest to one avatar by embedding cosine");
  similar_cmd->add_option("--model", o.model_path, "Model file")->required()->check(CLI::ExistingFile);
  similar_cmd->add_option("--avatar", o.avatar, "Query avatar")->required();
  similar_cmd->add_option("--top-k", o.top_k, "Number of results")->capture_default_str()->check(CLI::PositiveNumber);
  add_format_flag(similar_cmd, o.format);

  auto* pair_cmd = app.add_subcommand("pair", "Synergy, opposition and similarity of two avatars");
  pair_cmd->add_option("--model", o.model_path, "Model file")->required()->check(CLI::ExistingFile);
  pair_cmd->add_option("--a", o.pair_a, "First avatar")->required();
  pair_cmd->add_option("--b", o.pair_b, "Second avatar")->required();
  add_format_flag(pair_cmd, o.format);

  auto* rec_cmd = app.add_subcommand("recommend", "Rank candidate picks for the ally team");
  rec_cmd->add_option("--model", o.model_path, "Model file")->required()->check(CLI::ExistingFile);
  rec_cmd->add_option("--ally", o.ally, "Ally picks so far (0-4), comma separated")->delimiter(',');
  rec_cmd->add_option("--enemy", o.enemy, "Enemy picks so far (0-5), comma separated")->delimiter(',');
  rec_cmd->add_option("--pool", o.pool, "Candidate avatars (default: every unpicked avatar)")->delimiter(',');
  rec_cmd->add_option("--familiar", o.familiar, "Avatars the player is comfortable with")->delimiter(',');
  rec_cmd->add_option("--top-k", o.top_k, "Number of recommendations")->capture_default_str()->check(CLI::PositiveNumber);
  rec_cmd->add_option("--sim-k", o.sim_k, "Familiar avatars listed per recommendation")->capture_default_str()->check(CLI::PositiveNumber);
  add_format_flag(rec_cmd, o.format);

  auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic matches from a random ground truth");
  synth_cmd->add_option("--avatars", o.synth.n_avatars, "Number of avatars (>= 10)")->capture_default_str();
  synth_cmd->add_option("--dim", o.synth.latent_dim, "Ground-truth latent dimension")->capture_default_str();
  synth_cmd->add_option("--embedding-scale", o.synth.embedding_scale, "Std. dev. of embedding entries")->capture_default_str();
  synth_cmd->add_option("--matrix-scale", o.synth.matrix_scale, "Std. dev. of P and Q entries times K")->capture_default_str();
  synth_cmd->add_option("--bias-scale", o.synth.bias_scale, "Std. dev. of biases")->capture_default_str();
  synth_cmd->add_option("--matches", o.synth.n_matches, "Number of matches")->capture_default_str();
  synth_cmd->add_option("--seed", o.synth.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--out", o.out_path, "jsonl file to write")->required();
  synth_cmd->add_option("--truth", o.truth_path, "Also write the ground truth as a model file");

  auto* gc_cmd = app.add_subcommand("gradcheck", "Compare analytic gradients with central differences");
  gc_cmd->add_option("--avatars", o.gc_avatars, "Number of avatars (>= 10)")->capture_default_str();
  gc_cmd->add_option("--dim", o.gc_dim, "Latent dimension")->capture_default_str();
  gc_cmd->add_option("--batch", o.gc_batch, "Matches in the batch")->capture_default_str();
  gc_cmd->add_option("--step", o.gc_step, "Finite-difference step")->capture_default_str();
  gc_cmd->add_option("--tolerance", o.gc_tolerance, "Maximum allowed relative error")->capture_default_str();
  gc_cmd->add_option("--init-scale", o.gc_init, "Uniform init half-width of the random model")->capture_default_str();
  gc_cmd->add_option("--l2", o.gc_l2, "L2 penalty included in the objective")->capture_default_str();
  gc_cmd->add_option("--seed", o.gc_seed, "Random seed")->capture_default_str();
  add_format_flag(gc_cmd, o.format);

  auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP API over a trained model");
  serve_cmd->add_option("--model", o.service.model_path, "Model file")->required()->check(CLI::ExistingFile);
  serve_cmd->add_option("--host", o.service.host, "Bind address")->capture_default_str();
  serve_cmd->add_option("--port", o.service.port, "Port")->capture_default_str()->check(CLI::Range(1, 65535));
  serve_cmd->add_flag("--log", o.service.log_requests, "Log every request to stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(o, out, err);
    if (eval_cmd->parsed()) return cmd_eval(o, out, err);
    if (predict_cmd->parsed()) return cmd_predict(o, out);
    if (similar_cmd->parsed()) return cmd_similar(o, out);
    if (pair_cmd->parsed()) return cmd_pair(o, out);
    if (rec_cmd->parsed()) return cmd_recommend(o, out);
    if (synth_cmd->parsed()) return cmd_synth(o, out);
    if (gc_cmd->parsed()) return cmd_gradcheck(o, out);
    if (serve_cmd->parsed()) {
      if (!run_service(o.service)) {
        err << fmt::format("error: cannot listen on {}:{}\n", o.service.host, o.service.port);
        return kDataError;
      }
      return kOk;
    }
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const ContractError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsageError;
}

}  // namespace gae::cli
