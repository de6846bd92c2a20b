#include "gae/model_io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "csv.hpp"
#include "gae/error.hpp"

namespace gae {
namespace {

constexpr std::string_view kMagic = "gae-model-file";

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// ---------------------------------------------------------------------------
// Writing

template <typename Block>
void write_matrix(std::ostream& out, std::string_view name, const Block& m) {
  out << fmt::format("matrix {} {} {}\n", name, m.rows(), m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out << (c == 0 ? "" : " ") << fmt::format("{}", m(r, c));
    }
    out << '\n';
  }
}

void write_vector(std::ostream& out, std::string_view name, const Vector& v) {
  out << fmt::format("vector {} {}\n", name, v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out << (i == 0 ? "" : " ") << fmt::format("{}", v(i));
  }
  out << '\n';
}

void write_header(std::ostream& out, ModelKind kind, const AvatarRegistry& registry) {
  out << kMagic << '\n';
  out << "format_version " << kModelFormatVersion << '\n';
  out << "kind " << to_string(kind) << '\n';
  out << "avatars " << registry.size() << '\n';
  for (const auto& name : registry.names()) {
    if (name.find_first_of("\r\n") != std::string::npos || detail::trim(name) != name) {
      throw ContractError(fmt::format("avatar name \"{}\" cannot be stored in a model file", name));
    }
    out << name << '\n';
  }
}

// ---------------------------------------------------------------------------
// Reading

struct Block {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::vector<double> values;  // row-major
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string next_line() {
    std::string text;
    if (!std::getline(in_, text)) {
      throw DataError(fmt::format("model file: unexpected end of file after line {}", line_));
    }
    ++line_;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    return text;
  }

  bool at_end() {
    while (in_.peek() == '\n' || in_.peek() == '\r') {
      in_.get();
      ++line_;
    }
    return in_.peek() == std::char_traits<char>::eof();
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError(fmt::format("model file line {}: {}", line_, what));
  }

  std::vector<std::string_view> words(std::string_view text) const {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < text.size()) {
      while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
      const std::size_t start = i;
      while (i < text.size() && text[i] != ' ' && text[i] != '\t') ++i;
      if (i > start) out.push_back(text.substr(start, i - start));
    }
    return out;
  }

  double parse_real(std::string_view word) const {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), v);
    if (ec != std::errc() || ptr != word.data() + word.size()) {
      fail(fmt::format("\"{}\" is not a number", word));
    }
    return v;
  }

  long long parse_count(std::string_view word) const {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), v);
    if (ec != std::errc() || ptr != word.data() + word.size() || v < 0) {
      fail(fmt::format("\"{}\" is not a non-negative integer", word));
    }
    return v;
  }

  std::string_view expect_key(std::string_view text, std::string_view key) const {
    if (text.size() <= key.size() || text.substr(0, key.size()) != key || text[key.size()] != ' ') {
      fail(fmt::format("expected \"{} ...\"", key));
    }
    return detail::trim(text.substr(key.size() + 1));
  }

  std::vector<double> read_row(Eigen::Index expected) {
    const std::string text = next_line();
    const auto w = words(text);
    if (static_cast<Eigen::Index>(w.size()) != expected) {
      fail(fmt::format("expected {} values, found {}", expected, w.size()));
    }
    std::vector<double> out;
    out.reserve(w.size());
    for (auto word : w) out.push_back(parse_real(word));
    return out;
  }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

struct ParsedFile {
  ModelKind kind = ModelKind::gae;
  AvatarRegistry registry;
  std::map<std::string, Block, std::less<>> blocks;
  std::map<std::string, double, std::less<>> scalars;
};

ParsedFile parse(std::istream& in) {
  Reader reader(in);
  ParsedFile file;
  if (reader.next_line() != kMagic) {
    reader.fail("not a model file (missing \"gae-model-file\")");
  }
  const auto version = reader.parse_count(reader.expect_key(reader.next_line(), "format_version"));
  if (version != kModelFormatVersion) {
    reader.fail(fmt::format("unsupported format_version {}", version));
  }
  try {
    file.kind = parse_model_kind(reader.expect_key(reader.next_line(), "kind"));
  } catch (const ContractError& e) {
    reader.fail(e.what());
  }
  const auto n = reader.parse_count(reader.expect_key(reader.next_line(), "avatars"));
  std::vector<std::string> names;
  for (long long i = 0; i < n; ++i) names.push_back(reader.next_line());
  try {
    file.registry = AvatarRegistry(std::move(names));
  } catch (const ContractError& e) {
    reader.fail(e.what());
  }

  while (!reader.at_end()) {
    const std::string text = reader.next_line();
    const auto w = reader.words(text);
    if (w.size() == 3 && w[0] == "scalar") {
      file.scalars[std::string(w[1])] = reader.parse_real(w[2]);
    } else if (w.size() == 3 && w[0] == "vector") {
      Block b;
      b.rows = reader.parse_count(w[2]);
      b.cols = 1;
      b.values = reader.read_row(b.rows);
      file.blocks[std::string(w[1])] = std::move(b);
    } else if (w.size() == 4 && w[0] == "matrix") {
      Block b;
      b.rows = reader.parse_count(w[2]);
      b.cols = reader.parse_count(w[3]);
      for (Eigen::Index r = 0; r < b.rows; ++r) {
        auto row = reader.read_row(b.cols);
        b.values.insert(b.values.end(), row.begin(), row.end());
      }
      file.blocks[std::string(w[1])] = std::move(b);
    } else {
      reader.fail(fmt::format("unrecognised block header \"{}\"", text));
    }
  }
  return file;
}

const Block& block(const ParsedFile& file, std::string_view name, Eigen::Index rows, Eigen::Index cols) {
  auto it = file.blocks.find(name);
  if (it == file.blocks.end()) {
    throw DataError(fmt::format("model file: missing block \"{}\"", name));
  }
  if (it->second.rows != rows || (cols >= 0 && it->second.cols != cols)) {
    throw DataError(fmt::format("model file: block \"{}\" is {} x {}, expected {} x {}", name,
                                it->second.rows, it->second.cols, rows, cols < 0 ? "K" : std::to_string(cols)));
  }
  return it->second;
}

template <typename Out>
Out to_matrix(const Block& b) {
  Out m(b.rows, b.cols);
  for (Eigen::Index r = 0; r < b.rows; ++r) {
    for (Eigen::Index c = 0; c < b.cols; ++c) {
      m(r, c) = static_cast<typename Out::Scalar>(b.values[static_cast<std::size_t>(r * b.cols + c)]);
    }
  }
  return m;
}

Vector to_vector(const Block& b) {
  return Eigen::Map<const Vector>(b.values.data(), b.rows);
}

double scalar(const ParsedFile& file, std::string_view name) {
  auto it = file.scalars.find(name);
  if (it == file.scalars.end()) {
    throw DataError(fmt::format("model file: missing scalar \"{}\"", name));
  }
  return it->second;
}

template <typename Model>
Model validated(Model model) {
  try {
    model.validate();
  } catch (const ContractError& e) {
    throw DataError(fmt::format("model file: {}", e.what()));
  }
  return model;
}

StoredModel assemble(const ParsedFile& file) {
  const auto n = static_cast<Eigen::Index>(file.registry.size());
  switch (file.kind) {
    case ModelKind::gae: {
      ModelParams p;
      p.registry = file.registry;
      const auto& emb = block(file, "embeddings", n, -1);
      const Eigen::Index k = emb.cols;
      p.embeddings = to_matrix<RowMatrix>(emb);
      p.synergy = to_matrix<Matrix>(block(file, "synergy", k, k));
      p.opposition = to_matrix<Matrix>(block(file, "opposition", k, k));
      p.bias = to_vector(block(file, "bias", n, 1));
      return validated(std::move(p));
    }
    case ModelKind::lr: {
      LogisticModel m;
      m.registry = file.registry;
      m.weights = to_vector(block(file, "weights", 2 * n, 1));
      m.intercept = scalar(file, "intercept");
      return validated(std::move(m));
    }
    case ModelKind::fm: {
      FMParams fm;
      fm.registry = file.registry;
      fm.intercept = scalar(file, "intercept");
      fm.linear = to_vector(block(file, "linear", 2 * n, 1));
      fm.factors = to_matrix<RowMatrix>(block(file, "factors", 2 * n, -1));
      return validated(std::move(fm));
    }
    case ModelKind::winratio: {
      WinRatioMatrix w;
      w.registry = file.registry;
      w.ratio = to_matrix<Matrix>(block(file, "ratio", n, 2 * n));
      w.counts = to_matrix<CountMatrix>(block(file, "counts", n, 2 * n));
      return validated(std::move(w));
    }
  }
  throw DataError("model file: unsupported kind");
}

}  // namespace

ModelKind kind_of(const StoredModel& model) {
  return std::visit(overloaded{[](const ModelParams&) { return ModelKind::gae; },
                               [](const LogisticModel&) { return ModelKind::lr; },
                               [](const FMParams&) { return ModelKind::fm; },
                               [](const WinRatioMatrix&) { return ModelKind::winratio; }},
                    model);
}

void save_model(const StoredModel& model, std::ostream& out) {
  std::visit(overloaded{
                 [&](const ModelParams& p) {
                   p.validate();
                   write_header(out, ModelKind::gae, p.registry);
                   write_matrix(out, "embeddings", p.embeddings);
                   write_matrix(out, "synergy", p.synergy);
                   write_matrix(out, "opposition", p.opposition);
                   write_vector(out, "bias", p.bias);
                 },
                 [&](const LogisticModel& m) {
                   m.validate();
                   write_header(out, ModelKind::lr, m.registry);
                   write_vector(out, "weights", m.weights);
                   out << fmt::format("scalar intercept {}\n", m.intercept);
                 },
                 [&](const FMParams& fm) {
                   fm.validate();
                   write_header(out, ModelKind::fm, fm.registry);
                   out << fmt::format("scalar intercept {}\n", fm.intercept);
                   write_vector(out, "linear", fm.linear);
                   write_matrix(out, "factors", fm.factors);
                 },
                 [&](const WinRatioMatrix& w) {
                   w.validate();
                   write_header(out, ModelKind::winratio, w.registry);
                   write_matrix(out, "ratio", w.ratio);
                   write_matrix(out, "counts", w.counts);
                 }},
             model);
}

void save_model(const StoredModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError(fmt::format("cannot write model file {}", path.string()));
  }
  save_model(model, out);
  if (!out) {
    throw DataError(fmt::format("error writing model file {}", path.string()));
  }
}

StoredModel load_model(std::istream& in) { return assemble(parse(in)); }

StoredModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError(fmt::format("cannot open model file {}", path.string()));
  }
  return load_model(in);
}

ModelParams load_embedding_model(const std::filesystem::path& path) {
  auto model = load_model(path);
  if (auto* p = std::get_if<ModelParams>(&model)) {
    return std::move(*p);
  }
  throw DataError(fmt::format("{} holds a {} model, expected gae", path.string(),
                              to_string(kind_of(model))));
}

}  // namespace gae
