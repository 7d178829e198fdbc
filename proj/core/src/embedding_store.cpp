#include "ranksim/embedding_store.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "ranksim/errors.hpp"

namespace ranksim {

bool Vocabulary::add(std::string token) {
  if (token.empty()) throw InvalidArgument("vocabulary tokens must be non-empty");
  if (index_.find(std::string_view(token)) != index_.end()) return false;
  index_.emplace(token, tokens_.size());
  tokens_.push_back(std::move(token));
  return true;
}

std::optional<std::size_t> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

EmbeddingMatrix::EmbeddingMatrix(Vocabulary vocab, std::size_t dims, std::vector<double> data,
                                 std::size_t duplicates_dropped)
    : vocab_(std::move(vocab)),
      dims_(dims),
      data_(std::move(data)),
      duplicates_dropped_(duplicates_dropped) {
  if (dims_ == 0) throw InvalidArgument("embedding dimension must be at least 1");
  if (vocab_.size() == 0) throw InvalidArgument("embedding matrix needs at least one row");
  if (data_.size() != vocab_.size() * dims_)
    throw InvalidArgument("embedding data size does not match vocab x dims");
  if (!std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); }))
    throw InvalidArgument("embedding matrix contains non-finite values");
}

std::span<const double> EmbeddingMatrix::row(std::size_t r) const {
  if (r >= rows()) throw InvalidArgument("row index out of range");
  return std::span<const double>(data_).subspan(r * dims_, dims_);
}

std::string_view to_string(EmbeddingFormat format) {
  switch (format) {
    case EmbeddingFormat::Word2VecText: return "w2v-text";
    case EmbeddingFormat::Word2VecBinary: return "w2v-bin";
    case EmbeddingFormat::GloveText: return "glove";
  }
  return "?";
}

std::optional<EmbeddingFormat> parse_embedding_format(std::string_view name) {
  if (name == "w2v-text") return EmbeddingFormat::Word2VecText;
  if (name == "w2v-bin") return EmbeddingFormat::Word2VecBinary;
  if (name == "glove") return EmbeddingFormat::GloveText;
  return std::nullopt;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::string at_line(std::size_t line_no) { return " (line " + std::to_string(line_no) + ")"; }

float parse_value(std::string_view field, std::size_t line_no) {
  float value = 0.0F;
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw ParseError("non-numeric value '" + std::string(field) + "'" + at_line(line_no));
  if (!std::isfinite(value))
    throw ParseError("non-finite value '" + std::string(field) + "'" + at_line(line_no));
  return value;
}

std::size_t parse_count(std::string_view field, std::string_view what) {
  std::size_t value = 0;
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw ParseError("bad " + std::string(what) + " in header: '" + std::string(field) + "'");
  return value;
}

struct MatrixBuilder {
  Vocabulary vocab;
  std::vector<double> data;
  std::size_t dims = 0;
  std::size_t duplicates = 0;

  template <typename Values>
  void add(std::string token, const Values& values) {
    if (!vocab.add(std::move(token))) {
      ++duplicates;
      return;
    }
    data.insert(data.end(), std::begin(values), std::end(values));
  }

  EmbeddingMatrix build() && {
    if (vocab.size() == 0) throw ParseError("embedding stream contains no vectors");
    return EmbeddingMatrix(std::move(vocab), dims, std::move(data), duplicates);
  }
};

EmbeddingMatrix load_text(std::istream& in, bool has_header) {
  MatrixBuilder builder;
  std::size_t expected_rows = 0;
  std::size_t line_no = 0;
  std::size_t records = 0;
  std::string line;
  std::vector<double> values;

  if (has_header) {
    if (!std::getline(in, line)) throw ParseError("missing word2vec header");
    ++line_no;
    strip_cr(line);
    auto header = split_fields(line);
    if (header.size() != 2) throw ParseError("word2vec header must be '<count> <dims>'");
    expected_rows = parse_count(header[0], "count");
    builder.dims = parse_count(header[1], "dims");
    if (builder.dims == 0) throw ParseError("word2vec header declares zero dimensions");
  }

  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (builder.dims == 0) {
      if (fields.size() < 2) throw ParseError("first GloVe row has no values" + at_line(line_no));
      builder.dims = fields.size() - 1;
    }
    if (fields.size() - 1 != builder.dims) {
      throw ParseError("dimension mismatch: expected " + std::to_string(builder.dims) +
                       " values, found " + std::to_string(fields.size() - 1) + at_line(line_no));
    }
    values.clear();
    for (std::size_t i = 1; i < fields.size(); ++i)
      values.push_back(static_cast<double>(parse_value(fields[i], line_no)));
    builder.add(std::string(fields[0]), values);
    ++records;
  }

  if (has_header && records != expected_rows) {
    throw ParseError("word2vec header declares " + std::to_string(expected_rows) +
                     " vectors but body has " + std::to_string(records));
  }
  return std::move(builder).build();
}

float float_from_le(const unsigned char* bytes) {
  std::uint32_t bits = 0;
  for (int i = 3; i >= 0; --i) bits = (bits << 8) | bytes[i];
  return std::bit_cast<float>(bits);
}

void float_to_le(float value, char* bytes) {
  auto bits = std::bit_cast<std::uint32_t>(value);
  for (int i = 0; i < 4; ++i) {
    bytes[i] = static_cast<char>(bits & 0xFFU);
    bits >>= 8;
  }
}

EmbeddingMatrix load_binary(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw ParseError("missing word2vec header");
  strip_cr(header);
  auto fields = split_fields(header);
  if (fields.size() != 2) throw ParseError("word2vec header must be '<count> <dims>'");

  MatrixBuilder builder;
  const std::size_t count = parse_count(fields[0], "count");
  builder.dims = parse_count(fields[1], "dims");
  if (builder.dims == 0) throw ParseError("word2vec header declares zero dimensions");

  std::vector<unsigned char> raw(builder.dims * sizeof(float));
  std::vector<double> values(builder.dims);
  for (std::size_t record = 0; record < count; ++record) {
    std::string token;
    int ch = in.get();
    while (ch == '\n' || ch == '\r') ch = in.get();
    while (ch != std::char_traits<char>::eof() && ch != ' ') {
      token.push_back(static_cast<char>(ch));
      ch = in.get();
    }
    if (ch == std::char_traits<char>::eof() || token.empty())
      throw ParseError("truncated binary record " + std::to_string(record));
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
      throw ParseError("truncated binary record " + std::to_string(record) + " ('" + token + "')");
    for (std::size_t d = 0; d < builder.dims; ++d) {
      float v = float_from_le(raw.data() + d * sizeof(float));
      if (!std::isfinite(v))
        throw ParseError("non-finite value in binary record '" + token + "'");
      values[d] = static_cast<double>(v);
    }
    builder.add(std::move(token), values);
  }
  return std::move(builder).build();
}

}  // namespace

EmbeddingMatrix load_embeddings(std::istream& in, EmbeddingFormat format) {
  switch (format) {
    case EmbeddingFormat::Word2VecText: return load_text(in, true);
    case EmbeddingFormat::GloveText: return load_text(in, false);
    case EmbeddingFormat::Word2VecBinary: return load_binary(in);
  }
  throw InvalidArgument("unknown embedding format");
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path, EmbeddingFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open embeddings file " + path.string());
  try {
    return load_embeddings(in, format);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

EmbeddingFormat guess_embedding_format(const std::filesystem::path& path) {
  if (path.extension() == ".bin") return EmbeddingFormat::Word2VecBinary;
  std::ifstream in(path);
  std::string first;
  if (!in || !std::getline(in, first)) return EmbeddingFormat::GloveText;
  strip_cr(first);
  auto fields = split_fields(first);
  auto is_count = [](std::string_view f) {
    return !f.empty() && std::all_of(f.begin(), f.end(), [](unsigned char c) { return std::isdigit(c); });
  };
  if (fields.size() == 2 && is_count(fields[0]) && is_count(fields[1]))
    return EmbeddingFormat::Word2VecText;
  return EmbeddingFormat::GloveText;
}

void write_embeddings(std::ostream& out, const EmbeddingMatrix& matrix, EmbeddingFormat format) {
  if (format != EmbeddingFormat::GloveText)
    out << matrix.rows() << ' ' << matrix.dims() << '\n';
  char buf[32];
  std::vector<char> bytes(matrix.dims() * sizeof(float));
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    out << matrix.vocab().token(r);
    auto row = matrix.row(r);
    if (format == EmbeddingFormat::Word2VecBinary) {
      out << ' ';
      for (std::size_t d = 0; d < row.size(); ++d)
        float_to_le(static_cast<float>(row[d]), bytes.data() + d * sizeof(float));
      out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    } else {
      for (double v : row) {
        std::snprintf(buf, sizeof buf, "%.6g", v);
        out << ' ' << buf;
      }
    }
    out << '\n';
  }
}

std::optional<std::size_t> lookup(const EmbeddingMatrix& matrix, std::string_view token,
                                  LookupOptions options) {
  if (auto row = matrix.vocab().find(token)) return row;
  if (!options.lowercase_fallback) return std::nullopt;
  std::string lowered(token);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lowered == token) return std::nullopt;
  return matrix.vocab().find(lowered);
}

ResolvedPhrase resolve(const EmbeddingMatrix& matrix, std::string_view phrase,
                       const PhrasePolicy& policy) {
  auto words = split_fields(phrase);
  if (words.empty()) throw InvalidArgument("cannot resolve an empty phrase");

  std::string compound;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i > 0) compound.push_back(policy.join_char);
    compound.append(words[i]);
  }
  if (auto row = lookup(matrix, compound, policy.lookup)) {
    auto values = matrix.row(*row);
    return {Vector(values.begin(), values.end()), row};
  }

  if (policy.fallback == PhraseFallback::AverageTokens && words.size() > 1) {
    std::vector<std::span<const double>> parts;
    for (auto word : words) {
      if (auto row = lookup(matrix, word, policy.lookup)) parts.push_back(matrix.row(*row));
    }
    if (!parts.empty()) return {mean_vector(parts), std::nullopt};
  }
  throw OovError(std::string(phrase), "out of vocabulary: '" + std::string(phrase) + "'");
}

Vector mean_vector(std::span<const std::span<const double>> vectors) {
  if (vectors.empty()) throw InvalidArgument("mean of an empty vector list");
  const std::size_t dims = vectors.front().size();
  Vector sum(dims, 0.0);
  for (auto v : vectors) {
    if (v.size() != dims) throw InvalidArgument("mean of vectors with different lengths");
    for (std::size_t d = 0; d < dims; ++d) sum[d] += v[d];
  }
  const auto count = static_cast<double>(vectors.size());
  for (double& s : sum) s /= count;
  return sum;
}

Vector mean_vector(const std::vector<Vector>& vectors) {
  std::vector<std::span<const double>> views(vectors.begin(), vectors.end());
  return mean_vector(std::span<const std::span<const double>>(views));
}

}  // namespace ranksim
