#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "ranksim/embedding_store.hpp"
#include "ranksim/errors.hpp"

using namespace ranksim;

namespace {

const std::filesystem::path kData = RANKSIM_TEST_DATA_DIR;

EmbeddingMatrix load_string(const std::string& text, EmbeddingFormat format) {
  std::istringstream in(text, std::ios::binary);
  return load_embeddings(in, format);
}

std::vector<double> as_vector(std::span<const double> s) { return {s.begin(), s.end()}; }

// Parses "<token> <v1> ... <vd>" lines with plain stream extraction.
std::vector<std::pair<std::string, std::vector<double>>> literal_rows(std::istream& in) {
  std::vector<std::pair<std::string, std::vector<double>>> rows;
  for (std::string line; std::getline(in, line);) {
    std::istringstream fields(line);
    std::string token;
    fields >> token;
    std::vector<double> values;
    for (float v; fields >> v;) values.push_back(v);
    rows.emplace_back(token, values);
  }
  return rows;
}

}  // namespace

TEST_CASE("word2vec text loads header and rows") {
  auto m = load_string("2 3\napple 1 0 0\npear 0 1 0", EmbeddingFormat::Word2VecText);
  CHECK(m.rows() == 2);
  CHECK(m.dims() == 3);
  CHECK(m.vocab().tokens() == std::vector<std::string>{"apple", "pear"});
  CHECK(as_vector(m.row(1)) == std::vector<double>{0, 1, 0});
}

TEST_CASE("glove text infers dimensions from the first line") {
  auto m = load_string("apple 1 0\npear 0 1", EmbeddingFormat::GloveText);
  CHECK(m.rows() == 2);
  CHECK(m.dims() == 2);
}

TEST_CASE("text loaders reject malformed input") {
  CHECK_THROWS_AS(load_string("2 3\napple 1 0\npear 0 1 0\n", EmbeddingFormat::Word2VecText),
                  ParseError);
  CHECK_THROWS_AS(load_string("apple 1 0\npear 0 1 1\n", EmbeddingFormat::GloveText), ParseError);
  CHECK_THROWS_AS(load_string("1 2\napple 1 x\n", EmbeddingFormat::Word2VecText), ParseError);
  CHECK_THROWS_AS(load_string("1 2\napple 1 nan\n", EmbeddingFormat::Word2VecText), ParseError);
  CHECK_THROWS_AS(load_string("3 2\napple 1 0\npear 0 1\n", EmbeddingFormat::Word2VecText),
                  ParseError);
  CHECK_THROWS_AS(load_string("", EmbeddingFormat::GloveText), ParseError);
  CHECK_THROWS_AS(load_string("2\n", EmbeddingFormat::Word2VecText), ParseError);
}

TEST_CASE("duplicate tokens keep the first row and are counted") {
  auto m = load_string("3 2\na 1 2\nb 3 4\na 5 6\n", EmbeddingFormat::Word2VecText);
  CHECK(m.rows() == 2);
  CHECK(m.duplicates_dropped() == 1);
  CHECK(as_vector(m.row(*lookup(m, "a"))) == std::vector<double>{1, 2});
}

TEST_CASE("binary loader reads little-endian float records") {
  auto m = load_embeddings(kData / "tiny.w2v.bin", EmbeddingFormat::Word2VecBinary);
  std::ifstream expected(kData / "tiny.w2v.bin.expected");
  auto rows = literal_rows(expected);
  REQUIRE(m.rows() == rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    CHECK(m.vocab().token(r) == rows[r].first);
    CHECK(as_vector(m.row(r)) == rows[r].second);
  }
}

TEST_CASE("binary loader reports truncated records") {
  std::ifstream in(kData / "tiny.w2v.bin", std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  bytes.resize(bytes.size() - 6);
  CHECK_THROWS_AS(load_string(bytes, EmbeddingFormat::Word2VecBinary), ParseError);
}

TEST_CASE("lookup matches the literally parsed rows of the golden file") {
  for (auto format : {EmbeddingFormat::Word2VecText, EmbeddingFormat::GloveText}) {
    const auto file = kData / (format == EmbeddingFormat::GloveText ? "tiny.glove.txt" : "tiny.w2v.txt");
    auto m = load_embeddings(file, format);
    std::ifstream in(file);
    if (format == EmbeddingFormat::Word2VecText) {
      std::string header;
      std::getline(in, header);
    }
    for (const auto& [token, values] : literal_rows(in)) {
      auto row = lookup(m, token);
      REQUIRE(row);
      CHECK(as_vector(m.row(*row)) == values);
    }
  }
}

TEST_CASE("lookup is exact by default with an opt-in lowercase fallback") {
  auto m = load_string("2 2\napple 1 0\nPear 0 1\n", EmbeddingFormat::Word2VecText);
  CHECK(lookup(m, "apple") == 0);
  CHECK_FALSE(lookup(m, "zzz"));
  CHECK_FALSE(lookup(m, "Apple"));
  CHECK(lookup(m, "Apple", {.lowercase_fallback = true}) == 0);
  // fallback only lowercases the query
  CHECK_FALSE(lookup(m, "pear", {.lowercase_fallback = true}));
}

TEST_CASE("resolve_phrase prefers the joined compound, then averages constituents") {
  auto m = load_string("4 2\nNew_York 3 3\nNew 1 0\nYork 0 1\nBoston 5 5\n",
                       EmbeddingFormat::Word2VecText);
  PhrasePolicy policy;
  CHECK(resolve_phrase(m, "New York", policy) == Vector{3, 3});
  auto r = resolve(m, "New York", policy);
  CHECK(r.row == 0);

  auto only_parts = load_string("2 2\nNew 1 0\nYork 0 1\n", EmbeddingFormat::Word2VecText);
  auto mean = resolve(only_parts, "New York", policy);
  CHECK(mean.values == Vector{0.5, 0.5});
  CHECK_FALSE(mean.row);

  // a partially known phrase averages only the known tokens
  CHECK(resolve_phrase(only_parts, "New Amsterdam", policy) == Vector{1, 0});

  CHECK_THROWS_AS(resolve_phrase(m, "qqq zzz", policy), OovError);
  PhrasePolicy strict{.fallback = PhraseFallback::Fail};
  CHECK_THROWS_AS(resolve_phrase(only_parts, "New York", strict), OovError);
  CHECK_THROWS_AS(resolve_phrase(m, "   ", policy), InvalidArgument);
}

TEST_CASE("resolve_phrase honours a custom join character") {
  auto m = load_string("1 2\nLos-Angeles 2 1\n", EmbeddingFormat::Word2VecText);
  PhrasePolicy policy{.join_char = '-'};
  CHECK(resolve_phrase(m, "Los Angeles", policy) == Vector{2, 1});
}

TEST_CASE("mean_vector") {
  CHECK(mean_vector(std::vector<Vector>{{1, 0}, {0, 1}}) == Vector{0.5, 0.5});
  CHECK(mean_vector(std::vector<Vector>{{2, 2, 2}}) == Vector{2, 2, 2});
  CHECK(mean_vector(std::vector<Vector>{{1, 1}, {3, 1}, {2, 4}}) == Vector{2, 2});
  CHECK_THROWS_AS(mean_vector(std::vector<Vector>{}), InvalidArgument);
  CHECK_THROWS_AS(mean_vector(std::vector<Vector>{{1, 2}, {1}}), InvalidArgument);
}

TEST_CASE("mean_vector is permutation invariant") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> dist;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Vector> list(1 + rng() % 16, Vector(5));
    for (auto& v : list)
      for (auto& x : v) x = dist(rng);
    auto base = mean_vector(list);
    std::shuffle(list.begin(), list.end(), rng);
    auto shuffled = mean_vector(list);
    for (std::size_t d = 0; d < base.size(); ++d) CHECK(shuffled[d] == doctest::Approx(base[d]).epsilon(1e-12));
  }
}

TEST_CASE("writing and reloading preserves vocab order and values") {
  for (auto source : {kData / "tiny.w2v.txt", kData / "tiny.w2v.bin"}) {
    auto m = load_embeddings(source, guess_embedding_format(source));
    for (auto format : {EmbeddingFormat::Word2VecText, EmbeddingFormat::Word2VecBinary,
                        EmbeddingFormat::GloveText}) {
      std::ostringstream out(std::ios::binary);
      write_embeddings(out, m, format);
      auto back = load_string(out.str(), format);
      REQUIRE(back.vocab().tokens() == m.vocab().tokens());
      for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t d = 0; d < m.dims(); ++d)
          CHECK(std::abs(back.row(r)[d] - m.row(r)[d]) <= 1e-5);
    }
  }
}

TEST_CASE("format guessing") {
  CHECK(guess_embedding_format(kData / "tiny.w2v.txt") == EmbeddingFormat::Word2VecText);
  CHECK(guess_embedding_format(kData / "tiny.glove.txt") == EmbeddingFormat::GloveText);
  CHECK(guess_embedding_format(kData / "tiny.w2v.bin") == EmbeddingFormat::Word2VecBinary);
  CHECK(parse_embedding_format("w2v-bin") == EmbeddingFormat::Word2VecBinary);
  CHECK_FALSE(parse_embedding_format("fasttext"));
}

TEST_CASE("vocabulary invariants") {
  Vocabulary v;
  CHECK(v.add("a"));
  CHECK(v.add("b"));
  CHECK_FALSE(v.add("a"));
  CHECK_THROWS_AS(v.add(""), InvalidArgument);
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(v.find(v.token(i)) == i);
  CHECK_THROWS_AS(EmbeddingMatrix(v, 0, {}), InvalidArgument);
  CHECK_THROWS_AS(EmbeddingMatrix(v, 1, {1.0}), InvalidArgument);
}
