#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ranksim {

using Vector = std::vector<double>;

/// Ordered set of unique, non-empty tokens. Row ids are insertion positions.
class Vocabulary {
 public:
  /// Appends `token`. Returns false (and leaves the vocabulary untouched)
  /// when the token is already present. Throws InvalidArgument on "".
  bool add(std::string token);

  std::optional<std::size_t> find(std::string_view token) const;
  bool contains(std::string_view token) const { return find(token).has_value(); }

  const std::string& token(std::size_t row) const { return tokens_.at(row); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  std::size_t size() const noexcept { return tokens_.size(); }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t, Hash, std::equal_to<>> index_;
};

/// Dense row-major |vocab| x dims matrix of word vectors.
///
/// Values are read as 32-bit floats from disk and held as doubles so that
/// every metric sum runs in 64-bit regardless of the source precision.
/// Immutable once built; safe to share between threads.
class EmbeddingMatrix {
 public:
  /// Throws InvalidArgument unless data.size() == vocab.size() * dims, dims >= 1,
  /// the vocabulary is non-empty and all values are finite.
  EmbeddingMatrix(Vocabulary vocab, std::size_t dims, std::vector<double> data,
                  std::size_t duplicates_dropped = 0);

  const Vocabulary& vocab() const noexcept { return vocab_; }
  std::size_t dims() const noexcept { return dims_; }
  std::size_t rows() const noexcept { return vocab_.size(); }

  std::span<const double> row(std::size_t r) const;

  /// Number of records skipped at load time because their token repeated an
  /// earlier one (the first occurrence wins).
  std::size_t duplicates_dropped() const noexcept { return duplicates_dropped_; }

 private:
  Vocabulary vocab_;
  std::size_t dims_;
  std::vector<double> data_;
  std::size_t duplicates_dropped_;
};

enum class EmbeddingFormat { Word2VecText, Word2VecBinary, GloveText };

std::string_view to_string(EmbeddingFormat format);
/// Accepts "w2v-text", "w2v-bin", "glove".
std::optional<EmbeddingFormat> parse_embedding_format(std::string_view name);

/// Reads a whole embedding stream. Throws ParseError on dimension mismatch,
/// non-numeric or non-finite values, header/body disagreement and truncated
/// binary records. Duplicate tokens are dropped and counted.
EmbeddingMatrix load_embeddings(std::istream& in, EmbeddingFormat format);
EmbeddingMatrix load_embeddings(const std::filesystem::path& path, EmbeddingFormat format);

/// Picks a format for `path`: ".bin" means word2vec binary, otherwise the
/// first line decides between a word2vec "<count> <dims>" header and GloVe.
EmbeddingFormat guess_embedding_format(const std::filesystem::path& path);

/// Text writers print 6 significant digits per value.
void write_embeddings(std::ostream& out, const EmbeddingMatrix& matrix, EmbeddingFormat format);

struct LookupOptions {
  /// Retry with the ASCII-lowercased token when the exact token is absent.
  bool lowercase_fallback = false;
};

std::optional<std::size_t> lookup(const EmbeddingMatrix& matrix, std::string_view token,
                                  LookupOptions options = {});

enum class PhraseFallback { AverageTokens, Fail };

struct PhrasePolicy {
  char join_char = '_';
  PhraseFallback fallback = PhraseFallback::AverageTokens;
  LookupOptions lookup{};
};

/// A phrase mapped onto the embedding space. `row` is set when the phrase
/// matched a single vocabulary entry, which lets callers reuse per-row caches.
struct ResolvedPhrase {
  Vector values;
  std::optional<std::size_t> row;
};

/// Resolution order: the phrase with its spaces replaced by `join_char`;
/// then, for PhraseFallback::AverageTokens, the mean of the in-vocabulary
/// space-separated constituents. Throws OovError when neither works.
ResolvedPhrase resolve(const EmbeddingMatrix& matrix, std::string_view phrase,
                       const PhrasePolicy& policy);

inline Vector resolve_phrase(const EmbeddingMatrix& matrix, std::string_view phrase,
                             const PhrasePolicy& policy) {
  return resolve(matrix, phrase, policy).values;
}

/// Component-wise arithmetic mean, accumulated in list order.
Vector mean_vector(std::span<const std::span<const double>> vectors);
Vector mean_vector(const std::vector<Vector>& vectors);

}  // namespace ranksim
