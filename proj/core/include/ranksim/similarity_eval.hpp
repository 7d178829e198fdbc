#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ranksim/embedding_store.hpp"
#include "ranksim/rank_metrics.hpp"

namespace ranksim {

struct WordPair {
  std::string word1;
  std::string word2;
  double gold = 0.0;

  friend bool operator==(const WordPair&, const WordPair&) = default;
};

struct WordPairDataset {
  std::string name;
  std::vector<WordPair> pairs;
};

/// Field separator of a pair dataset. Auto picks tab if the first data line
/// has one, then comma, then whitespace.
enum class PairFormat { Auto, Tab, Comma, Whitespace };

/// Each data line holds word1, word2, score. A first line whose third field
/// is not numeric is treated as a header and skipped; blank lines are
/// ignored. Throws ParseError naming the line on malformed input and on an
/// empty dataset.
WordPairDataset parse_pair_dataset(std::istream& in, PairFormat format = PairFormat::Auto,
                                   std::string name = {});
WordPairDataset load_pair_dataset(const std::filesystem::path& path,
                                  PairFormat format = PairFormat::Auto);

/// Pearson correlation of tie-averaged ranks.
double spearman_correlation(std::span<const double> a, std::span<const double> b);

struct SimilarityReport {
  std::string dataset;
  std::string metric;
  double rho = 0.0;
  std::size_t n_used = 0;
  std::size_t n_skipped_oov = 0;
  std::vector<WordPair> skipped;
};

struct SimilarityOptions {
  /// Throw OovError on the first unresolvable word instead of skipping it.
  bool strict_oov = false;
};

/// Scores every pair whose two words resolve and correlates the system
/// scores with the gold ratings. Throws DataError if fewer than two pairs
/// remain.
SimilarityReport evaluate_similarity(const WordPairDataset& dataset, const EmbeddingMatrix& matrix,
                                     const MetricSpec& spec, const PhrasePolicy& policy,
                                     SimilarityOptions options = {});

struct FisherTest {
  double z = 0.0;
  double p_two_tailed = 1.0;
};

/// Compares two independent correlations through Fisher's r-to-z transform.
FisherTest fisher_r_to_z(double r1, std::size_t n1, double r2, std::size_t n2);

/// Upper tail of the standard normal, P(Z > z).
double normal_upper_tail(double z);

struct PowerTuning {
  double p_best = kDefaultPower;
  double rho_best = 0.0;
  struct Row {
    double p;
    double rho;
  };
  std::vector<Row> table;
};

/// Evaluates APSynP on `dev` at every grid value and returns the value with
/// the highest rho; ties go to the smallest p. `table` follows grid order.
PowerTuning tune_power(const WordPairDataset& dev, const EmbeddingMatrix& matrix,
                       std::span<const double> grid, const PhrasePolicy& policy);

/// 0.05, 0.10, ..., 0.95.
std::vector<double> default_power_grid();

/// Coarse search over default_power_grid(), then one refinement pass at
/// step 0.01 within +-0.04 of the coarse optimum. `table` holds both passes.
PowerTuning tune_power(const WordPairDataset& dev, const EmbeddingMatrix& matrix,
                       const PhrasePolicy& policy);

}  // namespace ranksim
