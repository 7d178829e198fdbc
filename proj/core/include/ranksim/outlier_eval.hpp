#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ranksim/embedding_store.hpp"
#include "ranksim/rank_metrics.hpp"

namespace ranksim {

/// Graded relatedness of an outlier to its cluster; C1 is the hardest.
enum class DifficultyClass { C1 = 1, C2, C3, C4 };

std::string_view to_string(DifficultyClass c);
std::optional<DifficultyClass> parse_difficulty_class(std::string_view s);

inline constexpr std::size_t kTopicClusterSize = 8;
inline constexpr std::size_t kTopicOutlierCount = 8;

struct OutlierTopic {
  std::string name;
  std::vector<std::string> cluster;
  std::vector<std::string> outliers;
  std::vector<DifficultyClass> outlier_classes;  // parallel to `outliers`

  DifficultyClass class_of(std::string_view outlier) const;
};

/// One topic file: 8 cluster phrases, a blank line, 8 outlier phrases.
/// Outlier classes follow position (1-2 -> C1, ..., 7-8 -> C4) unless the
/// line carries a tab-separated class column ("Moon\tC1"). Throws ParseError
/// naming `name` on bad line counts, a missing separator, or a repeated phrase.
OutlierTopic parse_topic(std::istream& in, std::string name);

struct NamedText {
  std::string name;
  std::string text;
};

std::vector<OutlierTopic> parse_888(std::span<const NamedText> sources);

/// Parses every regular file of `dir` in filename order; the topic name is the file stem.
std::vector<OutlierTopic> load_888_directory(const std::filesystem::path& dir);

struct OutlierCase {
  std::string topic;
  std::vector<std::string> words;
  std::string outlier;
  DifficultyClass outlier_class = DifficultyClass::C1;

  /// The n cluster words followed by the outlier; the outlier sits at index n.
  std::vector<std::string> all_words() const;

  friend bool operator==(const OutlierCase&, const OutlierCase&) = default;
};

/// One case per (topic, outlier), topics in order, outliers in file order.
std::vector<OutlierCase> expand_cases(std::span<const OutlierTopic> topics);

enum class OutlierApproach { Pairwise, Prototype };

std::string_view to_string(OutlierApproach approach);
std::optional<OutlierApproach> parse_outlier_approach(std::string_view s);

/// score[i] = mean similarity of vector i to each other vector. Needs >= 3 vectors.
std::vector<double> compactness_pairwise(std::span<const PreparedVector> vectors,
                                         const Scorer& scorer);
std::vector<double> compactness_pairwise(const std::vector<Vector>& vectors,
                                         const MetricSpec& spec);

/// score[i] = similarity of vector i to the mean of all the other vectors.
/// Prototypes are raw means; their rank profiles are computed fresh.
std::vector<double> compactness_prototype(std::span<const PreparedVector> vectors,
                                          const Scorer& scorer);
std::vector<double> compactness_prototype(const std::vector<Vector>& vectors,
                                          const MetricSpec& spec);

/// Number of non-outlier entries whose score is strictly greater than the
/// outlier's. A tie with the outlier never counts in the system's favour.
std::size_t outlier_position(std::span<const double> scores, std::size_t outlier_index);

struct CaseResult {
  OutlierCase outlier_case;
  std::vector<double> compactness;  // aligned with outlier_case.all_words()
  std::size_t op = 0;
  bool od = false;

  std::size_t n() const noexcept { return outlier_case.words.size(); }
};

struct MissedOutlier {
  std::string topic;
  std::string outlier;
  DifficultyClass outlier_class = DifficultyClass::C1;
  std::size_t miss_count = 0;

  friend bool operator==(const MissedOutlier&, const MissedOutlier&) = default;
};

struct OutlierReport {
  std::string metric;
  OutlierApproach approach = OutlierApproach::Pairwise;
  double opp = 0.0;
  double accuracy = 0.0;
  std::vector<CaseResult> per_case;
  std::vector<MissedOutlier> missed;
};

/// OPP = 100 * mean(OP / n), Accuracy = 100 * mean(OD) over `results`.
/// Also fills `missed`. Throws InvalidArgument when `results` is empty.
OutlierReport aggregate_outlier_results(std::vector<CaseResult> results);

/// Runs every case: resolves all n+1 phrases (an unresolvable phrase is an
/// OovError naming topic and phrase), scores compactness by `approach`, and
/// aggregates OP/OD into OPP and Accuracy.
OutlierReport evaluate_outliers(std::span<const OutlierCase> cases, const EmbeddingMatrix& matrix,
                                const MetricSpec& spec, OutlierApproach approach,
                                const PhrasePolicy& policy);

struct ChiSquareTest {
  double chi2 = 0.0;
  double p = 1.0;
};

/// 2x2 chi-square (no continuity correction) of k1/n1 vs k2/n2 correct
/// answers. Empty optional when a marginal total is zero.
std::optional<ChiSquareTest> chi_square_accuracy(std::size_t k1, std::size_t n1, std::size_t k2,
                                                 std::size_t n2);

/// Counts, across settings, how often each case was missed (OD = 0).
/// Sorted by count descending, then topic and outlier. Throws InvalidArgument
/// unless every report covers the same cases in the same order.
std::vector<MissedOutlier> common_errors(std::span<const OutlierReport> reports);

}  // namespace ranksim
