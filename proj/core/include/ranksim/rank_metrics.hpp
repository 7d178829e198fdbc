#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ranksim/embedding_store.hpp"

namespace ranksim {

/// 1-based ranks of a vector's dimensions under a decreasing sort of its
/// values. Tied values share the mean of the positions they occupy, so the
/// profile depends only on the values and never on the order of ties.
class RankProfile {
 public:
  /// Throws InvalidArgument for an empty input or a NaN/Inf entry.
  static RankProfile of(std::span<const double> values);

  std::span<const double> ranks() const noexcept { return ranks_; }
  std::size_t size() const noexcept { return ranks_.size(); }
  double operator[](std::size_t i) const { return ranks_[i]; }

  friend bool operator==(const RankProfile&, const RankProfile&) = default;

 private:
  explicit RankProfile(std::vector<double> ranks) : ranks_(std::move(ranks)) {}
  std::vector<double> ranks_;
};

inline RankProfile rank_profile(std::span<const double> values) { return RankProfile::of(values); }

double cosine(std::span<const double> x, std::span<const double> y);

/// Sum of 1 / mean(rank_x, rank_y) over the dimensions ranked within the top
/// `top_n` of both profiles. Requires 1 <= top_n <= dims.
double apsyn(const RankProfile& px, const RankProfile& py, std::size_t top_n);

/// Sum over every dimension of 1 / mean(rank_x^p, rank_y^p), 0 < p < 1.
double apsynp(const RankProfile& px, const RankProfile& py, double power);

/// Pearson correlation of the two vectors' rank profiles.
double spearman_metric(std::span<const double> x, std::span<const double> y);

/// Pearson correlation; throws DataError when either side has zero variance.
double pearson_correlation(std::span<const double> a, std::span<const double> b);

namespace detail {
// Unvalidated APSynP kernel; accepts any positive power (p = 1 included).
double apsynp_sum(std::span<const double> rx, std::span<const double> ry, double power);
}  // namespace detail

enum class MetricKind { Cosine, APSyn, APSynP, SpearmanMetric };

std::string_view to_string(MetricKind kind);
/// Accepts "cosine", "apsyn", "apsynp", "spearman".
std::optional<MetricKind> parse_metric_kind(std::string_view name);

inline constexpr double kDefaultPower = 0.1;

struct MetricSpec {
  MetricKind kind = MetricKind::APSynP;
  /// APSyn overlap depth; unset means all dimensions.
  std::optional<std::size_t> top_n;
  double power = kDefaultPower;

  /// Checks the parameters that do not depend on the data (p range, N >= 1).
  void validate() const;
  /// Also checks N against the vector dimension.
  void validate(std::size_t dims) const;

  /// Human-readable label such as "apsynp(p=0.1)" or "apsyn(N=|f|)".
  std::string describe() const;

  bool needs_ranks() const noexcept { return kind != MetricKind::Cosine; }
};

/// Lazily computed rank profiles for the rows of one embedding matrix.
/// Each row is ranked at most once; safe to share between threads.
class RankProfileCache {
 public:
  explicit RankProfileCache(const EmbeddingMatrix& matrix);
  ~RankProfileCache();
  RankProfileCache(const RankProfileCache&) = delete;
  RankProfileCache& operator=(const RankProfileCache&) = delete;

  const RankProfile& get(std::size_t row) const;
  const EmbeddingMatrix& matrix() const noexcept { return matrix_; }

 private:
  struct Slot;
  const EmbeddingMatrix& matrix_;
  std::unique_ptr<Slot[]> slots_;
};

/// A vector ready for repeated scoring: its values plus, for rank-based
/// metrics, its rank profile (borrowed from a cache or owned).
struct PreparedVector {
  std::span<const double> values;
  std::shared_ptr<const RankProfile> owned_profile;
  const RankProfile* profile = nullptr;
};

/// Binds a MetricSpec to an optional row cache and scores prepared vectors.
class Scorer {
 public:
  explicit Scorer(MetricSpec spec, const RankProfileCache* cache = nullptr);

  /// `values` must outlive the returned object. When `row` is given and a
  /// cache is attached, the cached profile is used.
  PreparedVector prepare(std::span<const double> values,
                         std::optional<std::size_t> row = std::nullopt) const;

  double score(const PreparedVector& x, const PreparedVector& y) const;

  const MetricSpec& spec() const noexcept { return spec_; }

 private:
  MetricSpec spec_;
  const RankProfileCache* cache_;
};

/// One-shot dispatch to the metric named by `spec`.
double similarity(const MetricSpec& spec, std::span<const double> x, std::span<const double> y);

}  // namespace ranksim
