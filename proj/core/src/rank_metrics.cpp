#include "ranksim/rank_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <sstream>

#include "ranksim/errors.hpp"

namespace ranksim {

RankProfile RankProfile::of(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("cannot rank an empty vector");
  if (!std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); }))
    throw InvalidArgument("cannot rank a vector with NaN or Inf entries");

  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });

  std::vector<double> ranks(values.size());
  std::size_t first = 0;
  while (first < order.size()) {
    std::size_t last = first;
    while (last + 1 < order.size() && values[order[last + 1]] == values[order[first]]) ++last;
    // positions first..last (0-based) share the mean 1-based rank
    const double shared = (static_cast<double>(first + 1) + static_cast<double>(last + 1)) / 2.0;
    for (std::size_t k = first; k <= last; ++k) ranks[order[k]] = shared;
    first = last + 1;
  }
  return RankProfile(std::move(ranks));
}

namespace {

void require_same_length(std::size_t a, std::size_t b) {
  if (a != b) {
    throw InvalidArgument("vector length mismatch: " + std::to_string(a) + " vs " +
                          std::to_string(b));
  }
}

}  // namespace

double cosine(std::span<const double> x, std::span<const double> y) {
  require_same_length(x.size(), y.size());
  if (x.empty()) throw InvalidArgument("cosine of empty vectors");
  double dot = 0.0;
  double xx = 0.0;
  double yy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    xx += x[i] * x[i];
    yy += y[i] * y[i];
  }
  if (xx == 0.0 || yy == 0.0) throw DataError("cosine is undefined for a zero-norm vector");
  return std::clamp(dot / (std::sqrt(xx) * std::sqrt(yy)), -1.0, 1.0);
}

double apsyn(const RankProfile& px, const RankProfile& py, std::size_t top_n) {
  require_same_length(px.size(), py.size());
  if (top_n < 1 || top_n > px.size()) {
    throw InvalidArgument("APSyn N=" + std::to_string(top_n) + " outside [1, " +
                          std::to_string(px.size()) + "]");
  }
  const auto limit = static_cast<double>(top_n);
  double sum = 0.0;
  for (std::size_t i = 0; i < px.size(); ++i) {
    if (px[i] <= limit && py[i] <= limit) sum += 1.0 / ((px[i] + py[i]) / 2.0);
  }
  return sum;
}

double detail::apsynp_sum(std::span<const double> rx, std::span<const double> ry, double power) {
  double sum = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i)
    sum += 1.0 / ((std::pow(rx[i], power) + std::pow(ry[i], power)) / 2.0);
  return sum;
}

double apsynp(const RankProfile& px, const RankProfile& py, double power) {
  require_same_length(px.size(), py.size());
  if (!(power > 0.0 && power < 1.0))
    throw InvalidArgument("APSynP power must lie in (0, 1), got " + std::to_string(power));
  return detail::apsynp_sum(px.ranks(), py.ranks(), power);
}

double pearson_correlation(std::span<const double> a, std::span<const double> b) {
  require_same_length(a.size(), b.size());
  if (a.size() < 2) throw InvalidArgument("correlation needs at least two observations");
  const auto n = static_cast<double>(a.size());
  double mean_a = 0.0;
  double mean_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    mean_a += a[i];
    mean_b += b[i];
  }
  mean_a /= n;
  mean_b /= n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) throw DataError("correlation is undefined for zero variance");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double spearman_metric(std::span<const double> x, std::span<const double> y) {
  require_same_length(x.size(), y.size());
  if (x.size() < 2) throw InvalidArgument("Spearman metric needs at least two dimensions");
  auto px = RankProfile::of(x);
  auto py = RankProfile::of(y);
  return pearson_correlation(px.ranks(), py.ranks());
}

std::string_view to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::Cosine: return "cosine";
    case MetricKind::APSyn: return "apsyn";
    case MetricKind::APSynP: return "apsynp";
    case MetricKind::SpearmanMetric: return "spearman";
  }
  return "?";
}

std::optional<MetricKind> parse_metric_kind(std::string_view name) {
  if (name == "cosine") return MetricKind::Cosine;
  if (name == "apsyn") return MetricKind::APSyn;
  if (name == "apsynp") return MetricKind::APSynP;
  if (name == "spearman") return MetricKind::SpearmanMetric;
  return std::nullopt;
}

void MetricSpec::validate() const {
  if (kind == MetricKind::APSynP && !(power > 0.0 && power < 1.0))
    throw InvalidArgument("APSynP power must lie in (0, 1), got " + std::to_string(power));
  if (kind == MetricKind::APSyn && top_n && *top_n < 1)
    throw InvalidArgument("APSyn N must be at least 1");
}

void MetricSpec::validate(std::size_t dims) const {
  validate();
  if (kind == MetricKind::APSyn && top_n && *top_n > dims) {
    throw InvalidArgument("APSyn N=" + std::to_string(*top_n) + " exceeds the " +
                          std::to_string(dims) + " available dimensions");
  }
}

std::string MetricSpec::describe() const {
  std::ostringstream out;
  out << to_string(kind);
  if (kind == MetricKind::APSynP) out << "(p=" << power << ")";
  if (kind == MetricKind::APSyn) {
    if (top_n)
      out << "(N=" << *top_n << ")";
    else
      out << "(N=|f|)";
  }
  return out.str();
}

struct RankProfileCache::Slot {
  std::once_flag once;
  std::optional<RankProfile> profile;
};

RankProfileCache::RankProfileCache(const EmbeddingMatrix& matrix)
    : matrix_(matrix), slots_(std::make_unique<Slot[]>(matrix.rows())) {}

RankProfileCache::~RankProfileCache() = default;

const RankProfile& RankProfileCache::get(std::size_t row) const {
  if (row >= matrix_.rows()) throw InvalidArgument("row index out of range");
  Slot& slot = slots_[row];
  std::call_once(slot.once, [&] { slot.profile.emplace(RankProfile::of(matrix_.row(row))); });
  return *slot.profile;
}

Scorer::Scorer(MetricSpec spec, const RankProfileCache* cache)
    : spec_(std::move(spec)), cache_(cache) {
  spec_.validate();
}

PreparedVector Scorer::prepare(std::span<const double> values,
                               std::optional<std::size_t> row) const {
  PreparedVector prepared;
  prepared.values = values;
  if (!spec_.needs_ranks()) return prepared;
  if (row && cache_ != nullptr) {
    prepared.profile = &cache_->get(*row);
  } else {
    prepared.owned_profile = std::make_shared<const RankProfile>(RankProfile::of(values));
    prepared.profile = prepared.owned_profile.get();
  }
  return prepared;
}

double Scorer::score(const PreparedVector& x, const PreparedVector& y) const {
  require_same_length(x.values.size(), y.values.size());
  spec_.validate(x.values.size());
  switch (spec_.kind) {
    case MetricKind::Cosine:
      return cosine(x.values, y.values);
    case MetricKind::APSyn:
      return apsyn(*x.profile, *y.profile, spec_.top_n.value_or(x.values.size()));
    case MetricKind::APSynP:
      return apsynp(*x.profile, *y.profile, spec_.power);
    case MetricKind::SpearmanMetric:
      if (x.values.size() < 2)
        throw InvalidArgument("Spearman metric needs at least two dimensions");
      return pearson_correlation(x.profile->ranks(), y.profile->ranks());
  }
  throw InvalidArgument("unknown metric");
}

double similarity(const MetricSpec& spec, std::span<const double> x, std::span<const double> y) {
  Scorer scorer(spec);
  return scorer.score(scorer.prepare(x), scorer.prepare(y));
}

}  // namespace ranksim
