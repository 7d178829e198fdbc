#include "ranksim/similarity_eval.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>

#include "ranksim/errors.hpp"

namespace ranksim {

namespace {

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  auto begin = s.find_first_not_of(ws);
  if (begin == std::string_view::npos) return {};
  auto end = s.find_last_not_of(ws);
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string_view> split_on(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    fields.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

std::optional<double> parse_number(std::string_view s) {
  double value = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

PairFormat detect_format(std::string_view line) {
  if (line.find('\t') != std::string_view::npos) return PairFormat::Tab;
  if (line.find(',') != std::string_view::npos) return PairFormat::Comma;
  return PairFormat::Whitespace;
}

std::vector<std::string_view> split_fields(std::string_view line, PairFormat format) {
  switch (format) {
    case PairFormat::Tab: return split_on(line, '\t');
    case PairFormat::Comma: return split_on(line, ',');
    default: return split_ws(line);
  }
}

}  // namespace

WordPairDataset parse_pair_dataset(std::istream& in, PairFormat format, std::string name) {
  WordPairDataset dataset{std::move(name), {}};
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (format == PairFormat::Auto) format = detect_format(line);
    auto fields = split_fields(line, format);
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty()) {
      throw ParseError("malformed pair line " + std::to_string(line_no) +
                       ": expected word1, word2, score");
    }
    auto gold = parse_number(fields[2]);
    if (!gold) {
      if (first) {
        first = false;
        continue;
      }
      throw ParseError("non-numeric score on line " + std::to_string(line_no));
    }
    first = false;
    dataset.pairs.push_back({std::string(fields[0]), std::string(fields[1]), *gold});
  }
  if (dataset.pairs.empty()) throw ParseError("pair dataset contains no pairs");
  return dataset;
}

WordPairDataset load_pair_dataset(const std::filesystem::path& path, PairFormat format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset " + path.string());
  try {
    return parse_pair_dataset(in, format, path.stem().string());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

double spearman_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("spearman_correlation: length mismatch");
  if (a.size() < 2) throw InvalidArgument("spearman_correlation needs at least two values");
  // Descending ranks on both sides give the same correlation as ascending ones.
  auto ra = RankProfile::of(a);
  auto rb = RankProfile::of(b);
  return pearson_correlation(ra.ranks(), rb.ranks());
}

SimilarityReport evaluate_similarity(const WordPairDataset& dataset, const EmbeddingMatrix& matrix,
                                     const MetricSpec& spec, const PhrasePolicy& policy,
                                     SimilarityOptions options) {
  if (dataset.pairs.empty()) throw InvalidArgument("evaluate_similarity on an empty dataset");
  RankProfileCache cache(matrix);
  Scorer scorer(spec, &cache);

  SimilarityReport report;
  report.dataset = dataset.name;
  report.metric = spec.describe();

  std::vector<double> system;
  std::vector<double> gold;
  for (const auto& pair : dataset.pairs) {
    std::optional<ResolvedPhrase> a;
    std::optional<ResolvedPhrase> b;
    try {
      a = resolve(matrix, pair.word1, policy);
      b = resolve(matrix, pair.word2, policy);
    } catch (const OovError&) {
      if (options.strict_oov) throw;
      report.skipped.push_back(pair);
      continue;
    }
    auto pa = scorer.prepare(a->values, a->row);
    auto pb = scorer.prepare(b->values, b->row);
    system.push_back(scorer.score(pa, pb));
    gold.push_back(pair.gold);
  }

  report.n_used = system.size();
  report.n_skipped_oov = report.skipped.size();
  if (report.n_used < 2) {
    throw DataError("dataset '" + dataset.name + "': only " + std::to_string(report.n_used) +
                    " pair(s) could be scored, need at least 2");
  }
  report.rho = spearman_correlation(system, gold);
  return report;
}

double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

FisherTest fisher_r_to_z(double r1, std::size_t n1, double r2, std::size_t n2) {
  if (n1 <= 3 || n2 <= 3) throw InvalidArgument("Fisher r-to-z needs more than 3 samples per side");
  if (!(std::abs(r1) < 1.0) || !(std::abs(r2) < 1.0))
    throw InvalidArgument("Fisher r-to-z needs |r| < 1");
  const double se = std::sqrt(1.0 / static_cast<double>(n1 - 3) + 1.0 / static_cast<double>(n2 - 3));
  FisherTest out;
  out.z = (std::atanh(r1) - std::atanh(r2)) / se;
  out.p_two_tailed = std::min(1.0, 2.0 * normal_upper_tail(std::abs(out.z)));
  return out;
}

namespace {

void check_grid(std::span<const double> grid) {
  if (grid.empty()) throw InvalidArgument("power grid is empty");
  for (double p : grid) {
    if (!(p > 0.0 && p < 1.0))
      throw InvalidArgument("power grid values must lie in (0, 1), got " + std::to_string(p));
  }
}

void pick_best(PowerTuning& tuning) {
  const PowerTuning::Row* best = nullptr;
  for (const auto& row : tuning.table) {
    if (best == nullptr || row.rho > best->rho || (row.rho == best->rho && row.p < best->p))
      best = &row;
  }
  tuning.p_best = best->p;
  tuning.rho_best = best->rho;
}

double on_grid(double p) { return std::round(p * 100.0) / 100.0; }

}  // namespace

PowerTuning tune_power(const WordPairDataset& dev, const EmbeddingMatrix& matrix,
                       std::span<const double> grid, const PhrasePolicy& policy) {
  check_grid(grid);
  PowerTuning tuning;
  for (double p : grid) {
    MetricSpec spec{MetricKind::APSynP, std::nullopt, p};
    tuning.table.push_back({p, evaluate_similarity(dev, matrix, spec, policy).rho});
  }
  pick_best(tuning);
  return tuning;
}

std::vector<double> default_power_grid() {
  std::vector<double> grid;
  for (int k = 1; k <= 19; ++k) grid.push_back(on_grid(0.05 * k));
  return grid;
}

PowerTuning tune_power(const WordPairDataset& dev, const EmbeddingMatrix& matrix,
                       const PhrasePolicy& policy) {
  const auto coarse = default_power_grid();
  auto tuning = tune_power(dev, matrix, coarse, policy);

  std::vector<double> fine;
  for (int k = -4; k <= 4; ++k) {
    const double p = on_grid(tuning.p_best + 0.01 * k);
    if (p <= 0.0 || p >= 1.0) continue;
    if (std::find(coarse.begin(), coarse.end(), p) != coarse.end()) continue;
    fine.push_back(p);
  }
  if (!fine.empty()) {
    auto refined = tune_power(dev, matrix, fine, policy);
    tuning.table.insert(tuning.table.end(), refined.table.begin(), refined.table.end());
    pick_best(tuning);
  }
  return tuning;
}

}  // namespace ranksim
