#include "ranksim/outlier_eval.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "ranksim/errors.hpp"

namespace ranksim {

std::string_view to_string(DifficultyClass c) {
  switch (c) {
    case DifficultyClass::C1: return "C1";
    case DifficultyClass::C2: return "C2";
    case DifficultyClass::C3: return "C3";
    case DifficultyClass::C4: return "C4";
  }
  return "?";
}

std::optional<DifficultyClass> parse_difficulty_class(std::string_view s) {
  if (s == "C1") return DifficultyClass::C1;
  if (s == "C2") return DifficultyClass::C2;
  if (s == "C3") return DifficultyClass::C3;
  if (s == "C4") return DifficultyClass::C4;
  return std::nullopt;
}

DifficultyClass OutlierTopic::class_of(std::string_view outlier) const {
  for (std::size_t i = 0; i < outliers.size(); ++i) {
    if (outliers[i] == outlier) return outlier_classes.at(i);
  }
  throw InvalidArgument("'" + std::string(outlier) + "' is not an outlier of topic " + name);
}

namespace {

std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  auto begin = s.find_first_not_of(ws);
  if (begin == std::string_view::npos) return {};
  auto end = s.find_last_not_of(ws);
  return std::string(s.substr(begin, end - begin + 1));
}

}  // namespace

OutlierTopic parse_topic(std::istream& in, std::string name) {
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(trim(line));
  while (!lines.empty() && lines.back().empty()) lines.pop_back();

  auto fail = [&](const std::string& why) -> ParseError {
    return ParseError("topic file '" + name + "': " + why);
  };

  const std::size_t expected = kTopicClusterSize + 1 + kTopicOutlierCount;
  std::size_t cluster_lines = 0;
  while (cluster_lines < lines.size() && !lines[cluster_lines].empty()) ++cluster_lines;
  if (cluster_lines != kTopicClusterSize) {
    throw fail("expected " + std::to_string(kTopicClusterSize) + " cluster lines before the blank "
               "separator, found " + std::to_string(cluster_lines));
  }
  if (cluster_lines == lines.size()) throw fail("missing blank line between cluster and outliers");
  if (lines.size() != expected) {
    throw fail("expected " + std::to_string(kTopicOutlierCount) + " outlier lines, found " +
               std::to_string(lines.size() - cluster_lines - 1));
  }

  OutlierTopic topic;
  topic.name = std::move(name);
  std::set<std::string> seen;
  for (std::size_t i = 0; i < kTopicClusterSize; ++i) {
    if (!seen.insert(lines[i]).second) throw fail("repeated phrase '" + lines[i] + "'");
    topic.cluster.push_back(lines[i]);
  }
  for (std::size_t i = 0; i < kTopicOutlierCount; ++i) {
    const std::string& line = lines[kTopicClusterSize + 1 + i];
    if (line.empty()) throw fail("blank line inside the outlier section");
    std::string phrase = line;
    auto cls = static_cast<DifficultyClass>(1 + i / 2);
    if (auto tab = line.find('\t'); tab != std::string::npos) {
      phrase = trim(std::string_view(line).substr(0, tab));
      auto annotated = parse_difficulty_class(trim(std::string_view(line).substr(tab + 1)));
      if (!annotated) throw fail("bad class annotation on '" + line + "'");
      cls = *annotated;
    }
    if (!seen.insert(phrase).second) throw fail("repeated phrase '" + phrase + "'");
    topic.outliers.push_back(std::move(phrase));
    topic.outlier_classes.push_back(cls);
  }
  return topic;
}

std::vector<OutlierTopic> parse_888(std::span<const NamedText> sources) {
  std::vector<OutlierTopic> topics;
  topics.reserve(sources.size());
  for (const auto& source : sources) {
    std::istringstream in(source.text);
    topics.push_back(parse_topic(in, source.name));
  }
  return topics;
}

std::vector<OutlierTopic> load_888_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw DataError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().filename().string().front() != '.')
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no topic files in " + dir.string());

  std::vector<OutlierTopic> topics;
  for (const auto& file : files) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open " + file.string());
    topics.push_back(parse_topic(in, file.stem().string()));
  }
  return topics;
}

std::vector<std::string> OutlierCase::all_words() const {
  auto out = words;
  out.push_back(outlier);
  return out;
}

std::vector<OutlierCase> expand_cases(std::span<const OutlierTopic> topics) {
  std::vector<OutlierCase> cases;
  for (const auto& topic : topics) {
    for (std::size_t i = 0; i < topic.outliers.size(); ++i)
      cases.push_back({topic.name, topic.cluster, topic.outliers[i], topic.outlier_classes.at(i)});
  }
  return cases;
}

std::string_view to_string(OutlierApproach approach) {
  return approach == OutlierApproach::Pairwise ? "pairwise" : "prototype";
}

std::optional<OutlierApproach> parse_outlier_approach(std::string_view s) {
  if (s == "pairwise") return OutlierApproach::Pairwise;
  if (s == "prototype") return OutlierApproach::Prototype;
  return std::nullopt;
}

namespace {

void require_case_size(std::size_t count) {
  if (count < 3) throw InvalidArgument("compactness needs at least 3 vectors (n >= 2)");
}

std::vector<PreparedVector> prepare_all(const Scorer& scorer, const std::vector<Vector>& vectors) {
  std::vector<PreparedVector> prepared;
  prepared.reserve(vectors.size());
  for (const auto& v : vectors) prepared.push_back(scorer.prepare(v));
  return prepared;
}

}  // namespace

std::vector<double> compactness_pairwise(std::span<const PreparedVector> vectors,
                                         const Scorer& scorer) {
  require_case_size(vectors.size());
  const std::size_t count = vectors.size();
  std::vector<double> pair(count * count, 0.0);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = i + 1; j < count; ++j) {
      pair[i * count + j] = pair[j * count + i] = scorer.score(vectors[i], vectors[j]);
    }
  }
  const auto n = static_cast<double>(count - 1);
  std::vector<double> scores(count, 0.0);
  for (std::size_t i = 0; i < count; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < count; ++j) {
      if (j != i) sum += pair[i * count + j];
    }
    scores[i] = sum / n;
  }
  return scores;
}

std::vector<double> compactness_pairwise(const std::vector<Vector>& vectors,
                                         const MetricSpec& spec) {
  Scorer scorer(spec);
  return compactness_pairwise(prepare_all(scorer, vectors), scorer);
}

std::vector<double> compactness_prototype(std::span<const PreparedVector> vectors,
                                          const Scorer& scorer) {
  require_case_size(vectors.size());
  std::vector<double> scores(vectors.size(), 0.0);
  std::vector<std::span<const double>> others;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    others.clear();
    for (std::size_t j = 0; j < vectors.size(); ++j) {
      if (j != i) others.push_back(vectors[j].values);
    }
    const Vector prototype = mean_vector(others);
    scores[i] = scorer.score(vectors[i], scorer.prepare(prototype));
  }
  return scores;
}

std::vector<double> compactness_prototype(const std::vector<Vector>& vectors,
                                          const MetricSpec& spec) {
  Scorer scorer(spec);
  return compactness_prototype(prepare_all(scorer, vectors), scorer);
}

std::size_t outlier_position(std::span<const double> scores, std::size_t outlier_index) {
  if (outlier_index >= scores.size()) throw InvalidArgument("outlier index out of range");
  const double outlier = scores[outlier_index];
  std::size_t op = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (i != outlier_index && scores[i] > outlier) ++op;
  }
  return op;
}

std::vector<MissedOutlier> common_errors(std::span<const OutlierReport> reports) {
  if (reports.empty()) return {};
  const auto& reference = reports.front().per_case;
  std::map<std::pair<std::string, std::string>, MissedOutlier> counts;
  for (const auto& report : reports) {
    if (report.per_case.size() != reference.size())
      throw InvalidArgument("common_errors: reports cover different case sets");
    for (std::size_t i = 0; i < reference.size(); ++i) {
      const auto& result = report.per_case[i];
      if (!(result.outlier_case == reference[i].outlier_case))
        throw InvalidArgument("common_errors: reports cover different case sets");
      if (result.od) continue;
      const auto& c = result.outlier_case;
      auto [it, inserted] =
          counts.try_emplace({c.topic, c.outlier}, MissedOutlier{c.topic, c.outlier, c.outlier_class, 0});
      ++it->second.miss_count;
    }
  }
  std::vector<MissedOutlier> out;
  for (auto& [key, missed] : counts) out.push_back(std::move(missed));
  // map order already gives (topic, outlier); stable sort keeps it within equal counts
  std::stable_sort(out.begin(), out.end(), [](const MissedOutlier& a, const MissedOutlier& b) {
    return a.miss_count > b.miss_count;
  });
  return out;
}

OutlierReport aggregate_outlier_results(std::vector<CaseResult> results) {
  if (results.empty()) throw InvalidArgument("no outlier cases to aggregate");
  double position_sum = 0.0;
  std::size_t detected = 0;
  for (const auto& r : results) {
    if (r.n() == 0) throw InvalidArgument("outlier case with no cluster words");
    position_sum += static_cast<double>(r.op) / static_cast<double>(r.n());
    if (r.od) ++detected;
  }
  const auto cases = static_cast<double>(results.size());
  OutlierReport report;
  report.opp = 100.0 * position_sum / cases;
  report.accuracy = 100.0 * static_cast<double>(detected) / cases;
  report.per_case = std::move(results);
  report.missed = common_errors(std::span<const OutlierReport>(&report, 1));
  return report;
}

namespace {

CaseResult evaluate_case(const OutlierCase& c, const EmbeddingMatrix& matrix, const Scorer& scorer,
                         OutlierApproach approach, const PhrasePolicy& policy) {
  const auto words = c.all_words();
  std::vector<ResolvedPhrase> resolved;
  resolved.reserve(words.size());
  for (const auto& word : words) {
    try {
      resolved.push_back(resolve(matrix, word, policy));
    } catch (const OovError&) {
      throw OovError(word, "topic '" + c.topic + "': phrase '" + word + "' is out of vocabulary");
    }
  }
  std::vector<PreparedVector> prepared;
  prepared.reserve(resolved.size());
  for (const auto& r : resolved) prepared.push_back(scorer.prepare(r.values, r.row));

  CaseResult result;
  result.outlier_case = c;
  result.compactness = approach == OutlierApproach::Pairwise
                           ? compactness_pairwise(prepared, scorer)
                           : compactness_prototype(prepared, scorer);
  result.op = outlier_position(result.compactness, c.words.size());
  result.od = result.op == c.words.size();
  return result;
}

}  // namespace

OutlierReport evaluate_outliers(std::span<const OutlierCase> cases, const EmbeddingMatrix& matrix,
                                const MetricSpec& spec, OutlierApproach approach,
                                const PhrasePolicy& policy) {
  if (cases.empty()) throw InvalidArgument("evaluate_outliers needs at least one case");
  RankProfileCache cache(matrix);
  Scorer scorer(spec, &cache);

  std::vector<CaseResult> results(cases.size());
  std::vector<std::exception_ptr> errors(cases.size());
  const std::size_t workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, cases.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < cases.size(); i += workers) {
          try {
            results[i] = evaluate_case(cases[i], matrix, scorer, approach, policy);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (const auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }

  auto report = aggregate_outlier_results(std::move(results));
  report.metric = spec.describe();
  report.approach = approach;
  return report;
}

std::optional<ChiSquareTest> chi_square_accuracy(std::size_t k1, std::size_t n1, std::size_t k2,
                                                 std::size_t n2) {
  if (n1 == 0 || n2 == 0 || k1 > n1 || k2 > n2)
    throw InvalidArgument("chi_square_accuracy needs 0 <= k <= n and n > 0");
  const auto a = static_cast<double>(k1);
  const auto b = static_cast<double>(n1 - k1);
  const auto c = static_cast<double>(k2);
  const auto d = static_cast<double>(n2 - k2);
  const double total = a + b + c + d;
  const double margins = (a + b) * (c + d) * (a + c) * (b + d);
  if (margins == 0.0) return std::nullopt;
  const double diff = a * d - b * c;
  ChiSquareTest out;
  out.chi2 = total * diff * diff / margins;
  // chi-square with one degree of freedom is the square of a standard normal
  out.p = std::erfc(std::sqrt(out.chi2 / 2.0));
  return out;
}

}  // namespace ranksim
