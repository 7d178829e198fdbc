#include "ranksim/report_io.hpp"

#include <cstdio>
#include <ostream>

namespace ranksim {

std::string format_fixed(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  std::string out(buf);
  if (out == "-0.000000") out.erase(0, 1);
  return out;
}

namespace {

nlohmann::json pair_json(const WordPair& pair) {
  return {{"word1", pair.word1}, {"word2", pair.word2}, {"gold", pair.gold}};
}

}  // namespace

nlohmann::json to_json(const SimilarityReport& report) {
  nlohmann::json skipped = nlohmann::json::array();
  for (const auto& pair : report.skipped) skipped.push_back(pair_json(pair));
  return {
      {"dataset", report.dataset},
      {"metric", report.metric},
      {"rho", report.rho},
      {"n_used", report.n_used},
      {"n_skipped_oov", report.n_skipped_oov},
      {"skipped", std::move(skipped)},
  };
}

nlohmann::json to_json(const OutlierReport& report) {
  nlohmann::json cases = nlohmann::json::array();
  for (const auto& result : report.per_case) {
    const auto& c = result.outlier_case;
    nlohmann::json compactness = nlohmann::json::array();
    const auto words = c.all_words();
    for (std::size_t i = 0; i < words.size(); ++i)
      compactness.push_back({{"word", words[i]}, {"score", result.compactness.at(i)}});
    cases.push_back({
        {"topic", c.topic},
        {"outlier", c.outlier},
        {"class", std::string(to_string(c.outlier_class))},
        {"n", result.n()},
        {"op", result.op},
        {"od", result.od ? 1 : 0},
        {"compactness", std::move(compactness)},
    });
  }
  nlohmann::json missed = nlohmann::json::array();
  for (const auto& m : report.missed) {
    missed.push_back({{"topic", m.topic},
                      {"outlier", m.outlier},
                      {"class", std::string(to_string(m.outlier_class))},
                      {"miss_count", m.miss_count}});
  }
  return {
      {"approach", std::string(to_string(report.approach))},
      {"metric", report.metric},
      {"opp", report.opp},
      {"accuracy", report.accuracy},
      {"cases", std::move(cases)},
      {"missed", std::move(missed)},
  };
}

nlohmann::json to_json(const PowerTuning& tuning) {
  nlohmann::json table = nlohmann::json::array();
  for (const auto& row : tuning.table) table.push_back({{"p", row.p}, {"rho", row.rho}});
  return {{"p_best", tuning.p_best}, {"rho_best", tuning.rho_best}, {"table", std::move(table)}};
}

void write_tsv(std::ostream& out, const SimilarityReport& report) {
  out << "dataset\tmetric\trho\tn_used\tn_skipped_oov\n"
      << report.dataset << '\t' << report.metric << '\t' << format_fixed(report.rho) << '\t'
      << report.n_used << '\t' << report.n_skipped_oov << '\n';
}

void write_tsv(std::ostream& out, const OutlierReport& report) {
  out << "approach\tmetric\tOPP\tAccuracy\n"
      << to_string(report.approach) << '\t' << report.metric << '\t' << format_fixed(report.opp)
      << '\t' << format_fixed(report.accuracy) << '\n';
}

void write_tsv(std::ostream& out, const PowerTuning& tuning) {
  out << "p\trho\tbest\n";
  for (const auto& row : tuning.table) {
    out << format_fixed(row.p) << '\t' << format_fixed(row.rho) << '\t'
        << (row.p == tuning.p_best ? 1 : 0) << '\n';
  }
}

}  // namespace ranksim
