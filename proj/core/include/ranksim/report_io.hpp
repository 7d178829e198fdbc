#pragma once

#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "ranksim/outlier_eval.hpp"
#include "ranksim/similarity_eval.hpp"

namespace ranksim {

/// Fixed six-decimal rendering used by every TSV writer.
std::string format_fixed(double value);

nlohmann::json to_json(const SimilarityReport& report);
nlohmann::json to_json(const OutlierReport& report);
nlohmann::json to_json(const PowerTuning& tuning);

// TSV writers emit a header row followed by data rows.

/// Columns: dataset, metric, rho, n_used, n_skipped_oov.
void write_tsv(std::ostream& out, const SimilarityReport& report);
/// Columns: approach, metric, OPP, Accuracy.
void write_tsv(std::ostream& out, const OutlierReport& report);
/// Columns: p, rho, best (1 on the selected row).
void write_tsv(std::ostream& out, const PowerTuning& tuning);

}  // namespace ranksim
