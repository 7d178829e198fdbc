#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ranksim/embedding_store.hpp"
#include "ranksim/errors.hpp"
#include "ranksim/outlier_eval.hpp"
#include "ranksim/rank_metrics.hpp"
#include "ranksim/report_io.hpp"
#include "ranksim/similarity_eval.hpp"

namespace ranksim::cli {

std::vector<WeightRow> inspect_weights(std::size_t dims, double power, std::size_t top_n) {
  if (dims < 1) throw InvalidArgument("inspect-weights needs dims >= 1");
  if (!(power > 0.0 && power < 1.0)) throw InvalidArgument("inspect-weights needs 0 < p < 1");
  if (top_n < 1 || top_n > dims) throw InvalidArgument("inspect-weights needs 1 <= N <= dims");
  std::vector<WeightRow> rows;
  rows.reserve(dims);
  for (std::size_t r = 1; r <= dims; ++r) {
    const auto rank = static_cast<double>(r);
    rows.push_back({r, r <= top_n ? 1.0 / rank : 0.0, 1.0 / std::pow(rank, power)});
  }
  return rows;
}

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string embeddings;
  std::string emb_format = "auto";
  std::string metric = "apsynp";
  std::optional<double> power;
  std::optional<std::size_t> top_n;
  std::string approach = "pairwise";
  std::string format = "tsv";
  std::string out_path;
  bool lowercase_fallback = false;
  bool strict_oov = false;
  std::string grid;
  std::string to_format = "w2v-text";
  std::size_t dims = 300;

  MetricSpec metric_spec() const {
    MetricSpec spec;
    spec.kind = *parse_metric_kind(metric);
    if (power && spec.kind != MetricKind::APSynP) throw UsageError("--p applies only to --metric apsynp");
    if (top_n && spec.kind != MetricKind::APSyn) throw UsageError("--N applies only to --metric apsyn");
    if (power) spec.power = *power;
    spec.top_n = top_n;
    spec.validate();
    return spec;
  }

  PhrasePolicy phrase_policy() const {
    PhrasePolicy policy;
    policy.lookup.lowercase_fallback = lowercase_fallback;
    return policy;
  }

  bool json() const { return format == "json"; }

  EmbeddingMatrix load_matrix() const {
    if (embeddings.empty())
      throw UsageError("no embeddings given (use --embeddings or RANKSIM_EMBEDDINGS)");
    const std::filesystem::path path(embeddings);
    auto fmt = emb_format == "auto" ? guess_embedding_format(path) : *parse_embedding_format(emb_format);
    return load_embeddings(path, fmt);
  }
};

void add_embedding_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--embeddings", cfg.embeddings, "Embedding file")->envname("RANKSIM_EMBEDDINGS");
  cmd->add_option("--emb-format", cfg.emb_format, "Embedding file format")
      ->check(CLI::IsMember({"auto", "w2v-text", "w2v-bin", "glove"}));
  cmd->add_flag("--lowercase-fallback", cfg.lowercase_fallback,
                "Retry lookups with the lowercased word");
}

void add_metric_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--metric", cfg.metric, "Similarity metric")
      ->check(CLI::IsMember({"cosine", "apsyn", "apsynp", "spearman"}));
  cmd->add_option("--p", cfg.power, "APSynP power, 0 < p < 1 (default 0.1)");
  cmd->add_option("--N", cfg.top_n, "APSyn overlap depth (default: all dimensions)");
}

void add_output_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--format", cfg.format, "Report format")->check(CLI::IsMember({"tsv", "json"}));
  cmd->add_option("--out", cfg.out_path, "Write the report to this file instead of stdout");
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    try {
      std::size_t used = 0;
      grid.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw UsageError("bad --grid value '" + item + "'");
    }
  }
  if (grid.empty()) throw UsageError("--grid is empty");
  return grid;
}

void run_sim(const RunConfig& cfg, const std::string& w1, const std::string& w2, std::ostream& out,
             std::ostream& err) {
  const auto spec = cfg.metric_spec();
  const auto matrix = cfg.load_matrix();
  const auto policy = cfg.phrase_policy();

  std::optional<double> score;
  try {
    auto a = resolve_phrase(matrix, w1, policy);
    auto b = resolve_phrase(matrix, w2, policy);
    score = similarity(spec, a, b);
  } catch (const OovError& e) {
    if (cfg.strict_oov) throw;
    err << "warning: " << e.what() << '\n';
  }

  if (cfg.json()) {
    nlohmann::json doc = {{"word1", w1}, {"word2", w2}, {"metric", spec.describe()}};
    doc["score"] = score ? nlohmann::json(*score) : nlohmann::json(nullptr);
    out << doc.dump(2) << '\n';
  } else {
    out << (score ? format_fixed(*score) : std::string("NA")) << '\n';
  }
}

void run_eval_sim(const RunConfig& cfg, const std::string& dataset_path, std::ostream& out) {
  const auto spec = cfg.metric_spec();
  const auto dataset = load_pair_dataset(dataset_path);
  const auto matrix = cfg.load_matrix();
  const auto report =
      evaluate_similarity(dataset, matrix, spec, cfg.phrase_policy(), {cfg.strict_oov});
  if (cfg.json())
    out << to_json(report).dump(2) << '\n';
  else
    write_tsv(out, report);
}

void run_eval_outlier(const RunConfig& cfg, const std::string& dir, std::ostream& out) {
  const auto spec = cfg.metric_spec();
  const auto topics = load_888_directory(dir);
  const auto cases = expand_cases(topics);
  const auto matrix = cfg.load_matrix();
  const auto report = evaluate_outliers(cases, matrix, spec, *parse_outlier_approach(cfg.approach),
                                        cfg.phrase_policy());
  if (cfg.json())
    out << to_json(report).dump(2) << '\n';
  else
    write_tsv(out, report);
}

void run_tune_p(const RunConfig& cfg, const std::string& dataset_path, std::ostream& out) {
  std::optional<std::vector<double>> grid;
  if (!cfg.grid.empty()) grid = parse_grid(cfg.grid);
  const auto dataset = load_pair_dataset(dataset_path);
  const auto matrix = cfg.load_matrix();
  const auto policy = cfg.phrase_policy();
  const auto tuning = grid ? tune_power(dataset, matrix, *grid, policy)
                           : tune_power(dataset, matrix, policy);
  if (cfg.json())
    out << to_json(tuning).dump(2) << '\n';
  else
    write_tsv(out, tuning);
}

void run_inspect_weights(const RunConfig& cfg, std::ostream& out) {
  const auto rows = inspect_weights(cfg.dims, cfg.power.value_or(kDefaultPower),
                                    cfg.top_n.value_or(cfg.dims));
  if (cfg.json()) {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& row : rows) {
      doc.push_back({{"rank", row.rank},
                     {"apsyn_weight", row.apsyn_weight},
                     {"apsynp_weight", row.apsynp_weight}});
    }
    out << doc.dump(2) << '\n';
    return;
  }
  out << "rank\tapsyn_weight\tapsynp_weight\n";
  for (const auto& row : rows) {
    out << row.rank << '\t' << format_fixed(row.apsyn_weight) << '\t'
        << format_fixed(row.apsynp_weight) << '\n';
  }
}

void run_convert(const RunConfig& cfg, std::ostream& out) {
  const auto matrix = cfg.load_matrix();
  write_embeddings(out, matrix, *parse_embedding_format(cfg.to_format));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rank-based similarity metrics and intrinsic evaluation for word embeddings",
               "ranksim"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string word1;
  std::string word2;
  std::string target;

  auto* sim = app.add_subcommand("sim", "Score one word pair");
  sim->add_option("word1", word1)->required();
  sim->add_option("word2", word2)->required();
  add_embedding_options(sim, cfg);
  add_metric_options(sim, cfg);
  add_output_options(sim, cfg);
  sim->add_flag("--strict-oov", cfg.strict_oov, "Fail when a word is out of vocabulary");

  auto* eval_sim = app.add_subcommand("eval-sim", "Spearman correlation against a gold pair dataset");
  eval_sim->add_option("dataset", target)->required();
  add_embedding_options(eval_sim, cfg);
  add_metric_options(eval_sim, cfg);
  add_output_options(eval_sim, cfg);
  eval_sim->add_flag("--strict-oov", cfg.strict_oov, "Fail instead of skipping OOV pairs");

  auto* eval_outlier = app.add_subcommand("eval-outlier", "Outlier detection over a topic directory");
  eval_outlier->add_option("dir", target)->required();
  add_embedding_options(eval_outlier, cfg);
  add_metric_options(eval_outlier, cfg);
  add_output_options(eval_outlier, cfg);
  eval_outlier->add_option("--approach", cfg.approach, "Compactness approach")
      ->check(CLI::IsMember({"pairwise", "prototype"}));

  auto* tune = app.add_subcommand("tune-p", "Grid-search the APSynP power on a dev dataset");
  tune->add_option("dataset", target)->required();
  add_embedding_options(tune, cfg);
  add_output_options(tune, cfg);
  tune->add_option("--grid", cfg.grid, "Comma-separated powers (default: coarse+fine search)");

  auto* weights = app.add_subcommand("inspect-weights", "Per-rank weights of APSyn and APSynP");
  weights->add_option("--dims", cfg.dims, "Number of ranks")->check(CLI::PositiveNumber);
  weights->add_option("--p", cfg.power, "APSynP power (default 0.1)");
  weights->add_option("--N", cfg.top_n, "APSyn overlap depth (default: dims)");
  add_output_options(weights, cfg);

  auto* convert = app.add_subcommand("convert", "Rewrite an embedding file in another format");
  add_embedding_options(convert, cfg);
  convert->add_option("--to", cfg.to_format, "Output format")
      ->check(CLI::IsMember({"w2v-text", "w2v-bin", "glove"}));
  convert->add_option("--out", cfg.out_path, "Output file (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return kExitUsage;
  }

  std::ostringstream report(std::ios::out | std::ios::binary);
  try {
    if (*sim) run_sim(cfg, word1, word2, report, err);
    else if (*eval_sim) run_eval_sim(cfg, target, report);
    else if (*eval_outlier) run_eval_outlier(cfg, target, report);
    else if (*tune) run_tune_p(cfg, target, report);
    else if (*weights) run_inspect_weights(cfg, report);
    else if (*convert) run_convert(cfg, report);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }

  if (cfg.out_path.empty()) {
    out << report.str();
  } else {
    std::ofstream file(cfg.out_path, std::ios::binary);
    if (!file) {
      err << "error: cannot write " << cfg.out_path << '\n';
      return kExitData;
    }
    file << report.str();
  }
  return kExitOk;
}

}  // namespace ranksim::cli
