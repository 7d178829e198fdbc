#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace ranksim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Runs one `ranksim` invocation. `args` excludes the program name.
/// Reports go to `out` (or the --out file), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct WeightRow {
  std::size_t rank;
  double apsyn_weight;   // 1/r inside the top-N, 0 beyond it
  double apsynp_weight;  // r^-p
};

/// Per-rank contribution of a feature ranked r in both vectors, r = 1..dims.
std::vector<WeightRow> inspect_weights(std::size_t dims, double power, std::size_t top_n);

}  // namespace ranksim::cli
