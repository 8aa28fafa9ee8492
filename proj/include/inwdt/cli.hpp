#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "inwdt/transfer.hpp"

namespace inwdt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

enum class Variant { kNwColour, kNwColourPosition, kOptimalTransport };

// "nw_c", "nw_cp" or "ot".
std::string to_string(Variant v);
std::optional<Variant> parse_variant(const std::string& name);

// Everything needed to reproduce one `transfer` run.
struct TransferOptions {
  std::string source;
  std::string target;
  std::string flow;  // empty with identity_flow
  bool identity_flow = false;
  Variant variant = Variant::kNwColourPosition;
  int patch_size = 3;
  double bandwidth = 5.0;
  int max_iterations = 30;
  double rel_tol = 0.01;
  std::size_t grid_size = kDefaultGridSize;
  std::uint64_t seed = 0;
  std::size_t l2_directions = 32;
  std::size_t l2_subsample = 20000;
  std::size_t fit_stride = 1;
  std::optional<double> position_scale;  // default derived from the source size
  std::string out;
  std::string trace;
  std::string manifest;
  unsigned threads = 1;
  bool trace_timing = true;
};

// Resolves variant-dependent fields; position_scale must already be set.
TransferConfig to_config(const TransferOptions& opts);

// argv-style entry point (args[0] is the program name). Writes normal
// output to `out` and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace inwdt::cli
