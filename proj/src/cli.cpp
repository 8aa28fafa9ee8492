#include "inwdt/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "inwdt/correspondence.hpp"
#include "inwdt/image.hpp"
#include "inwdt/metrics.hpp"
#include "inwdt/patches.hpp"

namespace inwdt::cli {
namespace {

using nlohmann::json;

// Argument values that are well-formed flags but unusable together.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr const char* kFormatsHelp = R"(
Formats:
  images     8-bit RGB PNG or JPEG in; PNG out (clamped, rounded half away from zero)
  flow       Middlebury .flo: float32 202021.25, int32 width, int32 height,
             then width*height (dx, dy) float32 pairs, little-endian, row-major
  trace      CSV with header iteration,l2,wall_ms; one row per iteration
  manifest   JSON document holding the resolved configuration of a transfer run

Exit codes: 0 success, 1 runtime failure (I/O, decoding), 2 usage error.)";

std::string utc_timestamp(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string absolute_or_empty(const std::string& p) {
  return p.empty() ? p : std::filesystem::absolute(p).lexically_normal().string();
}

json manifest_json(const TransferOptions& o, const TransferConfig& cfg, const TransferResult& r,
                   const std::string& started, const std::string& finished) {
  json j;
  j["tool"] = "inwdt";
  j["version"] = INWDT_VERSION;
  j["started_at"] = started;
  j["finished_at"] = finished;
  j["source"] = absolute_or_empty(o.source);
  j["target"] = absolute_or_empty(o.target);
  j["flow"] = o.identity_flow ? json(nullptr) : json(absolute_or_empty(o.flow));
  j["identity_flow"] = o.identity_flow;
  j["variant"] = to_string(o.variant);
  j["mapper"] = cfg.mapper == Mapper::kNadarayaWatson ? "nadaraya_watson" : "optimal_transport";
  j["patch_size"] = o.patch_size;
  j["with_position"] = cfg.layout.with_position;
  j["feature_dimension"] = cfg.layout.dimension();
  j["position_scale"] = cfg.position_scale;
  j["bandwidth"] = o.bandwidth;
  j["max_iterations"] = o.max_iterations;
  j["rel_tol"] = o.rel_tol;
  j["grid_size"] = o.grid_size;
  j["seed"] = o.seed;
  j["l2_directions"] = o.l2_directions;
  j["l2_subsample"] = o.l2_subsample;
  j["fit_stride"] = o.fit_stride;
  j["out"] = absolute_or_empty(o.out);
  j["trace"] = absolute_or_empty(o.trace);
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["final_l2"] = r.trace.records.empty() ? 0.0 : r.trace.records.back().l2;
  return j;
}

TransferOptions options_from_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("malformed manifest " + path + ": " + e.what());
  }
  try {
    TransferOptions o;
    o.source = j.at("source").get<std::string>();
    o.target = j.at("target").get<std::string>();
    o.identity_flow = j.at("identity_flow").get<bool>();
    if (!o.identity_flow) o.flow = j.at("flow").get<std::string>();
    const auto variant = parse_variant(j.at("variant").get<std::string>());
    if (!variant) throw UsageError("unknown variant in manifest " + path);
    o.variant = *variant;
    o.patch_size = j.at("patch_size").get<int>();
    o.bandwidth = j.at("bandwidth").get<double>();
    o.max_iterations = j.at("max_iterations").get<int>();
    o.rel_tol = j.at("rel_tol").get<double>();
    o.grid_size = j.at("grid_size").get<std::size_t>();
    o.seed = j.at("seed").get<std::uint64_t>();
    o.l2_directions = j.at("l2_directions").get<std::size_t>();
    o.l2_subsample = j.at("l2_subsample").get<std::size_t>();
    o.fit_stride = j.at("fit_stride").get<std::size_t>();
    o.position_scale = j.at("position_scale").get<double>();
    o.out = j.at("out").get<std::string>();
    o.trace = j.at("trace").get<std::string>();
    return o;
  } catch (const json::exception& e) {
    throw UsageError("incomplete manifest " + path + ": " + e.what());
  }
}

int cmd_transfer(TransferOptions opts, std::ostream& out) {
  const auto started = std::chrono::system_clock::now();
  if (opts.out.empty()) throw UsageError("--out is required");
  if (opts.identity_flow == !opts.flow.empty()) {
    throw UsageError("exactly one of --flow or --identity-flow is required");
  }
  if (opts.patch_size < 1 || opts.patch_size % 2 == 0) throw UsageError("--patch-size must be odd and >= 1");

  const ImageBuffer source = load_image(opts.source);
  const ImageBuffer target = load_image(opts.target);
  const CorrespondenceField field =
      opts.identity_flow ? identity_field(source.width(), source.height()) : load_flo(opts.flow);
  if (field.width() != source.width() || field.height() != source.height()) {
    throw UsageError("flow field size does not match the source image");
  }
  if (!opts.position_scale) opts.position_scale = default_position_scale(source.width(), source.height());

  const TransferConfig cfg = to_config(opts);
  try {
    validate(cfg);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const PatchPairSet pairs = build_pairs(source, target, field, cfg.layout, cfg.position_scale);
  const TransferResult result = run_transfer(pairs, cfg);
  const ImageBuffer recoloured = merge_candidates(result.x, pairs.width, pairs.height, cfg.layout);
  save_image(recoloured, opts.out);
  if (!opts.trace.empty()) result.trace.write_csv(opts.trace, opts.trace_timing);
  if (!opts.manifest.empty()) {
    std::ofstream m(opts.manifest, std::ios::trunc);
    if (!m) throw std::runtime_error("cannot write manifest: " + opts.manifest);
    m << manifest_json(opts, cfg, result, utc_timestamp(started),
                       utc_timestamp(std::chrono::system_clock::now()))
             .dump(2)
      << '\n';
  }
  out << "iterations=" << result.iterations << " converged=" << (result.converged ? "yes" : "no")
      << " d=" << cfg.layout.dimension() << '\n';
  return kExitOk;
}

int cmd_metrics(const std::string& a_path, const std::string& b_path, std::ostream& out) {
  const ImageBuffer a = load_image(a_path);
  const ImageBuffer b = load_image(b_path);
  if (a.width() != b.width() || a.height() != b.height()) {
    throw UsageError("images differ in size");
  }
  if (a.width() < kSsimWindow || a.height() < kSsimWindow) {
    throw UsageError("images must be at least 11x11 for SSIM");
  }
  const double p = psnr(a, b);
  const double s = ssim(a, b);
  out << "psnr_db,ssim\n";
  if (std::isinf(p)) {
    out << "inf";
  } else {
    out << std::fixed << std::setprecision(6) << p;
  }
  out << ',' << std::fixed << std::setprecision(6) << s << '\n';
  return kExitOk;
}

int cmd_make_identity_flow(int width, int height, const std::string& path) {
  if (width < 1 || height < 1) throw UsageError("--width and --height must be >= 1");
  write_flo(identity_field(width, height), path);
  return kExitOk;
}

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kNwColour:
      return "nw_c";
    case Variant::kNwColourPosition:
      return "nw_cp";
    case Variant::kOptimalTransport:
      return "ot";
  }
  return "nw_cp";
}

std::optional<Variant> parse_variant(const std::string& name) {
  if (name == "nw_c") return Variant::kNwColour;
  if (name == "nw_cp") return Variant::kNwColourPosition;
  if (name == "ot") return Variant::kOptimalTransport;
  return std::nullopt;
}

TransferConfig to_config(const TransferOptions& opts) {
  TransferConfig cfg;
  cfg.layout.patch_size = opts.patch_size;
  cfg.layout.with_position = opts.variant == Variant::kNwColourPosition;
  cfg.mapper = opts.variant == Variant::kOptimalTransport ? Mapper::kOptimalTransport
                                                          : Mapper::kNadarayaWatson;
  cfg.position_scale = opts.position_scale.value_or(1.0);
  cfg.bandwidth = opts.bandwidth;
  cfg.max_iterations = opts.max_iterations;
  cfg.rel_tol = opts.rel_tol;
  cfg.grid_size = opts.grid_size;
  cfg.seed = opts.seed;
  cfg.l2_directions = opts.l2_directions;
  cfg.l2_subsample = opts.l2_subsample;
  cfg.fit_stride = opts.fit_stride;
  cfg.threads = opts.threads;
  return cfg;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Correspondence-guided colour transfer (iterative Nadaraya-Watson distribution transfer)",
               "inwdt"};
  app.footer(kFormatsHelp);
  app.require_subcommand(1);

  TransferOptions topts;
  std::string variant_name = "nw_cp";
  std::string from_manifest;
  bool no_timing = false;
  double position_scale = 0.0;
  auto* transfer = app.add_subcommand("transfer", "Recolour --source to match --target");
  transfer->add_option("--source", topts.source, "Source image (recoloured)");
  transfer->add_option("--target", topts.target, "Target image (colour reference)");
  transfer->add_option("--flow", topts.flow, "Middlebury .flo field, source pixel -> target pixel");
  transfer->add_flag("--identity-flow", topts.identity_flow, "Treat the pair as registered (zero flow)");
  transfer->add_option("--variant", variant_name, "nw_c (colour patches), nw_cp (colour+position) or ot")
      ->check(CLI::IsMember({"nw_c", "nw_cp", "ot"}))
      ->capture_default_str();
  transfer->add_option("--patch-size", topts.patch_size, "Odd patch side m")->capture_default_str();
  transfer->add_option("--bandwidth", topts.bandwidth, "Kernel bandwidth h on the 0-255 scale")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  transfer->add_option("--max-iters", topts.max_iterations, "Iteration cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  transfer->add_option("--rel-tol", topts.rel_tol, "Stop when L2 improves less than this over 3 iterations")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  transfer->add_option("--grid-size", topts.grid_size, "Minimum 1D mapping grid size")
      ->check(CLI::Range(std::size_t{2}, std::size_t{1} << 22))
      ->capture_default_str();
  transfer->add_option("--seed", topts.seed, "Random seed")->capture_default_str();
  auto* scale_opt = transfer->add_option("--position-scale", position_scale,
                                         "Multiplier for pixel coordinates (default 255/max(W-1,H-1,1))")
                        ->check(CLI::PositiveNumber);
  transfer->add_option("--l2-directions", topts.l2_directions, "Probe directions for the L2 monitor")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  transfer->add_option("--l2-subsample", topts.l2_subsample, "Max points for the L2 monitor")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  transfer->add_option("--fit-stride", topts.fit_stride, "Fit 1D mappings on every k-th pair")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  auto* out_opt = transfer->add_option("--out", topts.out, "Output PNG");
  auto* trace_opt = transfer->add_option("--trace", topts.trace, "Write the convergence trace CSV here");
  transfer->add_option("--manifest", topts.manifest, "Write the run manifest here");
  transfer->add_option("--threads", topts.threads, "Worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  transfer->add_flag("--no-timing", no_timing, "Write wall_ms as 0 in the trace (byte-reproducible)");
  auto* from_opt = transfer->add_option("--from-manifest", from_manifest,
                                        "Re-run from a manifest; --out/--trace/--manifest/--threads override");
  for (const char* name : {"--source", "--target", "--flow", "--identity-flow", "--variant", "--patch-size",
                           "--bandwidth", "--max-iters", "--rel-tol", "--grid-size", "--seed",
                           "--position-scale", "--l2-directions", "--l2-subsample", "--fit-stride"}) {
    from_opt->excludes(name);
  }

  std::string metric_a;
  std::string metric_b;
  auto* metrics = app.add_subcommand("metrics", "Print psnr_db,ssim of two same-sized images as CSV");
  metrics->add_option("reference", metric_a, "First image")->required();
  metrics->add_option("test", metric_b, "Second image")->required();

  int flow_w = 0;
  int flow_h = 0;
  std::string flow_out;
  auto* make_flow = app.add_subcommand("make-identity-flow", "Write a zero-displacement .flo file");
  make_flow->add_option("--width", flow_w, "Width in pixels")->required();
  make_flow->add_option("--height", flow_h, "Height in pixels")->required();
  make_flow->add_option("--out", flow_out, "Output .flo path")->required();

  // CLI11 consumes arguments from the back, without the program name.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (transfer->parsed()) {
      if (!from_manifest.empty()) {
        TransferOptions m = options_from_manifest(from_manifest);
        if (out_opt->count() > 0) m.out = topts.out;
        if (trace_opt->count() > 0) m.trace = topts.trace;
        m.manifest = topts.manifest;
        m.threads = topts.threads;
        topts = std::move(m);
      } else {
        if (topts.source.empty() || topts.target.empty()) throw UsageError("--source and --target are required");
        topts.variant = *parse_variant(variant_name);
        if (scale_opt->count() > 0) topts.position_scale = position_scale;
      }
      topts.trace_timing = !no_timing;
      return cmd_transfer(std::move(topts), out);
    }
    if (metrics->parsed()) return cmd_metrics(metric_a, metric_b, out);
    if (make_flow->parsed()) return cmd_make_identity_flow(flow_w, flow_h, flow_out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace inwdt::cli
