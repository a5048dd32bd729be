#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cli_common.hpp"
#include "commands.hpp"
#include "resodrive/geometry.hpp"
#include "resodrive/montecarlo.hpp"
#include "resodrive/netlist.hpp"

// `mc`: perturb the circuit within component tolerances, re-locate the lower
// reflection dip per sample, and report the distributions of its frequency
// and of the electrode phase balance.

namespace resodrive::cli {

namespace {

struct McCliOptions {
  CommonOptions common;
  std::string netlist_path;
  std::optional<int> samples;
  std::optional<std::uint64_t> seed;
  std::optional<double> bound;
  std::optional<std::string> distribution;
  std::vector<std::string> components;
  std::optional<int> threads;
};

netlist::Netlist mc_netlist(const McCliOptions& opts,
                            const config::RunConfig* cfg) {
  if (!opts.netlist_path.empty()) {
    std::ifstream in(opts.netlist_path, std::ios::binary);
    if (!in)
      throw InputError("netlist file not readable: " + opts.netlist_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    auto result = netlist::parse(buf.str());
    for (const auto& d : result.diagnostics)
      std::fprintf(stderr, "%s:%d: %s: %s\n", opts.netlist_path.c_str(),
                   d.line,
                   d.severity == netlist::Diagnostic::Severity::Error
                       ? "error"
                       : "warning",
                   d.message.c_str());
    if (!result.ok())
      throw InputError("netlist " + opts.netlist_path + " failed to parse");
    return std::move(*result.netlist);
  }
  if (!cfg)
    throw InputError("give either a netlist file or --config <file>");
  if (!cfg->has_geometry)
    throw InputError("config has no geometry section to derive the circuit "
                     "from");
  return geometry::derive_circuit(cfg->resonator, cfg->wires, cfg->material,
                                  cfg->circuit_options())
      .netlist;
}

ordered_json stats_json(const montecarlo::Stats& s) {
  return {{"mean", s.mean},       {"std_dev", s.std_dev},
          {"min", s.min},         {"max", s.max},
          {"count", s.count},     {"null_variance", s.count < 2}};
}

void run_mc(const McCliOptions& opts) {
  std::optional<config::RunConfig> cfg;
  if (!opts.common.config_path.empty())
    cfg = config::load(opts.common.config_path);
  if (!opts.netlist_path.empty() && cfg)
    throw InputError("give either a netlist file or --config, not both");

  const netlist::Netlist n = mc_netlist(opts, cfg ? &*cfg : nullptr);

  montecarlo::PerturbationSpec spec;
  if (cfg && cfg->has_montecarlo) spec = cfg->mc;
  if (opts.samples) spec.samples = *opts.samples;
  if (opts.seed) spec.seed = *opts.seed;
  if (opts.bound) spec.relative_bound = *opts.bound;
  if (opts.distribution) {
    if (*opts.distribution == "uniform")
      spec.distribution = montecarlo::Distribution::Uniform;
    else if (*opts.distribution == "normal")
      spec.distribution = montecarlo::Distribution::NormalTruncated;
    else
      throw InputError("--distribution must be uniform or normal, got \"" +
                       *opts.distribution + "\"");
  }
  if (!opts.components.empty()) spec.included_components = opts.components;

  montecarlo::McOptions mc_options;
  mc_options.threads = opts.threads ? *opts.threads : env_threads();

  const auto report = montecarlo::run(n, spec, mc_options);
  std::fprintf(stderr, "%d samples in %.2f s (%d failed, %d widened)\n",
               report.samples, report.elapsed_seconds, report.failures,
               report.widened);

  const auto out_dir = resolve_out_dir(opts.common, cfg ? &*cfg : nullptr);

  ordered_json doc;
  doc["samples"] = report.samples;
  doc["failures"] = report.failures;
  doc["widened"] = report.widened;
  doc["failed"] = report.failed;
  doc["seed"] = spec.seed;
  doc["relative_bound"] = spec.relative_bound;
  doc["distribution"] =
      spec.distribution == montecarlo::Distribution::Uniform ? "uniform"
                                                             : "normal";
  doc["f_lower_hz"] = stats_json(report.f_lower);
  if (report.has_phi_opp) {
    doc["phi_opp_deg"] = stats_json(report.phi_opp);
    doc["phi_opp_deg"]["median_abs"] = report.phi_opp_median_abs;
    doc["phi_opp_deg"]["max_abs"] = report.phi_opp_max_abs;
  } else {
    doc["phi_opp_deg"] = nullptr;
  }
  if (report.has_phi_out) {
    doc["phi_out_dev_deg"] = stats_json(report.phi_out_dev);
    doc["phi_out_dev_deg"]["max_abs"] = report.phi_out_dev_max_abs;
  } else {
    doc["phi_out_dev_deg"] = nullptr;
  }
  doc["failure_reasons"] = ordered_json::object();
  for (const auto& [reason, count] : report.failure_reasons)
    doc["failure_reasons"][reason] = count;
  doc["rows"] = ordered_json::array();
  for (const auto& row : report.rows) {
    ordered_json r;
    r["index"] = row.index;
    r["ok"] = row.ok;
    r["widened"] = row.widened;
    if (row.ok) {
      r["f_lower_hz"] = row.f_lower_hz;
      r["q_lower"] = row.q_lower;
      if (row.phi_opp_deg) r["phi_opp_deg"] = *row.phi_opp_deg;
      if (row.phi_out_dev_deg) r["phi_out_dev_deg"] = *row.phi_out_dev_deg;
    } else {
      r["failure_reason"] = row.failure_reason;
    }
    doc["rows"].push_back(r);
  }
  write_json_file(out_dir / "mc_report.json", doc);

  std::string hist = "bin_start_hz,bin_end_hz,count\n";
  for (std::size_t i = 0; i < report.f_lower_hist.counts.size(); ++i) {
    csv_field(hist, report.f_lower_hist.edges[i], true);
    csv_field(hist, report.f_lower_hist.edges[i + 1], false);
    hist += "," + std::to_string(report.f_lower_hist.counts[i]) + "\n";
  }
  write_text_file(out_dir / "mc_histogram.csv", hist);

  std::printf("f_lower = %s +- %s over %d samples",
              format_engineering(report.f_lower.mean, "Hz").c_str(),
              format_engineering(report.f_lower.std_dev, "Hz").c_str(),
              report.f_lower.count);
  if (report.f_lower.count < 2) std::printf(" (null variance)");
  std::printf("\n");
  if (report.has_phi_opp)
    std::printf("max |phi_opp| = %s deg (median |.| = %s deg)\n",
                format_fixed(report.phi_opp_max_abs, 6).c_str(),
                format_fixed(report.phi_opp_median_abs, 6).c_str());
  if (report.has_phi_out)
    std::printf("max |phi_out - 180 deg| = %s deg\n",
                format_fixed(report.phi_out_dev_max_abs, 6).c_str());

  if (report.failed)
    throw MonteCarloError(
        std::to_string(report.failures) + " of " +
        std::to_string(report.samples) +
        " samples failed (more than 10%); distributions unreliable");
}

}  // namespace

void register_mc(CLI::App& app) {
  auto opts = std::make_shared<McCliOptions>();
  CLI::App* cmd = app.add_subcommand(
      "mc", "Monte-Carlo tolerance analysis of the lower resonance");
  cmd->add_option("netlist", opts->netlist_path,
                  "Netlist file (alternative to --config)");
  cmd->add_option("--config", opts->common.config_path,
                  "JSON run configuration");
  cmd->add_option("--out", opts->common.out_dir, "Output directory");
  cmd->add_option("--samples", opts->samples, "Number of samples")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", opts->seed, "Random seed");
  cmd->add_option("--bound", opts->bound,
                  "Relative perturbation bound, e.g. 0.10")
      ->check(CLI::Range(0.0, 0.999));
  cmd->add_option("--distribution", opts->distribution,
                  "uniform or normal (truncated at +-2 sigma)");
  cmd->add_option("--components", opts->components,
                  "Only perturb these component names");
  cmd->add_option("--threads", opts->threads,
                  "Worker threads (default: RESODRIVE_THREADS or all cores)");
  cmd->callback([opts] { run_mc(*opts); });
}

}  // namespace resodrive::cli
