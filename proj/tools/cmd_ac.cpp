#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli_common.hpp"
#include "commands.hpp"
#include "resodrive/analysis.hpp"
#include "resodrive/constants.hpp"
#include "resodrive/geometry.hpp"
#include "resodrive/mna.hpp"
#include "resodrive/netlist.hpp"

// `ac`: run a frequency sweep on a netlist file or on the circuit derived
// from the config, write the sweep CSV and a resonance report, and compare
// stages when asked.

namespace resodrive::cli {

namespace {

struct AcOptions {
  CommonOptions common;
  std::string netlist_path;
  std::string stage;  // bare | +biastee | +trap | all (config mode)
  int refine_points = 2001;
  double threshold = 0.9;
};

netlist::Netlist parse_netlist_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("netlist file not readable: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  auto result = netlist::parse(buf.str());
  for (const auto& d : result.diagnostics)
    std::fprintf(stderr, "%s:%d: %s: %s\n", path.c_str(), d.line,
                 d.severity == netlist::Diagnostic::Severity::Error
                     ? "error"
                     : "warning",
                 d.message.c_str());
  if (!result.ok())
    throw InputError("netlist " + path + " failed to parse");
  return std::move(*result.netlist);
}

struct RunOutput {
  bool has_lower = false;
  bool lower_refined = false;
  analysis::RefinedResonance lower;
  int dip_count = 0;
};

std::string csv_header(const netlist::Netlist& n) {
  std::string line = "f_hz,re_zin,im_zin,s11_mag,s11_phase_deg";
  for (const auto& node : n.probes)
    line += ",mag_" + node + ",phase_deg_" + node;
  line += "\n";
  return line;
}

// Sweeps, finds and refines dips, writes <base>_sweep.csv and
// <base>_resonances.json.
RunOutput run_ac_once(const netlist::Netlist& n, const std::string& base,
                      const std::filesystem::path& out_dir,
                      const AcOptions& opts) {
  if (n.ports.empty())
    throw InputError("netlist declares no .port; reflection analysis "
                     "needs one");
  const auto& port = n.ports.front();
  const double z0 = port.reference_impedance;

  mna::SweepResult sweep = mna::run_sweep(n);

  std::string csv = csv_header(n);
  for (std::size_t i = 0; i < sweep.frequencies.size(); ++i) {
    const auto z = sweep.port_impedance[0][i];
    const auto s = analysis::s11(z, z0);
    csv_field(csv, sweep.frequencies[i], true);
    csv_field(csv, z.real(), false);
    csv_field(csv, z.imag(), false);
    csv_field(csv, std::abs(s), false);
    csv_field(csv, std::arg(s) * 180.0 / constants::pi, false);
    for (const auto& node : n.probes) {
      const auto v = sweep.points[i].node_voltage(node);
      csv_field(csv, std::abs(v), false);
      csv_field(csv, std::arg(v) * 180.0 / constants::pi, false);
    }
    csv += "\n";
  }
  write_text_file(out_dir / (base + "_sweep.csv"), csv);

  const auto dips = analysis::find_resonances(sweep, 0, opts.threshold);

  ordered_json doc;
  doc["source"] = base;
  doc["title"] = n.title;
  doc["z0_ohm"] = z0;
  doc["threshold"] = opts.threshold;
  doc["resonances"] = ordered_json::array();

  RunOutput out;
  out.dip_count = static_cast<int>(dips.size());
  auto plan = mna::make_plan(n);
  for (const auto& dip : dips) {
    // A dip whose impedance phase never swings far enough has no measurable
    // Q (e.g. a barely coupled mode); report it without one instead of
    // failing the whole sweep.
    analysis::RefinedResonance refined;
    std::string refine_error;
    try {
      refined = analysis::refine_resonance(n, sweep, 0, dip,
                                           opts.refine_points, opts.threshold);
    } catch (const UnderResolvedError& e) {
      refined.resonance = dip;
      refine_error = e.what();
    }
    const auto& res = refined.resonance;
    ordered_json entry;
    entry["kind"] = res.kind_hint == analysis::Resonance::Kind::Lower
                        ? "lower"
                        : (res.kind_hint == analysis::Resonance::Kind::Upper
                               ? "upper"
                               : "other");
    entry["frequency_hz"] = res.frequency;
    entry["s11_magnitude"] = res.s11_magnitude;
    entry["q_factor"] = res.q_factor;
    if (refine_error.empty()) {
      entry["q_band"] = {{"f_low_hz", refined.q.f_low},
                         {"f_high_hz", refined.q.f_high},
                         {"points_in_band", refined.q.points_in_band},
                         {"under_resolved", refined.q.under_resolved}};
    } else {
      entry["q_band"] = nullptr;
      entry["refine_error"] = refine_error;
    }

    const auto sol = mna::solve_at(plan, res.frequency);
    const auto phases = analysis::phase_report(sol, n.probes);
    ordered_json pairs = ordered_json::array();
    for (const auto& p : phases.pairs)
      pairs.push_back({{"node_a", p.node_a},
                       {"node_b", p.node_b},
                       {"phase_deg", p.phase_deg},
                       {"amplitude_ratio", p.amplitude_ratio}});
    entry["phase_pairs"] = pairs;
    doc["resonances"].push_back(entry);

    if (res.kind_hint == analysis::Resonance::Kind::Lower) {
      out.has_lower = true;
      out.lower = refined;
      out.lower_refined = refine_error.empty();
    }
    std::printf("%s: %s dip %s, |S11| = %s, Q = %s\n", base.c_str(),
                entry["kind"].get<std::string>().c_str(),
                format_engineering(res.frequency, "Hz").c_str(),
                format_fixed(res.s11_magnitude, 4).c_str(),
                refine_error.empty() ? format_fixed(res.q_factor, 5).c_str()
                                     : "unresolved");
  }
  if (dips.empty())
    std::printf("%s: no |S11| dips below %s in the sweep window\n",
                base.c_str(), format_fixed(opts.threshold, 3).c_str());
  write_json_file(out_dir / (base + "_resonances.json"), doc);
  return out;
}

struct StageDef {
  const char* label;
  geometry::CircuitStage stage;
};

void run_ac(const AcOptions& opts) {
  const bool from_file = !opts.netlist_path.empty();
  const bool from_config = !opts.common.config_path.empty();
  if (from_file == from_config)
    throw InputError(
        "give either a netlist file or --config <file>, not both");
  if (!opts.stage.empty() && !from_config)
    throw InputError("--stage applies to config-derived circuits; "
                     "use it together with --config");

  if (from_file) {
    const auto n = parse_netlist_file(opts.netlist_path);
    const auto out_dir = resolve_out_dir(opts.common, nullptr);
    const std::string base =
        std::filesystem::path(opts.netlist_path).stem().string();
    run_ac_once(n, base, out_dir, opts);
    return;
  }

  config::RunConfig cfg = load_config(opts.common);
  if (!cfg.has_geometry)
    throw InputError("config " + opts.common.config_path +
                     " has no geometry section");
  const auto out_dir = resolve_out_dir(opts.common, &cfg);

  auto derive = [&](geometry::CircuitStage stage) {
    geometry::CircuitOptions circuit = cfg.circuit_options();
    circuit.stage = stage;
    return geometry::derive_circuit(cfg.resonator, cfg.wires, cfg.material,
                                    circuit);
  };

  if (opts.stage != "all") {
    geometry::CircuitStage stage = cfg.stage;
    std::string label = "full";
    if (!opts.stage.empty()) {
      if (opts.stage == "bare")
        stage = geometry::CircuitStage::BareResonator;
      else if (opts.stage == "+biastee")
        stage = geometry::CircuitStage::WithBiasTee;
      else if (opts.stage == "+trap")
        stage = geometry::CircuitStage::FullSystem;
      else
        throw InputError("--stage must be bare, +biastee, +trap or all, "
                         "got \"" +
                         opts.stage + "\"");
    }
    if (stage == geometry::CircuitStage::BareResonator) label = "bare";
    if (stage == geometry::CircuitStage::WithBiasTee) label = "biastee";
    run_ac_once(derive(stage).netlist, "stage_" + label, out_dir, opts);
    return;
  }

  // Stage comparison: bare -> +biastee -> +trap, lower dip per stage.
  static const StageDef stages[] = {
      {"bare", geometry::CircuitStage::BareResonator},
      {"biastee", geometry::CircuitStage::WithBiasTee},
      {"full", geometry::CircuitStage::FullSystem},
  };
  std::vector<double> lower_hz;
  ordered_json shifts;
  shifts["threshold"] = opts.threshold;
  shifts["stages"] = ordered_json::array();
  for (const auto& def : stages) {
    const auto result = run_ac_once(derive(def.stage).netlist,
                                    std::string("stage_") + def.label,
                                    out_dir, opts);
    if (!result.has_lower)
      throw DomainViolation(std::string("stage ") + def.label +
                            " shows no reflection dip below the threshold; "
                            "cannot compare stages");
    if (!result.lower_refined)
      throw UnderResolvedError(
          std::string("stage ") + def.label +
          ": the lowest reflection dip could not be refined; the stage "
          "comparison needs a resolved resonance");
    lower_hz.push_back(result.lower.resonance.frequency);
    shifts["stages"].push_back(
        {{"stage", def.label},
         {"f_lower_hz", result.lower.resonance.frequency},
         {"s11_magnitude", result.lower.resonance.s11_magnitude},
         {"q_factor", result.lower.resonance.q_factor}});
  }
  shifts["fractional_shifts"] = ordered_json::array();
  for (std::size_t i = 0; i + 1 < lower_hz.size(); ++i) {
    const double shift = (lower_hz[i] - lower_hz[i + 1]) / lower_hz[i];
    shifts["fractional_shifts"].push_back(
        {{"from", stages[i].label},
         {"to", stages[i + 1].label},
         {"shift", shift}});
  }
  write_json_file(out_dir / "stage_shifts.json", shifts);
  std::printf("stage lower dips: bare %s -> biastee %s -> full %s\n",
              format_engineering(lower_hz[0], "Hz").c_str(),
              format_engineering(lower_hz[1], "Hz").c_str(),
              format_engineering(lower_hz[2], "Hz").c_str());
}

}  // namespace

void register_ac(CLI::App& app) {
  auto opts = std::make_shared<AcOptions>();
  CLI::App* cmd = app.add_subcommand(
      "ac", "Frequency sweep with reflection and resonance analysis");
  cmd->add_option("netlist", opts->netlist_path,
                  "Netlist file (alternative to --config)");
  cmd->add_option("--config", opts->common.config_path,
                  "JSON run configuration (derives the circuit)");
  cmd->add_option("--stage", opts->stage,
                  "Circuit stage: bare, +biastee, +trap, or all for the "
                  "three-stage comparison");
  cmd->add_option("--out", opts->common.out_dir, "Output directory");
  cmd->add_option("--points", opts->refine_points,
                  "Dense grid size for dip refinement")
      ->check(CLI::Range(5, 2000000));
  cmd->add_option("--threshold", opts->threshold,
                  "|S11| level that counts as a dip")
      ->check(CLI::Range(0.0, 1.0));
  cmd->callback([opts] { run_ac(*opts); });
}

}  // namespace resodrive::cli
