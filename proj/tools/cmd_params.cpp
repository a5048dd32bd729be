#include <cstdio>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "cli_common.hpp"
#include "commands.hpp"
#include "resodrive/geometry.hpp"

// `params`: derive every lumped element from the configured geometry and
// print a provenance table (value, origin, formula detail).

namespace resodrive::cli {

namespace {

const char* origin_label(geometry::ProvenanceEntry::Origin o) {
  switch (o) {
    case geometry::ProvenanceEntry::Origin::Formula:
      return "derived";
    case geometry::ProvenanceEntry::Origin::MeasuredDefault:
      return "measured default";
    case geometry::ProvenanceEntry::Origin::Override:
      return "override (measured)";
  }
  return "?";
}

struct ParamsOptions {
  CommonOptions common;
  std::string stage;  // empty -> config value
};

geometry::CircuitStage stage_from_flag(const std::string& flag,
                                       geometry::CircuitStage fallback) {
  if (flag.empty()) return fallback;
  if (flag == "bare") return geometry::CircuitStage::BareResonator;
  if (flag == "+biastee") return geometry::CircuitStage::WithBiasTee;
  if (flag == "+trap") return geometry::CircuitStage::FullSystem;
  throw InputError("--stage must be bare, +biastee or +trap, got \"" + flag +
                   "\"");
}

void run_params(const ParamsOptions& opts) {
  config::RunConfig cfg = load_config(opts.common);
  if (!cfg.has_geometry)
    throw InputError("config " + opts.common.config_path +
                     " has no geometry section");
  geometry::CircuitOptions circuit = cfg.circuit_options();
  circuit.stage = stage_from_flag(opts.stage, circuit.stage);

  const auto derived =
      geometry::derive_circuit(cfg.resonator, cfg.wires, cfg.material, circuit);

  std::printf("%-8s %-14s %-20s %s\n", "symbol", "value", "origin", "detail");
  for (const auto& row : derived.provenance) {
    const std::string value = format_engineering(row.value, row.unit == "1"
                                                                ? ""
                                                                : row.unit);
    std::printf("%-8s %-14s %-20s %s\n", row.symbol.c_str(), value.c_str(),
                origin_label(row.origin), row.detail.c_str());
  }

  // Constituent values that fold into the rows above, printed for
  // inspection against design tables.
  const double height = cfg.resonator.height();
  const double c_coil =
      geometry::coil_self_capacitance(height, cfg.resonator.coil_diameter);
  const double c_shield = geometry::coil_shield_capacitance(
      height, cfg.resonator.coil_diameter, cfg.resonator.shield_diameter);
  const double delta = geometry::skin_depth(circuit.resistance_eval_frequency,
                                            cfg.material);
  std::printf("\nconstituents:\n");
  std::printf("  C_coil   = %s (single-coil stray capacitance)\n",
              format_engineering(c_coil, "F").c_str());
  std::printf("  C_shield = %s (coil-to-shield capacitance)\n",
              format_engineering(c_shield, "F").c_str());
  std::printf("  delta    = %s (skin depth at %s)\n",
              format_engineering(delta, "m").c_str(),
              format_engineering(circuit.resistance_eval_frequency, "Hz")
                  .c_str());

  std::printf("\ncoil-to-coil coupling:\n");
  std::printf("  M (single-loop model)    = %s\n",
              format_engineering(derived.coupling.mutual_single_loop, "H")
                  .c_str());
  std::printf("  k (loop normalization)   = %s\n",
              format_fixed(derived.coupling.k_loop_normalized, 4).c_str());
  std::printf("  k (helix normalization)  = %s\n",
              format_fixed(derived.coupling.k_helix_normalized, 4).c_str());
  std::printf("  k (stamped)              = %s\n",
              format_fixed(derived.coupling.k_used, 4).c_str());
}

}  // namespace

void register_params(CLI::App& app) {
  auto opts = std::make_shared<ParamsOptions>();
  CLI::App* cmd = app.add_subcommand(
      "params", "Derive lumped circuit values from the configured geometry");
  cmd->add_option("--config", opts->common.config_path,
                  "JSON run configuration (geometry section required)")
      ->required();
  cmd->add_option("--stage", opts->stage,
                  "Override circuit stage: bare, +biastee or +trap");
  cmd->callback([opts] { run_params(*opts); });
}

}  // namespace resodrive::cli
