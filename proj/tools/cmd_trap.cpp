#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli_common.hpp"
#include "commands.hpp"
#include "resodrive/constants.hpp"
#include "resodrive/netlist.hpp"
#include "resodrive/trap/fields.hpp"

// `trap`: solve the electrode basis potentials, map the pseudopotential for
// both drive schemes, and compare them (axial suppression, radial
// anisotropy, secular frequencies, Mathieu parameters, parametric dips).

namespace resodrive::cli {

namespace {

struct TrapOptions {
  CommonOptions common;
  int grid = 41;
  std::vector<std::string> interpret;
};

std::pair<trap::Modulation, double> parse_interpret(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos)
    throw InputError("--interpret wants rf:<freq> or ec:<freq>, got \"" + s +
                     "\"");
  const std::string kind = s.substr(0, colon);
  trap::Modulation mod;
  if (kind == "rf")
    mod = trap::Modulation::RfAmplitude;
  else if (kind == "ec")
    mod = trap::Modulation::EndcapVoltage;
  else
    throw InputError("--interpret kind must be rf or ec, got \"" + kind +
                     "\"");
  const auto value = netlist::parse_value(s.substr(colon + 1));
  if (!value)
    throw InputError("--interpret frequency \"" + s.substr(colon + 1) +
                     "\" is not a number");
  return {mod, *value};
}

const char* scheme_label(trap::DriveScheme s) {
  return s == trap::DriveScheme::SinglePhase ? "single_phase" : "two_phase";
}

void write_map(const std::filesystem::path& path,
               const trap::BasisSolution& basis,
               const trap::DriveConfig& drive, const trap::IonSpec& ion,
               const std::vector<Eigen::Vector3d>& grid_points) {
  const double q = ion.charge;
  const double denom = 4.0 * ion.mass * drive.omega * drive.omega;
  std::string csv =
      "x_m,y_m,z_m,pseudopotential_j,pseudopotential_ev,e_mag,e_x,e_y,e_z\n";
  for (const auto& p : grid_points) {
    if (trap::inside_conductor(basis.mesh->geometry, p)) continue;
    const Eigen::Vector3cd e = trap::rf_field(basis, drive, p);
    const double phi_j = q * q * e.squaredNorm() / denom;
    csv_field(csv, p.x(), true);
    csv_field(csv, p.y(), false);
    csv_field(csv, p.z(), false);
    csv_field(csv, phi_j, false);
    csv_field(csv, phi_j / constants::elementary_charge, false);
    csv_field(csv, e.norm(), false);
    csv_field(csv, e.x().real(), false);
    csv_field(csv, e.y().real(), false);
    csv_field(csv, e.z().real(), false);
    csv += "\n";
  }
  write_text_file(path, csv);
}

ordered_json scheme_json(const trap::BasisSolution& basis,
                         const trap::DriveConfig& drive,
                         const trap::IonSpec& ion) {
  const auto sec = trap::secular_frequencies(basis, drive, ion);
  const auto mat = trap::mathieu_parameters(basis, drive, ion);
  ordered_json j;
  j["secular_hz"] = {{"x", sec.omega.x() / constants::two_pi},
                     {"y", sec.omega.y() / constants::two_pi},
                     {"z", sec.omega.z() / constants::two_pi}};
  j["minimum_m"] = {sec.minimum.x(), sec.minimum.y(), sec.minimum.z()};
  j["newton_iterations"] = sec.newton_iterations;
  j["mathieu"] = {{"q", {mat.q.x(), mat.q.y(), mat.q.z()}},
                  {"a", {mat.a.x(), mat.a.y(), mat.a.z()}},
                  {"laplace_ratio", mat.laplace_ratio},
                  {"stable", mat.stable}};
  return j;
}

void run_trap(const TrapOptions& opts) {
  if (!opts.interpret.empty()) {
    for (const auto& s : opts.interpret) {
      const auto [mod, dip] = parse_interpret(s);
      const double f = trap::interpret_parametric_scan(mod, dip);
      std::printf("%s-modulation dip at %s -> trap frequency %s\n",
                  mod == trap::Modulation::RfAmplitude ? "rf-amplitude"
                                                       : "endcap-voltage",
                  format_engineering(dip, "Hz").c_str(),
                  format_engineering(f, "Hz").c_str());
    }
    return;
  }

  config::RunConfig cfg = load_config(opts.common);
  if (!cfg.has_trap)
    throw InputError("config " + opts.common.config_path +
                     " has no trap section");
  const auto out_dir = resolve_out_dir(opts.common, &cfg);

  const auto mesh =
      std::make_shared<const trap::Mesh>(trap::build_mesh(cfg.trap_geometry));
  std::fprintf(stderr, "mesh: %zu panels\n", mesh->panels.size());
  const auto basis = trap::solve_basis(mesh);
  std::fprintf(stderr, "basis solved, boundary residual %s V\n",
               format_fixed(basis.self_check_residual, 4).c_str());

  trap::DriveConfig two = cfg.drive;
  two.scheme = trap::DriveScheme::TwoPhase;
  trap::DriveConfig single = cfg.drive;
  single.scheme = trap::DriveScheme::SinglePhase;
  const trap::IonSpec ion = cfg.ion;

  const double rho0 = cfg.trap_geometry.ion_rod_distance;
  const double z0 = cfg.trap_geometry.ion_endcap_distance;
  const int n = opts.grid;

  // z-r plane: radial coordinate along x at y = 0.
  std::vector<Eigen::Vector3d> zr, xy;
  zr.reserve(static_cast<std::size_t>(n) * n);
  xy.reserve(static_cast<std::size_t>(n) * n);
  for (int iz = 0; iz < n; ++iz)
    for (int ix = 0; ix < n; ++ix) {
      const double z = -1.2 * z0 + 2.4 * z0 * iz / (n - 1);
      const double x = -0.5 * rho0 + rho0 * ix / (n - 1);
      zr.emplace_back(x, 0.0, z);
    }
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const double y = -0.5 * rho0 + rho0 * iy / (n - 1);
      const double x = -0.5 * rho0 + rho0 * ix / (n - 1);
      xy.emplace_back(x, y, 0.0);
    }
  write_map(out_dir / "map_zr_two_phase.csv", basis, two, ion, zr);
  write_map(out_dir / "map_zr_single_phase.csv", basis, single, ion, zr);
  write_map(out_dir / "map_xy_two_phase.csv", basis, two, ion, xy);
  write_map(out_dir / "map_xy_single_phase.csv", basis, single, ion, xy);

  // Axial suppression at (0, 0, z0/2).
  const Eigen::Vector3d axial_probe(0.0, 0.0, z0 / 2.0);
  const double ez_single =
      std::abs(trap::rf_field(basis, single, axial_probe).z());
  const double ez_two = std::abs(trap::rf_field(basis, two, axial_probe).z());
  const double mm_single =
      trap::micromotion_amplitude(basis, single, ion, axial_probe).z();
  const double mm_two =
      trap::micromotion_amplitude(basis, two, ion, axial_probe).z();

  // Radial anisotropy: pseudopotential imbalance between the x and y
  // directions at rho0/4.
  auto anisotropy = [&](const trap::DriveConfig& drive) {
    const double px =
        trap::pseudopotential(basis, drive, ion, {rho0 / 4.0, 0.0, 0.0});
    const double py =
        trap::pseudopotential(basis, drive, ion, {0.0, rho0 / 4.0, 0.0});
    return std::abs(px - py) / std::max(std::max(px, py), 1e-300);
  };

  ordered_json doc;
  doc["mesh"] = {{"panels", mesh->panels.size()},
                 {"boundary_residual_v", basis.self_check_residual}};
  doc["drive"] = {{"v_pp", cfg.drive.v_pp},
                  {"frequency_hz", cfg.drive.omega / constants::two_pi},
                  {"endcap_dc", cfg.drive.endcap_dc}};
  doc["axial"] = {{"probe_z_m", axial_probe.z()},
                  {"e_z_single", ez_single},
                  {"e_z_two", ez_two},
                  {"suppression", ez_single / std::max(ez_two, 1e-300)},
                  {"micromotion_single_m", mm_single},
                  {"micromotion_two_m", mm_two}};
  doc["radial_anisotropy"] = {{"probe_m", rho0 / 4.0},
                              {"single_phase", anisotropy(single)},
                              {"two_phase", anisotropy(two)}};
  doc["schemes"] = ordered_json::object();
  doc["schemes"]["single_phase"] = scheme_json(basis, single, ion);
  doc["schemes"]["two_phase"] = scheme_json(basis, two, ion);

  // Parametric-scan table for the configured scheme: where excitation dips
  // appear and what trap frequency they decode to.
  const auto& primary =
      doc["schemes"][scheme_label(cfg.drive.scheme)]["secular_hz"];
  doc["parametric_scan"] = ordered_json::array();
  for (const char* axis : {"x", "y", "z"}) {
    const double f = primary[axis].get<double>();
    doc["parametric_scan"].push_back(
        {{"axis", axis},
         {"secular_hz", f},
         {"rf_amplitude_dip_hz", 2.0 * f},
         {"rf_amplitude_decoded_hz",
          trap::interpret_parametric_scan(trap::Modulation::RfAmplitude,
                                          2.0 * f)},
         {"endcap_voltage_dip_hz", f},
         {"endcap_voltage_decoded_hz",
          trap::interpret_parametric_scan(trap::Modulation::EndcapVoltage,
                                          f)}});
  }

  ordered_json cap = ordered_json::array();
  for (int r = 0; r < 6; ++r) {
    ordered_json row = ordered_json::array();
    for (int c = 0; c < 6; ++c) row.push_back(basis.capacitance(r, c) * 1e15);
    cap.push_back(row);
  }
  doc["capacitance_fF"] = cap;
  write_json_file(out_dir / "trap_comparison.json", doc);

  std::printf("axial E_z at z0/2: single %s, two %s, suppression %s\n",
              format_engineering(ez_single, "V/m").c_str(),
              format_engineering(ez_two, "V/m").c_str(),
              format_fixed(ez_single / std::max(ez_two, 1e-300), 4).c_str());
  std::printf("radial anisotropy at rho0/4: single %s, two %s\n",
              format_fixed(anisotropy(single), 4).c_str(),
              format_fixed(anisotropy(two), 4).c_str());
  for (const char* scheme : {"single_phase", "two_phase"}) {
    const auto& s = doc["schemes"][scheme];
    std::printf("%s: f = (%s, %s, %s), stable %s\n", scheme,
                format_engineering(s["secular_hz"]["x"].get<double>(), "Hz")
                    .c_str(),
                format_engineering(s["secular_hz"]["y"].get<double>(), "Hz")
                    .c_str(),
                format_engineering(s["secular_hz"]["z"].get<double>(), "Hz")
                    .c_str(),
                s["mathieu"]["stable"].get<bool>() ? "yes" : "no");
  }
}

}  // namespace

void register_trap(CLI::App& app) {
  auto opts = std::make_shared<TrapOptions>();
  CLI::App* cmd = app.add_subcommand(
      "trap", "Electrostatic trap maps and drive-scheme comparison");
  cmd->add_option("--config", opts->common.config_path,
                  "JSON run configuration (trap section required)");
  cmd->add_option("--out", opts->common.out_dir, "Output directory");
  cmd->add_option("--grid", opts->grid, "Map grid points per axis")
      ->check(CLI::Range(5, 401));
  cmd->add_option("--interpret", opts->interpret,
                  "Decode parametric dips, e.g. rf:2e6 or ec:300k "
                  "(skips the field solve)");
  cmd->callback([opts] { run_trap(*opts); });
}

}  // namespace resodrive::cli
