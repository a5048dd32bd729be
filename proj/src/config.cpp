#include "resodrive/config.hpp"

#include <cctype>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "resodrive/constants.hpp"
#include "resodrive/errors.hpp"

namespace resodrive::config {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& origin, const std::string& pointer,
                       const std::string& what) {
  throw InputError("config " + origin + ": " + pointer + " " + what);
}

// Strict object walker: every handled key is looked up through get(); any
// key the schema never asked about is reported with its JSON pointer.
class Section {
 public:
  Section(const json& node, std::string pointer, const std::string& origin)
      : node_(node), pointer_(std::move(pointer)), origin_(origin) {
    if (!node_.is_object())
      fail(origin_, pointer_.empty() ? "/" : pointer_, "must be an object");
  }

  const json* get(const char* key) {
    seen_.push_back(key);
    auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  double number(const char* key, double fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_number()) fail(origin_, at(key), "must be a number");
    return v->get<double>();
  }

  int integer(const char* key, int fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) fail(origin_, at(key), "must be an integer");
    return v->get<int>();
  }

  std::string text(const char* key, const std::string& fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_string()) fail(origin_, at(key), "must be a string");
    return v->get<std::string>();
  }

  std::string choice(const char* key, const std::string& fallback,
                     std::initializer_list<const char*> allowed) {
    std::string s = text(key, fallback);
    for (const char* a : allowed)
      if (s == a) return s;
    std::string opts;
    for (const char* a : allowed) {
      if (!opts.empty()) opts += ", ";
      opts += '"';
      opts += a;
      opts += '"';
    }
    fail(origin_, at(key), "must be one of " + opts + ", got \"" + s + "\"");
  }

  std::string at(const char* key) const { return pointer_ + "/" + key; }

  // Call after all schema keys were consumed.
  void finish() {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      bool known = false;
      for (const auto& s : seen_)
        if (it.key() == s) {
          known = true;
          break;
        }
      if (!known)
        fail(origin_, pointer_ + "/" + it.key(),
             "is not a recognized config key");
    }
  }

  const json& node() const { return node_; }
  const std::string& pointer() const { return pointer_; }
  const std::string& origin() const { return origin_; }

 private:
  const json& node_;
  std::string pointer_;
  const std::string& origin_;
  std::vector<std::string> seen_;
};

void parse_geometry(Section& root, RunConfig& out) {
  const json* node = root.get("geometry");
  if (!node) return;
  out.has_geometry = true;
  Section s(*node, "/geometry", root.origin());
  auto& g = out.resonator;
  g.coil_diameter = s.number("coil_diameter", g.coil_diameter);
  g.wire_thickness = s.number("wire_thickness", g.wire_thickness);
  g.pitch = s.number("pitch", g.pitch);
  g.turns = s.integer("turns", g.turns);
  g.coil_height = s.number("coil_height", g.coil_height);
  g.shield_diameter = s.number("shield_diameter", g.shield_diameter);
  g.shield_length = s.number("shield_length", g.shield_length);
  g.coil_separation = s.number("coil_separation", g.coil_separation);

  if (const json* w = s.get("wires")) {
    Section ws(*w, "/geometry/wires", root.origin());
    out.wires.length = ws.number("length", out.wires.length);
    out.wires.radius = ws.number("radius", out.wires.radius);
    out.wires.separation = ws.number("separation", out.wires.separation);
    out.wires.height = ws.number("height", out.wires.height);
    ws.finish();
  }
  if (const json* m = s.get("material")) {
    Section ms(*m, "/geometry/material", root.origin());
    out.material.resistivity =
        ms.number("resistivity", out.material.resistivity);
    out.material.permeability =
        ms.number("permeability", out.material.permeability);
    ms.finish();
  }
  s.finish();
}

void parse_circuit(Section& root, RunConfig& out) {
  const json* node = root.get("circuit");
  if (!node) return;
  out.has_circuit = true;
  Section s(*node, "/circuit", root.origin());
  std::string stage = s.choice("stage", "full", {"bare", "biastee", "full"});
  out.stage = stage == "bare"
                  ? geometry::CircuitStage::BareResonator
                  : (stage == "biastee" ? geometry::CircuitStage::WithBiasTee
                                        : geometry::CircuitStage::FullSystem);
  if (const json* o = s.get("overrides")) {
    if (!o->is_object())
      fail(root.origin(), "/circuit/overrides", "must be an object");
    for (auto it = o->begin(); it != o->end(); ++it) {
      if (!it.value().is_number())
        fail(root.origin(), "/circuit/overrides/" + it.key(),
             "must be a number");
      out.overrides[it.key()] = it.value().get<double>();
    }
  }
  out.resistance_eval_frequency =
      s.number("resistance_eval_frequency_hz", out.resistance_eval_frequency);
  out.trap_lead_length = s.number("trap_lead_length", out.trap_lead_length);
  out.trap_lead_radius = s.number("trap_lead_radius", out.trap_lead_radius);
  s.finish();
}

void parse_sweep(Section& root, RunConfig& out) {
  const json* node = root.get("sweep");
  if (!node) return;
  out.has_sweep = true;
  Section s(*node, "/sweep", root.origin());
  std::string scale = s.choice("scale", "lin", {"lin", "dec"});
  out.sweep.scale = scale == "lin" ? netlist::SweepScale::Linear
                                   : netlist::SweepScale::Decade;
  out.sweep.points = s.integer("points", out.sweep.points);
  out.sweep.f_start = s.number("f_start_hz", out.sweep.f_start);
  out.sweep.f_stop = s.number("f_stop_hz", out.sweep.f_stop);
  if (out.sweep.points < 2)
    fail(root.origin(), "/sweep/points", "must be at least 2");
  if (!(out.sweep.f_start > 0.0) || !(out.sweep.f_stop > out.sweep.f_start))
    fail(root.origin(), "/sweep", "needs 0 < f_start_hz < f_stop_hz");
  s.finish();
}

void parse_montecarlo(Section& root, RunConfig& out) {
  const json* node = root.get("montecarlo");
  if (!node) return;
  out.has_montecarlo = true;
  Section s(*node, "/montecarlo", root.origin());
  auto& mc = out.mc;
  mc.relative_bound = s.number("relative_bound", mc.relative_bound);
  if (!(mc.relative_bound >= 0.0) || mc.relative_bound >= 1.0)
    fail(root.origin(), "/montecarlo/relative_bound", "must be in [0, 1)");
  std::string dist = s.choice(
      "distribution",
      mc.distribution == montecarlo::Distribution::Uniform ? "uniform"
                                                           : "normal",
      {"uniform", "normal"});
  mc.distribution = dist == "uniform"
                        ? montecarlo::Distribution::Uniform
                        : montecarlo::Distribution::NormalTruncated;
  mc.samples = s.integer("samples", mc.samples);
  if (mc.samples < 1)
    fail(root.origin(), "/montecarlo/samples", "must be at least 1");
  {
    const json* seed = s.get("seed");
    if (seed) {
      if (!seed->is_number_unsigned())
        fail(root.origin(), "/montecarlo/seed",
             "must be a non-negative integer");
      mc.seed = seed->get<std::uint64_t>();
    }
  }
  if (const json* comp = s.get("components")) {
    if (!comp->is_array())
      fail(root.origin(), "/montecarlo/components",
           "must be an array of component names");
    for (std::size_t i = 0; i < comp->size(); ++i) {
      const json& e = (*comp)[i];
      if (!e.is_string())
        fail(root.origin(), "/montecarlo/components/" + std::to_string(i),
             "must be a string");
      mc.included_components.push_back(e.get<std::string>());
    }
  }
  s.finish();
}

void parse_trap(Section& root, RunConfig& out) {
  const json* node = root.get("trap");
  if (!node) return;
  out.has_trap = true;
  Section s(*node, "/trap", root.origin());

  if (const json* g = s.get("geometry")) {
    Section gs(*g, "/trap/geometry", root.origin());
    auto& t = out.trap_geometry;
    t.rod_radius = gs.number("rod_radius", t.rod_radius);
    t.rod_length = gs.number("rod_length", t.rod_length);
    t.ion_rod_distance = gs.number("ion_rod_distance", t.ion_rod_distance);
    t.ion_endcap_distance =
        gs.number("ion_endcap_distance", t.ion_endcap_distance);
    t.endcap_radius = gs.number("endcap_radius", t.endcap_radius);
    t.panels_per_electrode =
        gs.integer("panels_per_electrode", t.panels_per_electrode);
    gs.finish();
  }

  if (const json* d = s.get("drive")) {
    Section ds(*d, "/trap/drive", root.origin());
    auto& drive = out.drive;
    std::string scheme =
        ds.choice("scheme",
                  drive.scheme == trap::DriveScheme::TwoPhase ? "two_phase"
                                                              : "single_phase",
                  {"single_phase", "two_phase"});
    drive.scheme = scheme == "two_phase" ? trap::DriveScheme::TwoPhase
                                         : trap::DriveScheme::SinglePhase;
    drive.v_pp = ds.number("v_pp", drive.v_pp);
    drive.omega =
        constants::two_pi * ds.number("frequency_hz", 30e6);
    drive.endcap_dc = ds.number("endcap_dc", drive.endcap_dc);
    if (const json* bias = ds.get("electrode_dc_bias")) {
      if (!bias->is_array() || bias->size() != 4)
        fail(root.origin(), "/trap/drive/electrode_dc_bias",
             "must be an array of 4 rod voltages (+x, +y, -x, -y)");
      for (int i = 0; i < 4; ++i) {
        const json& e = (*bias)[i];
        if (!e.is_number())
          fail(root.origin(),
               "/trap/drive/electrode_dc_bias/" + std::to_string(i),
               "must be a number");
        drive.electrode_dc_bias[static_cast<std::size_t>(i)] =
            e.get<double>();
      }
    }
    if (const json* rf = ds.get("endcap_rf_amplitude")) {
      if (rf->is_number()) {
        drive.endcap_rf = rf->get<double>();
      } else if (rf->is_array() && rf->size() == 2 && (*rf)[0].is_number() &&
                 (*rf)[1].is_number()) {
        drive.endcap_rf = {(*rf)[0].get<double>(), (*rf)[1].get<double>()};
      } else {
        fail(root.origin(), "/trap/drive/endcap_rf_amplitude",
             "must be a number or a [real, imaginary] pair");
      }
    }
    ds.finish();
  } else {
    // A trap section without an explicit drive still needs a frequency.
    out.drive.omega = constants::two_pi * 30e6;
  }

  if (const json* i = s.get("ion")) {
    Section is(*i, "/trap/ion", root.origin());
    const double mass_u = is.number("mass_u", 171.0);
    const double charge_e = is.number("charge_e", 1.0);
    if (!(mass_u > 0.0))
      fail(root.origin(), "/trap/ion/mass_u", "must be positive");
    out.ion.mass = mass_u * constants::atomic_mass_unit;
    out.ion.charge = charge_e * constants::elementary_charge;
    is.finish();
  }
  s.finish();
}

}  // namespace

geometry::CircuitOptions RunConfig::circuit_options() const {
  geometry::CircuitOptions opts;
  opts.stage = stage;
  opts.overrides = overrides;
  opts.sweep = sweep;
  opts.resistance_eval_frequency = resistance_eval_frequency;
  opts.trap_lead_length = trap_lead_length;
  opts.trap_lead_radius = trap_lead_radius;
  return opts;
}

RunConfig parse(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError("config " + origin + ": " + e.what());
  }
  RunConfig out;
  Section root(doc, "", origin);
  parse_geometry(root, out);
  parse_circuit(root, out);
  parse_sweep(root, out);
  parse_montecarlo(root, out);
  parse_trap(root, out);
  out.output_dir = root.text("output_dir", out.output_dir);
  root.finish();
  return out;
}

RunConfig load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("config file not readable: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

}  // namespace resodrive::config
