#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "resodrive/netlist.hpp"

// Tolerance analysis: perturb every passive value of a circuit by a bounded
// random relative amount, re-locate the lower reflection dip per sample, and
// collect distributions of its frequency and of the electrode phase balance.
//
// Draws are a pure function of (seed, sample index, component name), so runs
// are reproducible bit-for-bit regardless of thread count or sample order,
// and adding a component does not reshuffle the draws of existing ones.

namespace resodrive::montecarlo {

enum class Distribution {
  Uniform,          // epsilon ~ U[-bound, +bound]
  NormalTruncated,  // sigma = bound/2, truncated at +/-2 sigma (= +/-bound)
};

struct PerturbationSpec {
  double relative_bound = 0.10;  // in [0, 1)
  Distribution distribution = Distribution::Uniform;
  // Component/coupling names to perturb; empty means every R, L, C value and
  // every coupling coefficient.  Matching is case-insensitive.
  std::vector<std::string> included_components;
  int samples = 1000;
  std::uint64_t seed = 1;
};

// Deterministically perturbs each included value v -> v*(1+eps).
netlist::Netlist perturb(const netlist::Netlist& n, const PerturbationSpec& spec,
                         int sample_index);

struct Stats {
  double mean = 0.0;
  double std_dev = 0.0;  // sample standard deviation (n-1)
  double min = 0.0;
  double max = 0.0;
  int count = 0;
};

struct Histogram {
  std::vector<double> edges;  // size counts.size()+1, strictly increasing
  std::vector<int> counts;
};

struct SampleRow {
  int index = 0;
  bool ok = false;
  bool widened = false;          // sweep window was auto-widened once
  std::string failure_reason;    // empty when ok
  double f_lower_hz = 0.0;       // refined lower-dip frequency
  double q_lower = 0.0;          // quality factor at the lower dip
  // Phase across the opposite-electrode pair (nominally in phase, 0 deg).
  std::optional<double> phi_opp_deg;
  // Deviation of the resonator output pair from perfect antiphase, i.e.
  // wrap(arg V(a) - arg V(b) - 180 deg); nominally 0.
  std::optional<double> phi_out_dev_deg;
};

struct McOptions {
  // Node pairs evaluated at each sample's own resonance.  A pair is skipped
  // (per sample and in aggregates) when either node is absent.
  std::pair<std::string, std::string> opposite_pair = {"V1", "V3"};
  std::pair<std::string, std::string> output_pair = {"N1", "N2"};
  int refine_points = 801;     // dense local grid per sample
  double dip_threshold = 0.9;  // |S11| below this counts as a dip
  int threads = 0;             // 0 = hardware concurrency
};

struct McReport {
  int samples = 0;
  int failures = 0;
  int widened = 0;
  bool failed = false;  // more than 10% of samples failed

  Stats f_lower;           // Hz, over successful samples
  Histogram f_lower_hist;  // 30 uniform bins over [min, max]

  bool has_phi_opp = false;
  Stats phi_opp;               // degrees, nominal 0
  double phi_opp_median_abs = 0.0;
  double phi_opp_max_abs = 0.0;

  bool has_phi_out = false;
  Stats phi_out_dev;           // degrees from antiphase, nominal 0
  double phi_out_dev_max_abs = 0.0;

  std::map<std::string, int> failure_reasons;
  std::vector<SampleRow> rows;  // ordered by sample index

  // Wall-clock measurement; reported on stderr only, never serialized, so
  // repeated runs produce byte-identical reports.
  double elapsed_seconds = 0.0;
};

// Runs the full analysis.  Requires the netlist's own sweep window to contain
// the nominal lower dip with some margin; throws MonteCarloError otherwise.
McReport run(const netlist::Netlist& n, const PerturbationSpec& spec,
             const McOptions& options = {});

}  // namespace resodrive::montecarlo
