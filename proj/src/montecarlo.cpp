#include "resodrive/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <thread>

#include "resodrive/analysis.hpp"
#include "resodrive/errors.hpp"
#include "resodrive/format.hpp"
#include "resodrive/mna.hpp"
#include "resodrive/rng.hpp"

namespace resodrive::montecarlo {

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

double draw_epsilon(const PerturbationSpec& spec, int sample_index,
                    std::string_view name) {
  const double u =
      rng::uniform01(spec.seed, static_cast<std::uint64_t>(sample_index),
                     rng::hash_name(upper(name)));
  switch (spec.distribution) {
    case Distribution::Uniform:
      return spec.relative_bound * (2.0 * u - 1.0);
    case Distribution::NormalTruncated: {
      // sigma = bound/2; map u into the central +/-2 sigma mass so the draw
      // never exceeds the bound.
      const double lo = rng::normal_cdf(-2.0);
      const double hi = 1.0 - lo;
      const double z = rng::normal_inverse_cdf(lo + u * (hi - lo));
      return 0.5 * spec.relative_bound * z;
    }
  }
  return 0.0;
}

bool included(const PerturbationSpec& spec, std::string_view name) {
  if (spec.included_components.empty()) return true;
  const std::string target = upper(name);
  for (const auto& n : spec.included_components)
    if (upper(n) == target) return true;
  return false;
}

// Streaming-friendly accumulation with Neumaier compensation so the result
// does not depend on intermediate rounding order choices.
class CompensatedSum {
 public:
  void add(double v) {
    double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

Stats compute_stats(const std::vector<double>& values) {
  Stats s;
  s.count = static_cast<int>(values.size());
  if (values.empty()) return s;
  CompensatedSum total;
  s.min = values.front();
  s.max = values.front();
  for (double v : values) {
    total.add(v);
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean = total.value() / s.count;
  if (s.count > 1) {
    CompensatedSum sq;
    for (double v : values) sq.add((v - s.mean) * (v - s.mean));
    s.std_dev = std::sqrt(sq.value() / (s.count - 1));
  }
  return s;
}

Histogram compute_histogram(const std::vector<double>& values, int bins) {
  Histogram h;
  if (values.empty()) return h;
  double lo = *std::min_element(values.begin(), values.end());
  double hi = *std::max_element(values.begin(), values.end());
  if (!(hi > lo)) {
    // Degenerate distribution: widen to a token window so edges stay
    // strictly increasing.
    double pad = std::max(std::abs(lo) * 1e-12, 0.5);
    lo -= pad;
    hi += pad;
  }
  h.edges.resize(bins + 1);
  for (int i = 0; i <= bins; ++i)
    h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / bins;
  h.counts.assign(bins, 0);
  for (double v : values) {
    int idx = static_cast<int>((v - lo) / (hi - lo) * bins);
    idx = std::clamp(idx, 0, bins - 1);
    ++h.counts[idx];
  }
  return h;
}

double median_abs(std::vector<double> values) {
  for (double& v : values) v = std::abs(v);
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  if (n == 0) return 0.0;
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

struct PairPresence {
  bool opposite = false;
  bool output = false;
};

SampleRow evaluate_sample(const netlist::Netlist& nominal,
                          const PerturbationSpec& spec,
                          const McOptions& options, const PairPresence& pairs,
                          int index) {
  SampleRow row;
  row.index = index;
  try {
    netlist::Netlist n = perturb(nominal, spec, index);
    auto plan = mna::make_plan(n);
    netlist::SweepSpec window = *n.sweep;
    for (int attempt = 0;; ++attempt) {
      auto sweep = mna::run_sweep(plan, netlist::sweep_frequencies(window));
      auto dips = analysis::find_resonances(sweep, 0, options.dip_threshold);
      if (dips.empty()) {
        if (attempt == 0) {
          // Auto-widen once: the dip may have drifted past the window edge.
          double span = window.f_stop - window.f_start;
          window.f_start = std::max(window.f_start - 0.25 * span,
                                    0.01 * window.f_start);
          window.f_stop += 0.25 * span;
          row.widened = true;
          continue;
        }
        row.failure_reason = "lower dip escaped the sweep window";
        return row;
      }
      auto refined = analysis::refine_resonance(n, sweep, 0, dips.front(),
                                                options.refine_points,
                                                options.dip_threshold);
      row.f_lower_hz = refined.resonance.frequency;
      row.q_lower = refined.resonance.q_factor;
      auto sol = mna::solve_at(plan, refined.resonance.frequency);
      if (pairs.opposite)
        row.phi_opp_deg = analysis::phase_between(
            sol, options.opposite_pair.first, options.opposite_pair.second);
      if (pairs.output)
        row.phi_out_dev_deg = analysis::wrap_degrees(
            analysis::phase_between(sol, options.output_pair.first,
                                    options.output_pair.second) -
            180.0);
      row.ok = true;
      return row;
    }
  } catch (const UnderResolvedError& e) {
    row.failure_reason = std::string("resonance refinement failed: ") + e.what();
  } catch (const SingularSystemError& e) {
    row.failure_reason = std::string("singular system: ") + e.what();
  } catch (const DomainViolation& e) {
    row.failure_reason = std::string("degenerate solution: ") + e.what();
  }
  row.ok = false;
  return row;
}

}  // namespace

netlist::Netlist perturb(const netlist::Netlist& n, const PerturbationSpec& spec,
                         int sample_index) {
  if (!(spec.relative_bound >= 0.0) || spec.relative_bound >= 1.0)
    throw MonteCarloError("relative bound must lie in [0, 1), got " +
                          format_double(spec.relative_bound));
  if (sample_index < 0)
    throw MonteCarloError("sample index must be non-negative");
  netlist::Netlist out = n;
  if (spec.relative_bound == 0.0) return out;
  for (auto& c : out.components)
    if (included(spec, c.name))
      c.value *= 1.0 + draw_epsilon(spec, sample_index, c.name);
  for (auto& k : out.couplings)
    if (included(spec, k.name))
      k.k *= 1.0 + draw_epsilon(spec, sample_index, k.name);
  return out;
}

McReport run(const netlist::Netlist& n, const PerturbationSpec& spec,
             const McOptions& options) {
  const auto t_begin = std::chrono::steady_clock::now();
  if (spec.samples < 1)
    throw MonteCarloError("sample count must be at least 1");
  if (!n.sweep)
    throw MonteCarloError("netlist has no sweep directive");
  if (n.ports.empty())
    throw MonteCarloError("netlist has no measurement port");

  // Pre-flight on the nominal circuit: the window must hold the lower dip
  // with margin, or drifted samples will fail en masse.
  {
    auto plan = mna::make_plan(n);
    auto sweep = mna::run_sweep(plan, netlist::sweep_frequencies(*n.sweep));
    auto dips = analysis::find_resonances(sweep, 0, options.dip_threshold);
    if (dips.empty())
      throw MonteCarloError(
          "nominal circuit shows no reflection dip below " +
          format_double(options.dip_threshold) +
          " inside the sweep window; widen the window or lower the source "
          "impedance mismatch");
    const double f0 = dips.front().frequency;
    const double span = n.sweep->f_stop - n.sweep->f_start;
    if (f0 - n.sweep->f_start < 0.05 * span ||
        n.sweep->f_stop - f0 < 0.05 * span)
      throw MonteCarloError(
          "nominal lower dip at " + format_double(f0) +
          " Hz sits within 5% of the sweep edge; widen the window so "
          "perturbed samples keep the dip in view");
  }

  PairPresence pairs;
  pairs.opposite = n.has_node(options.opposite_pair.first) &&
                   n.has_node(options.opposite_pair.second);
  pairs.output = n.has_node(options.output_pair.first) &&
                 n.has_node(options.output_pair.second);

  McReport report;
  report.samples = spec.samples;
  report.rows.resize(static_cast<size_t>(spec.samples));

  int threads = options.threads;
  if (threads <= 0)
    threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, spec.samples);

  std::atomic<int> next{0};
  auto worker = [&]() {
    while (true) {
      int i = next.fetch_add(1);
      if (i >= spec.samples) break;
      report.rows[static_cast<size_t>(i)] =
          evaluate_sample(n, spec, options, pairs, i);
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // Aggregate in sample order so the report is identical however the samples
  // were scheduled.
  std::vector<double> freqs, opp, outdev;
  for (const auto& row : report.rows) {
    if (row.widened) ++report.widened;
    if (!row.ok) {
      ++report.failures;
      std::string reason = row.failure_reason.substr(
          0, row.failure_reason.find(':'));
      ++report.failure_reasons[reason];
      continue;
    }
    freqs.push_back(row.f_lower_hz);
    if (row.phi_opp_deg) opp.push_back(*row.phi_opp_deg);
    if (row.phi_out_dev_deg) outdev.push_back(*row.phi_out_dev_deg);
  }

  report.f_lower = compute_stats(freqs);
  report.f_lower_hist = compute_histogram(freqs, 30);
  report.has_phi_opp = pairs.opposite && !opp.empty();
  if (report.has_phi_opp) {
    report.phi_opp = compute_stats(opp);
    report.phi_opp_median_abs = median_abs(opp);
    double mx = 0.0;
    for (double v : opp) mx = std::max(mx, std::abs(v));
    report.phi_opp_max_abs = mx;
  }
  report.has_phi_out = pairs.output && !outdev.empty();
  if (report.has_phi_out) {
    report.phi_out_dev = compute_stats(outdev);
    double mx = 0.0;
    for (double v : outdev) mx = std::max(mx, std::abs(v));
    report.phi_out_dev_max_abs = mx;
  }
  report.failed = report.failures * 10 > report.samples;

  report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin)
          .count();
  return report;
}

}  // namespace resodrive::montecarlo
