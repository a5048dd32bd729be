#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "doctest.h"
#include "resodrive/errors.hpp"
#include "resodrive/montecarlo.hpp"
#include "resodrive/netlist.hpp"

using namespace resodrive;
using montecarlo::Distribution;
using montecarlo::PerturbationSpec;

namespace {

netlist::Netlist nl(const std::string& text) {
  auto r = netlist::parse(text);
  REQUIRE(r.ok());
  return *r.netlist;
}

// Small, fast fixture: series RLC with a clean |S11| dip at 159.15 MHz,
// Q = 20, swept wide enough that +/-10% component drifts stay in window.
netlist::Netlist rlc_fixture() {
  return nl(
      "Vs in 0 AC 1\n"
      "R1 in a 50\n"
      "L1 a b 1u\n"
      "C1 b 0 1p\n"
      ".ac lin 401 100meg 240meg\n"
      ".port Vs 50\n");
}

double relative_change(const netlist::Netlist& base,
                       const netlist::Netlist& pert, const char* name) {
  const auto* b = base.find_component(name);
  const auto* p = pert.find_component(name);
  REQUIRE(b != nullptr);
  REQUIRE(p != nullptr);
  return p->value / b->value - 1.0;
}

}  // namespace

TEST_CASE("perturbation draws are deterministic and name-keyed") {
  auto base = rlc_fixture();
  PerturbationSpec spec;
  spec.relative_bound = 0.10;
  spec.samples = 8;
  spec.seed = 42;

  auto p1 = montecarlo::perturb(base, spec, 3);
  auto p2 = montecarlo::perturb(base, spec, 3);
  // Same (seed, index, name) -> bitwise identical values.
  for (const char* name : {"R1", "L1", "C1"}) {
    CHECK(p1.find_component(name)->value == p2.find_component(name)->value);
    // And genuinely perturbed.
    CHECK(relative_change(base, p1, name) != 0.0);
  }

  // Different sample index or seed -> different draws.
  auto p3 = montecarlo::perturb(base, spec, 4);
  CHECK(p3.find_component("L1")->value != p1.find_component("L1")->value);
  auto spec2 = spec;
  spec2.seed = 43;
  auto p4 = montecarlo::perturb(base, spec2, 3);
  CHECK(p4.find_component("L1")->value != p1.find_component("L1")->value);
}

TEST_CASE("adding a component does not reshuffle existing draws") {
  auto base = rlc_fixture();
  auto extended = nl(
      "Vs in 0 AC 1\n"
      "R1 in a 50\n"
      "L1 a b 1u\n"
      "C1 b 0 1p\n"
      "C9 b 0 0.1p\n"
      ".ac lin 401 100meg 240meg\n"
      ".port Vs 50\n");
  PerturbationSpec spec;
  spec.relative_bound = 0.10;
  spec.seed = 7;
  auto pa = montecarlo::perturb(base, spec, 11);
  auto pb = montecarlo::perturb(extended, spec, 11);
  for (const char* name : {"R1", "L1", "C1"})
    CHECK(pa.find_component(name)->value == pb.find_component(name)->value);
}

TEST_CASE("draws respect the bound for both distributions") {
  auto base = rlc_fixture();
  for (auto dist : {Distribution::Uniform, Distribution::NormalTruncated}) {
    PerturbationSpec spec;
    spec.relative_bound = 0.10;
    spec.distribution = dist;
    spec.seed = 5;
    double max_abs = 0.0;
    for (int i = 0; i < 500; ++i) {
      auto p = montecarlo::perturb(base, spec, i);
      for (const char* name : {"R1", "L1", "C1"}) {
        const double eps = relative_change(base, p, name);
        CHECK(std::abs(eps) <= 0.10 + 1e-12);
        max_abs = std::max(max_abs, std::abs(eps));
      }
    }
    // The draws actually explore the range, not just hug zero.
    CHECK(max_abs > 0.05);
  }
}

TEST_CASE("uniform draws fill the interval roughly evenly") {
  auto base = rlc_fixture();
  PerturbationSpec spec;
  spec.relative_bound = 0.10;
  spec.seed = 11;
  int below = 0, above = 0;
  const int n = 2000;
  for (int i = 0; i < n; ++i) {
    auto p = montecarlo::perturb(base, spec, i);
    const double eps = relative_change(base, p, "L1");
    (eps < 0.0 ? below : above)++;
  }
  // Sign balance within 5 sigma of a fair coin.
  CHECK(std::abs(below - above) < 5.0 * std::sqrt(static_cast<double>(n)));
}

TEST_CASE("truncated normal concentrates near zero relative to uniform") {
  auto base = rlc_fixture();
  auto spread = [&](Distribution d) {
    PerturbationSpec spec;
    spec.relative_bound = 0.10;
    spec.distribution = d;
    spec.seed = 3;
    double sum_sq = 0.0;
    const int n = 1500;
    for (int i = 0; i < n; ++i) {
      auto p = montecarlo::perturb(base, spec, i);
      const double eps = relative_change(base, p, "C1");
      sum_sq += eps * eps;
    }
    return std::sqrt(sum_sq / n);
  };
  const double s_uniform = spread(Distribution::Uniform);
  const double s_normal = spread(Distribution::NormalTruncated);
  // Uniform RMS = bound/sqrt(3) = 5.77%; truncated normal sigma ~ bound/2.
  CHECK(s_uniform == testsupport::rel(0.0577, 0.08));
  CHECK(s_normal < s_uniform);
  CHECK(s_normal == testsupport::rel(0.05, 0.15));
}

TEST_CASE("zero bound leaves every value untouched") {
  auto base = rlc_fixture();
  PerturbationSpec spec;
  spec.relative_bound = 0.0;
  for (int i = 0; i < 4; ++i) {
    auto p = montecarlo::perturb(base, spec, i);
    for (const char* name : {"R1", "L1", "C1"})
      CHECK(relative_change(base, p, name) == 0.0);
  }
}

TEST_CASE("included_components limits the blast radius") {
  auto base = rlc_fixture();
  PerturbationSpec spec;
  spec.relative_bound = 0.10;
  spec.included_components = {"l1"};  // case-insensitive
  auto p = montecarlo::perturb(base, spec, 0);
  CHECK(relative_change(base, p, "L1") != 0.0);
  CHECK(relative_change(base, p, "R1") == 0.0);
  CHECK(relative_change(base, p, "C1") == 0.0);
}

TEST_CASE("coupling coefficients are perturbed too") {
  auto base = nl(
      "Vs in 0 AC 1\n"
      "R1 in t1 1k\n"
      "L1 t1 0 1u\n"
      "C1 t1 0 1p\n"
      "L2 t2 0 1u\n"
      "C2 t2 0 1p\n"
      "R2 t2 0 1meg\n"
      "K1 L1 L2 0.1\n"
      ".ac lin 401 100meg 240meg\n"
      ".port Vs 50\n");
  PerturbationSpec spec;
  spec.relative_bound = 0.10;
  spec.seed = 9;
  auto p = montecarlo::perturb(base, spec, 2);
  CHECK(p.couplings[0].k != base.couplings[0].k);
  CHECK(std::abs(p.couplings[0].k / base.couplings[0].k - 1.0) <= 0.10 + 1e-12);
}

TEST_CASE("spec validation") {
  auto base = rlc_fixture();
  PerturbationSpec spec;
  spec.relative_bound = 1.0;
  CHECK_THROWS_AS((void)montecarlo::perturb(base, spec, 0), MonteCarloError);
  spec.relative_bound = -0.1;
  CHECK_THROWS_AS((void)montecarlo::perturb(base, spec, 0), MonteCarloError);
  spec.relative_bound = 0.1;
  CHECK_THROWS_AS((void)montecarlo::perturb(base, spec, -1), MonteCarloError);
}

TEST_CASE("run produces coherent statistics") {
  auto base = rlc_fixture();
  PerturbationSpec spec;
  spec.relative_bound = 0.05;
  spec.samples = 60;
  spec.seed = 1;
  montecarlo::McOptions opts;
  opts.threads = 1;
  auto report = montecarlo::run(base, spec, opts);

  CHECK(report.samples == 60);
  CHECK(report.failures == 0);
  CHECK(!report.failed);
  CHECK(report.f_lower.count == 60);
  CHECK(report.rows.size() == 60);
  // f0 = 159.15 MHz; +/-5% on L and C moves f by ~5% at the extremes.
  CHECK(report.f_lower.mean == doctest::Approx(159.15e6).epsilon(0.02));
  CHECK(report.f_lower.std_dev > 1e6);
  CHECK(report.f_lower.std_dev < 12e6);
  CHECK(report.f_lower.min < report.f_lower.mean);
  CHECK(report.f_lower.max > report.f_lower.mean);

  // Histogram covers every successful sample.
  int total = 0;
  for (int c : report.f_lower_hist.counts) total += c;
  CHECK(total == report.f_lower.count);
  REQUIRE(report.f_lower_hist.edges.size() ==
          report.f_lower_hist.counts.size() + 1);
  for (std::size_t i = 1; i < report.f_lower_hist.edges.size(); ++i)
    CHECK(report.f_lower_hist.edges[i] > report.f_lower_hist.edges[i - 1]);

  // No probe pair in this fixture -> phase aggregates absent.
  CHECK(!report.has_phi_opp);
  CHECK(!report.has_phi_out);

  // Rows are ordered and self-consistent.
  for (int i = 0; i < report.samples; ++i) {
    CHECK(report.rows[i].index == i);
    CHECK(report.rows[i].ok);
    CHECK(report.rows[i].q_lower > 10.0);
  }
}

TEST_CASE("run is reproducible and thread-count invariant") {
  auto base = rlc_fixture();
  PerturbationSpec spec;
  spec.relative_bound = 0.05;
  spec.samples = 24;
  spec.seed = 77;
  montecarlo::McOptions one;
  one.threads = 1;
  montecarlo::McOptions three;
  three.threads = 3;
  auto a = montecarlo::run(base, spec, one);
  auto b = montecarlo::run(base, spec, three);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].f_lower_hz == b.rows[i].f_lower_hz);  // bitwise
    CHECK(a.rows[i].q_lower == b.rows[i].q_lower);
  }
  CHECK(a.f_lower.mean == b.f_lower.mean);
  CHECK(a.f_lower.std_dev == b.f_lower.std_dev);
}

TEST_CASE("wider bounds widen the spread (same seed)") {
  auto base = rlc_fixture();
  PerturbationSpec narrow;
  narrow.relative_bound = 0.02;
  narrow.samples = 40;
  PerturbationSpec wide;
  wide.relative_bound = 0.10;
  wide.samples = 40;
  montecarlo::McOptions opts;
  opts.threads = 1;
  const double s_narrow = montecarlo::run(base, narrow, opts).f_lower.std_dev;
  const double s_wide = montecarlo::run(base, wide, opts).f_lower.std_dev;
  CHECK(s_wide > 3.0 * s_narrow);
}

TEST_CASE("single sample yields a defined but degenerate spread") {
  auto base = rlc_fixture();
  PerturbationSpec spec;
  spec.relative_bound = 0.05;
  spec.samples = 1;
  montecarlo::McOptions opts;
  opts.threads = 1;
  auto report = montecarlo::run(base, spec, opts);
  CHECK(report.f_lower.count == 1);
  CHECK(report.f_lower.std_dev == 0.0);
  CHECK(report.f_lower.min == report.f_lower.max);
}

TEST_CASE("preflight rejects unusable sweeps") {
  SUBCASE("no dip inside the window") {
    auto n = nl(
        "Vs in 0 AC 1\n"
        "R1 in a 50\n"
        "L1 a b 1u\n"
        "C1 b 0 1p\n"
        ".ac lin 101 1meg 10meg\n"
        ".port Vs 50\n");
    PerturbationSpec spec;
    spec.samples = 3;
    CHECK_THROWS_AS((void)montecarlo::run(n, spec), MonteCarloError);
  }
  SUBCASE("dip too close to the window edge") {
    auto n = nl(
        "Vs in 0 AC 1\n"
        "R1 in a 50\n"
        "L1 a b 1u\n"
        "C1 b 0 1p\n"
        ".ac lin 401 158meg 240meg\n"
        ".port Vs 50\n");
    PerturbationSpec spec;
    spec.samples = 3;
    CHECK_THROWS_AS((void)montecarlo::run(n, spec), MonteCarloError);
  }
  SUBCASE("no port") {
    auto n = nl(
        "Vs in 0 AC 1\n"
        "R1 in a 50\n"
        "L1 a b 1u\n"
        "C1 b 0 1p\n"
        ".ac lin 101 100meg 240meg\n");
    PerturbationSpec spec;
    spec.samples = 3;
    CHECK_THROWS_AS((void)montecarlo::run(n, spec), MonteCarloError);
  }
}

TEST_CASE("phase pairs are tracked when the probes exist") {
  // Two-output coupled resonator with named output nodes N1/N2; opposite
  // pair V1/V3 absent -> phi_opp skipped, phi_out present.
  auto n = nl(
      "Vs drv 0 AC 1\n"
      "Lf drv 0 500n\n"
      "Kf Lf L1 0.07\n"
      "L1 0 a1 0.9u\n"
      "R1 a1 N1 0.1\n"
      "L2 a2 0 0.9u\n"
      "R2 a2 N2 0.1\n"
      "C1 N1 0 4.7p\n"
      "C2 N2 0 4.7p\n"
      "Cc N1 N2 0.2p\n"
      "K1 L1 L2 0.03\n"
      ".ac lin 801 60meg 90meg\n"
      ".port Vs 50\n"
      ".probe v(N1) v(N2)\n");
  PerturbationSpec spec;
  spec.relative_bound = 0.03;
  spec.samples = 12;
  montecarlo::McOptions opts;
  opts.threads = 1;
  auto report = montecarlo::run(n, spec, opts);
  CHECK(report.failures == 0);
  CHECK(!report.has_phi_opp);
  CHECK(report.has_phi_out);
  CHECK(report.phi_out_dev_max_abs < 5.0);
  for (const auto& row : report.rows) {
    CHECK(!row.phi_opp_deg.has_value());
    REQUIRE(row.phi_out_dev_deg.has_value());
    // Outputs near antiphase: deviation small.
    CHECK(std::abs(*row.phi_out_dev_deg) < 5.0);
  }
}
