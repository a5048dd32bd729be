#include <cmath>
#include <complex>

#include "doctest.h"
#include "resodrive/errors.hpp"
#include "resodrive/modes.hpp"

using namespace resodrive;

namespace {

// Measured element values of the two-arm resonator.
modes::CoupledParams reference_params() {
  modes::CoupledParams p;
  p.inductance = 0.9e-6;
  p.capacitance = 4.7e-12;
  p.mutual = 0.03 * 0.9e-6;
  p.coupling_cap = 0.2e-12;
  p.resistance = 0.1;
  return p;
}

constexpr double kTwoPi = 2.0 * M_PI;

}  // namespace

TEST_CASE("closed-form mode pair at the reference values") {
  auto m = modes::mode_pair(reference_params());
  // Independently computed: f_anti = 73.197319 MHz, f_sym = 78.571326 MHz,
  // Q_anti = 4263.39, Q_sym = 4309.81, Gamma_anti = 107874.87 rad/s.
  CHECK(m.omega_antisym / kTwoPi ==
        doctest::Approx(73.197319e6).epsilon(1e-8));
  CHECK(m.omega_sym / kTwoPi == doctest::Approx(78.571326e6).epsilon(1e-8));
  CHECK(m.q_antisym == doctest::Approx(4263.39).epsilon(1e-5));
  CHECK(m.q_sym == doctest::Approx(4309.81).epsilon(1e-5));
  CHECK(m.gamma_antisym == doctest::Approx(107874.87).epsilon(1e-6));
  CHECK(m.gamma_sym == doctest::Approx(m.omega_sym / m.q_sym).epsilon(1e-12));
  // Out-of-phase mode sits below the in-phase mode whenever C_c > 0.
  CHECK(m.omega_antisym < m.omega_sym);
}

TEST_CASE("without either coupling path the modes are degenerate") {
  auto p = reference_params();
  p.mutual = 0.0;
  p.coupling_cap = 0.0;
  auto m = modes::mode_pair(p);
  CHECK(m.omega_antisym == doctest::Approx(m.omega_sym).epsilon(1e-14));
  const double f0 = 1.0 / (kTwoPi * std::sqrt(p.inductance * p.capacitance));
  CHECK(m.omega_sym / kTwoPi == doctest::Approx(f0).epsilon(1e-14));
}

TEST_CASE("each coupling path moves the right mode") {
  auto p = reference_params();
  p.coupling_cap = 0.0;
  // Mutual only: sym mode uses L-M (higher), anti uses L+M (lower).
  auto m = modes::mode_pair(p);
  const double f_plus =
      1.0 / (kTwoPi * std::sqrt((p.inductance + p.mutual) * p.capacitance));
  const double f_minus =
      1.0 / (kTwoPi * std::sqrt((p.inductance - p.mutual) * p.capacitance));
  CHECK(m.omega_antisym / kTwoPi == doctest::Approx(f_plus).epsilon(1e-12));
  CHECK(m.omega_sym / kTwoPi == doctest::Approx(f_minus).epsilon(1e-12));

  // Bridging capacitor only: it loads the anti-phase mode (2 C_c + C),
  // leaving the in-phase mode at the bare tank frequency.
  auto pc = reference_params();
  pc.mutual = 0.0;
  auto mc = modes::mode_pair(pc);
  const double f_anti = 1.0 / (kTwoPi * std::sqrt(pc.inductance *
                                                  (2.0 * pc.coupling_cap +
                                                   pc.capacitance)));
  const double f_bare =
      1.0 / (kTwoPi * std::sqrt(pc.inductance * pc.capacitance));
  CHECK(mc.omega_antisym / kTwoPi == doctest::Approx(f_anti).epsilon(1e-12));
  CHECK(mc.omega_sym / kTwoPi == doctest::Approx(f_bare).epsilon(1e-12));
}

TEST_CASE("parameter validation") {
  auto bad = [](auto mutate) {
    auto p = reference_params();
    mutate(p);
    CHECK_THROWS_AS((void)modes::mode_pair(p), DomainViolation);
  };
  bad([](modes::CoupledParams& p) { p.inductance = 0.0; });
  bad([](modes::CoupledParams& p) { p.capacitance = -1e-12; });
  bad([](modes::CoupledParams& p) { p.mutual = p.inductance; });
  bad([](modes::CoupledParams& p) { p.mutual = -p.inductance * 1.5; });
  bad([](modes::CoupledParams& p) { p.coupling_cap = -1e-15; });
  bad([](modes::CoupledParams& p) { p.resistance = 0.0; });
}

TEST_CASE("driven response peaks at each mode and rolls off away from it") {
  const auto p = reference_params();
  const auto m = modes::mode_pair(p);
  const double w_a = m.omega_antisym;

  const double at_peak = std::abs(modes::driven_response(p, w_a).i_antisym);
  const double below = std::abs(
      modes::driven_response(p, w_a * 0.99).i_antisym);
  const double above = std::abs(
      modes::driven_response(p, w_a * 1.01).i_antisym);
  CHECK(at_peak > below);
  CHECK(at_peak > above);

  // Half-power at omega_a * (1 +/- 1/(2Q)).
  const double half = std::abs(
      modes::driven_response(p, w_a * (1.0 + 0.5 / m.q_antisym)).i_antisym);
  CHECK(half / at_peak == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.01));

  // The in-phase amplitude peaks at its own mode, not at the anti mode.
  const double sym_at_a = std::abs(modes::driven_response(p, w_a).i_sym);
  const double sym_at_s =
      std::abs(modes::driven_response(p, m.omega_sym).i_sym);
  CHECK(sym_at_s > 10.0 * sym_at_a);

  CHECK_THROWS_AS((void)modes::driven_response(p, 0.0), DomainViolation);
}

TEST_CASE("mode split grows monotonically with k") {
  const auto p = reference_params();
  const std::vector<double> ks = {0.0, 0.01, 0.02, 0.05, 0.1, 0.2};
  auto split = modes::mode_split(p, ks);
  REQUIRE(split.size() == 6);
  for (std::size_t i = 0; i < split.size(); ++i) {
    CHECK(split[i].k == ks[i]);
    CHECK(split[i].f_antisym < split[i].f_sym);
    if (i > 0) {
      // Larger mutual pushes the anti mode down and the sym mode up.
      CHECK(split[i].f_antisym < split[i - 1].f_antisym);
      CHECK(split[i].f_sym > split[i - 1].f_sym);
    }
  }
  // k = 0.03 row reproduces the reference frequencies.
  auto one = modes::mode_split(p, {0.03});
  REQUIRE(one.size() == 1);
  CHECK(one[0].f_antisym == doctest::Approx(73.197319e6).epsilon(1e-8));
  CHECK(one[0].f_sym == doctest::Approx(78.571326e6).epsilon(1e-8));
}
