#include <cstdio>
#include <exception>

#include <CLI11.hpp>

#include "commands.hpp"
#include "resodrive/errors.hpp"
#include "resodrive/format.hpp"

// resodrive: design toolkit for a two-phase RF drive chain and linear trap.
//
// Exit codes: 0 success, 1 unexpected failure, 2 bad input (flags, config,
// netlist), 3 domain violation, 4 singular circuit system, 5 Monte-Carlo
// failure rate exceeded, 6 boundary-element self-check failure.

int main(int argc, char** argv) {
  using namespace resodrive;

  CLI::App app{"resodrive: RF resonator and ion-trap design toolkit"};
  app.require_subcommand(1);
  cli::register_params(app);
  cli::register_ac(app);
  cli::register_mc(app);
  cli::register_trap(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const DomainViolation& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const UnderResolvedError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const SingularSystemError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    std::fprintf(stderr, "  at frequency %s Hz\n",
                 format_double(e.frequency).c_str());
    for (const auto& s : e.suspects)
      std::fprintf(stderr, "  suspect unknown: %s\n", s.c_str());
    return 4;
  } catch (const MonteCarloError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 5;
  } catch (const BemError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 6;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 1;
  }
  return 0;
}
