#pragma once

// Physical constants (SI, CODATA 2018 exact/recommended values).

namespace resodrive::constants {

inline constexpr double pi = 3.141592653589793238462643383279502884;

// Vacuum permeability [H/m] and permittivity [F/m].
inline constexpr double mu0 = 1.25663706212e-6;
inline constexpr double eps0 = 8.8541878128e-12;

// Elementary charge [C] and unified atomic mass unit [kg].
inline constexpr double elementary_charge = 1.602176634e-19;
inline constexpr double atomic_mass_unit = 1.66053906660e-27;

// Room-temperature resistivity of copper [Ohm m]; default conductor material.
inline constexpr double copper_resistivity = 1.68e-8;

inline constexpr double two_pi = 2.0 * pi;
inline constexpr double four_pi_eps0 = 4.0 * pi * eps0;

}  // namespace resodrive::constants
