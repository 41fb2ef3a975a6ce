#pragma once

// CODATA-2018 values; mirrored in data/constants.json (the versioned data
// file is the authority, a unit test keeps the two in sync).
namespace pcwlat::constants {

inline constexpr const char* version = "CODATA-2018";

inline constexpr double pi = 3.141592653589793;
inline constexpr double two_pi = 6.283185307179586;

inline constexpr double c = 299792458.0;               // m/s (exact)
inline constexpr double h = 6.62607015e-34;            // J s (exact)
inline constexpr double hbar = 1.0545718176461565e-34; // J s (= h/2pi)
inline constexpr double amu = 1.66053906660e-27;       // kg
inline constexpr double euler_gamma = 0.5772156649015329;

}  // namespace pcwlat::constants
