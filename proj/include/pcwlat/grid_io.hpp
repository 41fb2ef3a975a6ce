#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "pcwlat/band_coupling.hpp"
#include "pcwlat/grids.hpp"

namespace pcwlat {

// Parse failures throw std::runtime_error with "path:line: message".

// Band-grid table: tab/space separated columns
//   kx_over_pi_d  ky_over_pi_d  omega_over_2pi_Hz  Lm_m
// covering a full Cartesian product of one BZ quadrant; '#' comments allowed.
BandGrid read_band_grid(const std::string& path, double d);
void write_band_grid(const std::string& path, const BandGrid& grid);

// Field-density table: columns  x_m  y_m  z_m  eps  E2  on a full product grid.
FieldDensity read_field_density(const std::string& path);
void write_field_density(const std::string& path, const FieldDensity& field);

// CP grid, uniform axes:
//   pcwlat-cp-grid-v1
//   nx ny nz
//   x0 x1
//   y0 y1
//   z0 z1
//   nx*ny*nz values in J, row-major with z fastest
Field3 read_cp_grid(const std::string& path);
void write_cp_grid(const std::string& path, const Field3& field);

// FNV-1a 64-bit over the raw bytes of a file or buffer, as a hex string.
std::uint64_t fnv1a64(const std::string& bytes);
std::string file_hash(const std::string& path);
std::string bytes_hash(const std::string& bytes);

}  // namespace pcwlat
