#pragma once

#include <string>
#include <vector>

namespace pcwlat {

// Atomic constants consumed by every physical formula.  omega_a and k_a are
// derived from lambda_a on construction so the set is always self-consistent.
struct AtomSpecies {
  std::string name;
  double lambda_a = 0;  // transition wavelength, m
  double omega_a = 0;   // angular transition frequency, rad/s
  double k_a = 0;       // transition wavenumber, rad/m
  double Gamma_a = 0;   // free-space decay rate, rad/s
  double mass = 0;      // kg
  double eta = 0;       // polarization correction factor, dimensionless
};

// Validates and derives the dependent fields; throws std::invalid_argument.
AtomSpecies make_species(const std::string& name, double lambda_a_m,
                         double gamma_a_over_2pi_hz, double mass_kg, double eta);

class SpeciesTable {
 public:
  // Reads the reference-data file (data/species.json schema).
  static SpeciesTable load(const std::string& path);
  // The file shipped with the repo.
  static const SpeciesTable& builtin();

  const AtomSpecies& lookup(const std::string& name) const;
  std::vector<std::string> names() const;

  void add(AtomSpecies s) { entries_.push_back(std::move(s)); }

 private:
  std::vector<AtomSpecies> entries_;
};

}  // namespace pcwlat
