#include "pcwlat/species.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "pcwlat/constants.hpp"
#include "pcwlat/units.hpp"

namespace pcwlat {

AtomSpecies make_species(const std::string& name, double lambda_a_m,
                         double gamma_a_over_2pi_hz, double mass_kg, double eta) {
  if (!(lambda_a_m > 0)) throw std::invalid_argument("species " + name + ": lambda_a must be > 0");
  if (!(gamma_a_over_2pi_hz > 0))
    throw std::invalid_argument("species " + name + ": Gamma_a must be > 0");
  if (!(mass_kg > 0)) throw std::invalid_argument("species " + name + ": mass must be > 0");
  if (!(eta > 0 && eta <= 1.0))
    throw std::invalid_argument("species " + name + ": eta must be in (0, 1]");
  AtomSpecies s;
  s.name = name;
  s.lambda_a = lambda_a_m;
  s.omega_a = constants::two_pi * constants::c / lambda_a_m;
  s.k_a = constants::two_pi / lambda_a_m;
  s.Gamma_a = to_angular(gamma_a_over_2pi_hz);
  s.mass = mass_kg;
  s.eta = eta;
  return s;
}

SpeciesTable SpeciesTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("species file not readable: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("species file " + path + ": " + e.what());
  }
  SpeciesTable table;
  for (const auto& e : j.at("species")) {
    table.add(make_species(e.at("name").get<std::string>(),
                           e.at("lambda_a_nm").get<double>() * 1e-9,
                           e.at("gamma_a_over_2pi_Hz").get<double>(),
                           e.at("mass_amu").get<double>() * constants::amu,
                           e.at("eta").get<double>()));
  }
  return table;
}

const SpeciesTable& SpeciesTable::builtin() {
  static const SpeciesTable table = load(std::string(PCWLAT_DATA_DIR) + "/species.json");
  return table;
}

const AtomSpecies& SpeciesTable::lookup(const std::string& name) const {
  for (const auto& s : entries_)
    if (s.name == name) return s;
  std::ostringstream msg;
  msg << "unknown species '" << name << "'; available:";
  for (const auto& s : entries_) msg << " " << s.name;
  throw std::invalid_argument(msg.str());
}

std::vector<std::string> SpeciesTable::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& s : entries_) out.push_back(s.name);
  return out;
}

}  // namespace pcwlat
