#include "pcwlat/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "pcwlat/band_coupling.hpp"
#include "pcwlat/constants.hpp"
#include "pcwlat/grid_io.hpp"
#include "pcwlat/manifest.hpp"
#include "pcwlat/potentials.hpp"
#include "pcwlat/raman.hpp"
#include "pcwlat/slab_modes.hpp"
#include "pcwlat/spin_dynamics.hpp"
#include "pcwlat/trap_scan.hpp"
#include "pcwlat/units.hpp"

namespace pcwlat {

namespace {

using nlohmann::json;
namespace C = constants;
namespace fs = std::filesystem;

// ---------------------------------------------------------------- utilities

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void config_fail(const std::string& msg) {
  throw std::invalid_argument("config: " + msg);
}

void expect_keys(const json& obj, const std::string& where,
                 std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) config_fail(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* k) { return key == k; }) == allowed.end())
      config_fail(where + ": unknown key '" + key + "'");
  }
}

double req_num(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) config_fail(where + ": missing key '" + key + "'");
  if (!obj[key].is_number()) config_fail(where + ": key '" + std::string(key) + "' must be a number");
  return obj[key].get<double>();
}

double opt_num(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  return obj[key].get<double>();
}

std::string req_str(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key) || !obj[key].is_string())
    config_fail(where + ": missing string key '" + std::string(key) + "'");
  return obj[key].get<std::string>();
}

// [min, max, n] -> linear samples
Eigen::ArrayXd parse_axis(const json& arr, const std::string& where) {
  if (!arr.is_array() || arr.size() != 3) config_fail(where + ": expected [min, max, n]");
  const double lo = arr[0].get<double>(), hi = arr[1].get<double>();
  const int n = arr[2].get<int>();
  if (n < 1 || hi < lo) config_fail(where + ": invalid range");
  return Eigen::ArrayXd::LinSpaced(n, lo, hi);
}

Eigen::ArrayXd logspace(double lo, double hi, int n) {
  if (!(lo > 0 && hi > lo) || n < 2) config_fail("scan: need 0 < min < max and points >= 2");
  Eigen::ArrayXd v(n);
  for (int i = 0; i < n; ++i)
    v[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return v;
}

// simple table with unit-bearing column names; serialized as CSV or JSON rows
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(const std::vector<double>& r) {
    if (r.size() != columns.size()) throw std::logic_error("table row arity mismatch");
    rows.push_back(r);
  }
};

struct Ctx {
  RunOptions opts;
  bool write = true;
  std::vector<std::string> artifacts;
  std::set<std::string> data_files;

  void emit(const std::string& name, const Table& t) {
    if (!write) return;
    fs::create_directories(opts.out_dir);
    if (opts.format == "json") {
      json rows = json::array();
      for (const auto& r : t.rows) {
        json obj = json::object();
        for (size_t c = 0; c < t.columns.size(); ++c) obj[t.columns[c]] = r[c];
        rows.push_back(obj);
      }
      const std::string path = opts.out_dir + "/" + name + ".json";
      std::ofstream out(path);
      out << rows.dump(2) << "\n";
      artifacts.push_back(path);
    } else {
      const std::string path = opts.out_dir + "/" + name + ".csv";
      std::ofstream out(path);
      for (size_t c = 0; c < t.columns.size(); ++c)
        out << t.columns[c] << (c + 1 < t.columns.size() ? "," : "\n");
      for (const auto& r : t.rows) {
        for (size_t c = 0; c < r.size(); ++c)
          out << fmt17(r[c]) << (c + 1 < r.size() ? "," : "\n");
      }
      artifacts.push_back(path);
    }
  }

  void emit_json(const std::string& name, const json& j) {
    if (!write) return;
    fs::create_directories(opts.out_dir);
    const std::string path = opts.out_dir + "/" + name + ".json";
    std::ofstream out(path);
    out << j.dump(2) << "\n";
    artifacts.push_back(path);
  }
};

const SpeciesTable& species_table(Ctx& ctx) {
  if (ctx.opts.species_file.empty()) return SpeciesTable::builtin();
  static std::mutex mtx;
  static std::map<std::string, SpeciesTable> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(ctx.opts.species_file);
  if (it == cache.end())
    it = cache.emplace(ctx.opts.species_file, SpeciesTable::load(ctx.opts.species_file)).first;
  ctx.data_files.insert(ctx.opts.species_file);
  return it->second;
}

AtomSpecies get_species(Ctx& ctx, const json& cfg) {
  return species_table(ctx).lookup(req_str(cfg, "config", "species"));
}

// ------------------------------------------------------------ patch parsing

BandPatch parse_patch(Ctx& ctx, const json& p) {
  expect_keys(p, "patch", {"lambda_c_nm", "A_um2_per_s", "L_m_um", "L_m_from_field", "d_nm"});
  const double omega_c = C::two_pi * C::c / (req_num(p, "patch", "lambda_c_nm") * 1e-9);
  const double a = req_num(p, "patch", "A_um2_per_s") * 1e-12;  // to m^2 rad/s
  const double d = req_num(p, "patch", "d_nm") * 1e-9;
  double lm = 0;
  if (p.contains("L_m_from_field")) {
    const json& f = p["L_m_from_field"];
    expect_keys(f, "patch.L_m_from_field", {"path", "r_a_nm"});
    const std::string path = req_str(f, "patch.L_m_from_field", "path");
    const auto& ra = f.at("r_a_nm");
    if (!ra.is_array() || ra.size() != 3) config_fail("patch.L_m_from_field.r_a_nm: need [x,y,z]");
    const FieldDensity field = read_field_density(path);
    ctx.data_files.insert(path);
    lm = effective_mode_length(
        field, {ra[0].get<double>() * 1e-9, ra[1].get<double>() * 1e-9, ra[2].get<double>() * 1e-9},
        d);
  } else {
    lm = req_num(p, "patch", "L_m_um") * 1e-6;
  }
  return make_band_patch(omega_c, a, lm, d);
}

// --------------------------------------------------------------- slab

RunResult run_slab(Ctx& ctx, const json& cfg) {
  expect_keys(cfg, "config", {"kind", "n", "W_nm", "lambda0_nm"});
  const double n = req_num(cfg, "config", "n");
  const double w = req_num(cfg, "config", "W_nm") * 1e-9;
  const double lambda0 = req_num(cfg, "config", "lambda0_nm") * 1e-9;

  const auto modes = solve_te_modes({n, w}, lambda0);
  const double d_min = min_lattice_constant(n, lambda0);

  Table t;
  t.columns = {"branch_index", "k_z_per_m", "beta_per_m", "k_par_per_m",
               "period_nm",    "E_in",      "E_out",      "d_min_nm"};
  for (const auto& m : modes)
    t.add_row({static_cast<double>(m.branch_index), m.k_z, m.beta, m.k_par,
               standing_wave_period(m) * 1e9, m.E_in, m.E_out, d_min * 1e9});
  ctx.emit("slab_modes", t);

  RunResult res;
  res.summary["d_min_nm"] = d_min * 1e9;
  res.summary["n_modes"] = static_cast<double>(modes.size());
  if (!modes.empty()) {
    res.summary["k_par_fundamental_per_m"] = modes.front().k_par;
    res.summary["period_fundamental_nm"] = standing_wave_period(modes.front()) * 1e9;
  }
  return res;
}

// --------------------------------------------------------------- trap scene

SiTerm parse_si_term(const AtomSpecies& sp, const json& t) {
  expect_keys(t, "terms.si", {"Omega_over_2pi_Hz", "lambda_nm", "z_t_nm", "phi_rad", "enabled"});
  const double lambda = req_num(t, "terms.si", "lambda_nm") * 1e-9;
  const double delta = sp.omega_a - C::two_pi * C::c / lambda;  // >0 red, <0 blue
  const auto params =
      make_si_params(to_angular(req_num(t, "terms.si", "Omega_over_2pi_Hz")), lambda, delta,
                     opt_num(t, "phi_rad", 0.0));
  SiTerm term;
  term.params = params;
  if (t.contains("z_t_nm"))
    term.z_t = t["z_t_nm"].get<double>() * 1e-9;
  else if (t.contains("phi_rad"))
    term.z_t = si_zt_from_phase(params.phi, params.k_SI);
  else
    config_fail("terms.si: need z_t_nm or phi_rad");
  term.enabled = t.value("enabled", true);
  return term;
}

GmTerm parse_gm_term(const AtomSpecies& sp, const json& t) {
  expect_keys(t, "terms.gm",
              {"Omega_over_2pi_Hz", "lambda0_nm", "slab", "k_par_per_m", "beta_per_m",
               "z_surface_nm", "pattern", "enabled"});
  const double lambda0 = req_num(t, "terms.gm", "lambda0_nm") * 1e-9;
  const double delta = sp.omega_a - C::two_pi * C::c / lambda0;
  double k_par = 0, beta = 0;
  if (t.contains("slab")) {
    const json& s = t["slab"];
    expect_keys(s, "terms.gm.slab", {"n", "W_nm"});
    const auto modes =
        solve_te_modes({req_num(s, "terms.gm.slab", "n"), req_num(s, "terms.gm.slab", "W_nm") * 1e-9},
                       lambda0);
    if (modes.empty()) config_fail("terms.gm.slab: no guided mode found");
    k_par = modes.front().k_par;
    beta = modes.front().beta;
  } else {
    k_par = req_num(t, "terms.gm", "k_par_per_m");
    beta = req_num(t, "terms.gm", "beta_per_m");
  }
  const std::string pattern = t.value("pattern", "incoherent_xy_sum");
  if (pattern != "incoherent_xy_sum" && pattern != "single_axis")
    config_fail("terms.gm.pattern: expected incoherent_xy_sum or single_axis");
  GmTerm term;
  term.params = make_gm_params(
      to_angular(req_num(t, "terms.gm", "Omega_over_2pi_Hz")), delta, k_par, beta,
      opt_num(t, "z_surface_nm", 0.0) * 1e-9,
      pattern == "single_axis" ? GmPattern::single_axis : GmPattern::incoherent_xy_sum);
  term.enabled = t.value("enabled", true);
  return term;
}

CpTerm parse_cp_term(Ctx& ctx, const json& t) {
  expect_keys(t, "terms.cp", {"variant", "n", "R_nm", "z_surface_nm", "grid", "enabled"});
  const std::string variant = req_str(t, "terms.cp", "variant");
  CpTerm term;
  term.enabled = t.value("enabled", true);
  if (variant == "plane" || variant == "hole") {
    term.model.variant = variant == "plane" ? CpVariant::analytic_plane : CpVariant::analytic_hole;
    term.model.n = req_num(t, "terms.cp", "n");
    term.model.z_surface = opt_num(t, "z_surface_nm", 0.0) * 1e-9;
    if (variant == "hole") term.model.R = req_num(t, "terms.cp", "R_nm") * 1e-9;
  } else if (variant == "grid") {
    term.model.variant = CpVariant::ingested_grid;
    const std::string path = req_str(t, "terms.cp", "grid");
    term.model.grid = std::make_shared<Field3>(read_cp_grid(path));
    ctx.data_files.insert(path);
  } else {
    config_fail("terms.cp.variant: expected plane, hole or grid");
  }
  return term;
}

TrapScene parse_scene(Ctx& ctx, const AtomSpecies& sp, const json& cfg) {
  TrapScene scene;
  scene.species = sp;
  const json& terms = cfg.at("terms");
  expect_keys(terms, "terms", {"cp", "si", "gm"});
  if (terms.contains("cp")) scene.cp.push_back(parse_cp_term(ctx, terms["cp"]));
  if (terms.contains("si")) scene.si.push_back(parse_si_term(sp, terms["si"]));
  if (terms.contains("gm")) scene.gm.push_back(parse_gm_term(sp, terms["gm"]));
  if (scene.cp.empty() && scene.si.empty() && scene.gm.empty())
    config_fail("terms: at least one potential term is required");
  return scene;
}

void add_cut(Ctx& ctx, const TrapScene& scene, const Eigen::Vector3d& center, int axis,
             const Eigen::ArrayXd& positions, const std::string& name) {
  Table t;
  const char* axis_name[] = {"x_nm", "y_nm", "z_nm"};
  t.columns = {axis_name[axis], "V_tot_over_h_Hz", "V_cp_over_h_Hz", "V_si_over_h_Hz",
               "V_gm_over_h_Hz"};
  for (Eigen::Index i = 0; i < positions.size(); ++i) {
    Eigen::Vector3d r = center;
    r[axis] = positions[i];
    double vcp = 0, vsi = 0, vgm = 0;
    for (const auto& term : scene.cp)
      if (term.enabled) vcp += cp_potential(term.model, scene.species, r);
    for (const auto& term : scene.si)
      if (term.enabled) vsi += si_potential(term.params, r.z(), term.z_t);
    for (const auto& term : scene.gm)
      if (term.enabled) vgm += gm_potential(term.params, r);
    t.add_row({positions[i] * 1e9, energy_over_h(vcp + vsi + vgm), energy_over_h(vcp),
               energy_over_h(vsi), energy_over_h(vgm)});
  }
  ctx.emit(name, t);
}

// lattice scale estimates (recoil, tunneling bound) for the deepest site or
// at a prescribed depth; the depth policy is recorded in the artifact
void emit_hubbard(Ctx& ctx, RunResult& res, const AtomSpecies& sp, double d, double s,
                  const std::string& policy) {
  const HubbardScales h = hubbard_scales(sp, d, s * recoil_energy(sp, d));
  json j;
  j["s_policy"] = policy;
  j["s"] = h.s;
  j["E_R_over_h_Hz"] = energy_over_h(h.E_R);
  j["J_tunnel_over_h_Hz"] = energy_over_h(h.J_tunnel);
  j["nu_t_Hz"] = h.nu_t;
  ctx.emit_json("hubbard", j);
  res.summary["E_R_over_h_Hz"] = energy_over_h(h.E_R);
  res.summary["J_tunnel_over_h_Hz"] = energy_over_h(h.J_tunnel);
  res.summary["nu_t_Hz"] = h.nu_t;
  res.summary["s_used"] = h.s;
}

RunResult run_trap(Ctx& ctx, const json& cfg) {
  expect_keys(cfg, "config",
              {"kind", "species", "d_nm", "terms", "grid", "characterize", "line_cuts",
               "max_sites", "hubbard"});
  const AtomSpecies sp = get_species(ctx, cfg);
  const double d = req_num(cfg, "config", "d_nm") * 1e-9;

  // scale-estimate-only mode: a prescribed depth in recoils, no grid scan
  if (cfg.contains("hubbard") && !cfg.contains("grid")) {
    const json& hb = cfg["hubbard"];
    expect_keys(hb, "hubbard", {"fixed_s"});
    RunResult res;
    emit_hubbard(ctx, res, sp, d, req_num(hb, "hubbard", "fixed_s"), "fixed");
    return res;
  }

  const TrapScene scene = parse_scene(ctx, sp, cfg);

  const json& grid = cfg.at("grid");
  expect_keys(grid, "grid", {"x_nm", "y_nm", "z_nm"});
  const Eigen::ArrayXd gx = parse_axis(grid.at("x_nm"), "grid.x_nm") * 1e-9;
  const Eigen::ArrayXd gy = parse_axis(grid.at("y_nm"), "grid.y_nm") * 1e-9;
  const Eigen::ArrayXd gz = parse_axis(grid.at("z_nm"), "grid.z_nm") * 1e-9;

  const auto field = evaluate_grid(scene, gx, gy, gz);
  const auto minima = find_minima(field);

  CharacterizeParams cp;
  const double spacing = std::min({gx.size() > 1 ? gx[1] - gx[0] : d,
                                   gy.size() > 1 ? gy[1] - gy[0] : d,
                                   gz.size() > 1 ? gz[1] - gz[0] : d});
  cp.fd_scale = spacing;
  cp.scan_extent = Eigen::Vector3d::Constant(d);
  cp.scan_points = 400;
  if (cfg.contains("characterize")) {
    const json& ch = cfg["characterize"];
    expect_keys(ch, "characterize", {"fd_scale_nm", "scan_extent_nm", "scan_points"});
    if (ch.contains("fd_scale_nm")) cp.fd_scale = ch["fd_scale_nm"].get<double>() * 1e-9;
    if (ch.contains("scan_extent_nm"))
      cp.scan_extent = Eigen::Vector3d::Constant(ch["scan_extent_nm"].get<double>() * 1e-9);
    if (ch.contains("scan_points")) cp.scan_points = ch["scan_points"].get<int>();
  }

  const int max_sites = static_cast<int>(opt_num(cfg, "max_sites", 5));
  const double er = recoil_energy(sp, d);

  Table t;
  t.columns = {"x_nm",   "y_nm",   "z_nm",   "V_min_over_h_Hz", "Vd_x_over_h_Hz",
               "Vd_y_over_h_Hz", "Vd_z_over_h_Hz", "nu_x_Hz", "nu_y_Hz",
               "nu_z_Hz", "s"};
  RunResult res;
  int count = 0;
  for (const auto& pos : minima) {
    if (count >= max_sites) break;
    TrapSite site;
    try {
      site = characterize(scene, pos, cp);
    } catch (const std::domain_error&) {
      continue;  // refined position failed the curvature test: skip
    }
    const double vd_min = site.depth_per_axis.minCoeff();
    const double s = vd_min >= 0 ? vd_min / er : 0.0;
    t.add_row({site.position.x() * 1e9, site.position.y() * 1e9, site.position.z() * 1e9,
               energy_over_h(site.value), energy_over_h(site.depth_per_axis.x()),
               energy_over_h(site.depth_per_axis.y()), energy_over_h(site.depth_per_axis.z()),
               to_ordinary_hz(site.frequencies.x()), to_ordinary_hz(site.frequencies.y()),
               to_ordinary_hz(site.frequencies.z()), s});
    if (count == 0) {
      res.summary["nu_x_Hz"] = to_ordinary_hz(site.frequencies.x());
      res.summary["nu_y_Hz"] = to_ordinary_hz(site.frequencies.y());
      res.summary["nu_z_Hz"] = to_ordinary_hz(site.frequencies.z());
      res.summary["Vd_min_over_h_Hz"] = energy_over_h(vd_min);
      res.summary["s"] = s;
      if (cfg.value("line_cuts", true)) {
        add_cut(ctx, scene, site.position, 0, gx, "cut_x");
        add_cut(ctx, scene, site.position, 1, gy, "cut_y");
        add_cut(ctx, scene, site.position, 2, gz, "cut_z");
      }
      if (cfg.contains("hubbard")) {
        const json& hb = cfg["hubbard"];
        expect_keys(hb, "hubbard", {"fixed_s"});
        if (hb.contains("fixed_s"))
          emit_hubbard(ctx, res, sp, d, hb["fixed_s"].get<double>(), "fixed");
        else
          emit_hubbard(ctx, res, sp, d, s, "measured");
      }
    }
    ++count;
  }
  ctx.emit("trap_sites", t);
  res.summary["n_sites"] = static_cast<double>(count);
  return res;
}

// --------------------------------------------------------- vacuum lattice

RunResult run_vacuum_lattice(Ctx& ctx, const json& cfg) {
  expect_keys(cfg, "config",
              {"kind", "species", "cp_grid", "si", "vertical_cuts", "horizontal_cuts"});
  const AtomSpecies sp = get_species(ctx, cfg);
  const std::string grid_path = req_str(cfg, "config", "cp_grid");
  auto grid = std::make_shared<Field3>(read_cp_grid(grid_path));
  ctx.data_files.insert(grid_path);

  TrapScene scene;
  scene.species = sp;
  scene.cp.push_back({CPModel{CpVariant::ingested_grid, 0, 0, 0, grid}, true});
  if (cfg.contains("si")) scene.si.push_back(parse_si_term(sp, cfg["si"]));

  RunResult res;
  double v_min = std::numeric_limits<double>::infinity();

  if (cfg.contains("vertical_cuts")) {
    const json& vc = cfg["vertical_cuts"];
    expect_keys(vc, "vertical_cuts", {"x_nm", "y_values_nm", "z_nm"});
    const double x = opt_num(vc, "x_nm", 0.0) * 1e-9;
    const Eigen::ArrayXd zs = parse_axis(vc.at("z_nm"), "vertical_cuts.z_nm") * 1e-9;
    Table t;
    t.columns = {"y_nm", "z_nm", "V_cp_over_h_Hz", "V_si_over_h_Hz", "V_tot_over_h_Hz"};
    for (const auto& yv : vc.at("y_values_nm")) {
      const double y = yv.get<double>() * 1e-9;
      for (Eigen::Index i = 0; i < zs.size(); ++i) {
        const Eigen::Vector3d r{x, y, zs[i]};
        const double vcp = cp_potential(scene.cp[0].model, sp, r);
        const double vsi =
            scene.si.empty() ? 0.0 : si_potential(scene.si[0].params, r.z(), scene.si[0].z_t);
        v_min = std::min(v_min, vcp + vsi);
        t.add_row({y * 1e9, zs[i] * 1e9, energy_over_h(vcp), energy_over_h(vsi),
                   energy_over_h(vcp + vsi)});
      }
    }
    ctx.emit("vertical_cuts", t);
  }

  if (cfg.contains("horizontal_cuts")) {
    const json& hc = cfg["horizontal_cuts"];
    expect_keys(hc, "horizontal_cuts", {"x_nm", "z_values_nm", "y_nm"});
    const double x = opt_num(hc, "x_nm", 0.0) * 1e-9;
    const Eigen::ArrayXd ys = parse_axis(hc.at("y_nm"), "horizontal_cuts.y_nm") * 1e-9;
    Table t;
    t.columns = {"z_t_nm", "y_nm", "V_cp_over_h_Hz", "V_si_over_h_Hz", "V_tot_over_h_Hz"};
    for (const auto& zv : hc.at("z_values_nm")) {
      const double z = zv.get<double>() * 1e-9;
      for (Eigen::Index i = 0; i < ys.size(); ++i) {
        const Eigen::Vector3d r{x, ys[i], z};
        const double vcp = cp_potential(scene.cp[0].model, sp, r);
        const double vsi =
            scene.si.empty() ? 0.0 : si_potential(scene.si[0].params, r.z(), scene.si[0].z_t);
        t.add_row({z * 1e9, ys[i] * 1e9, energy_over_h(vcp), energy_over_h(vsi),
                   energy_over_h(vcp + vsi)});
      }
    }
    ctx.emit("horizontal_cuts", t);
  }

  res.summary["V_tot_min_over_h_Hz"] = energy_over_h(v_min);
  return res;
}

// --------------------------------------------------------------- coupling

RunResult run_coupling(Ctx& ctx, const json& cfg) {
  expect_keys(cfg, "config",
              {"kind", "species", "patch", "gamma2d_sweep", "kernel_curve", "bz_scan"});
  const AtomSpecies sp = get_species(ctx, cfg);
  const BandPatch patch = parse_patch(ctx, cfg.at("patch"));

  RunResult res;
  res.summary["Gamma_2d_over_Gamma_a"] = gamma_2d(sp, patch) / sp.Gamma_a;
  res.summary["L_m_um"] = patch.L_m * 1e6;

  if (cfg.contains("gamma2d_sweep")) {
    const json& sw = cfg["gamma2d_sweep"];
    expect_keys(sw, "gamma2d_sweep", {"A_um2_per_s_min", "A_um2_per_s_max", "points"});
    const auto as = logspace(req_num(sw, "gamma2d_sweep", "A_um2_per_s_min"),
                             req_num(sw, "gamma2d_sweep", "A_um2_per_s_max"),
                             static_cast<int>(req_num(sw, "gamma2d_sweep", "points")));
    Table t;
    t.columns = {"A_um2_per_s", "Gamma_2d_over_2pi_Hz", "Gamma_2d_over_Gamma_a"};
    for (Eigen::Index i = 0; i < as.size(); ++i) {
      const auto p = make_band_patch(patch.omega_c, as[i] * 1e-12, patch.L_m, patch.d);
      const double g = gamma_2d(sp, p);
      t.add_row({as[i], to_ordinary_hz(g), g / sp.Gamma_a});
    }
    ctx.emit("gamma2d_sweep", t);
  }

  if (cfg.contains("kernel_curve")) {
    const json& kc = cfg["kernel_curve"];
    expect_keys(kc, "kernel_curve",
                {"regime", "xi_over_d", "r_over_d_min", "r_over_d_max", "points"});
    const std::string regime = kc.value("regime", "bandgap");
    const double xi = req_num(kc, "kernel_curve", "xi_over_d") * patch.d;
    const double delta_mag = patch.A / (xi * xi);
    const auto rs = Eigen::ArrayXd::LinSpaced(
        static_cast<int>(req_num(kc, "kernel_curve", "points")),
        opt_num(kc, "r_over_d_min", 1.0), req_num(kc, "kernel_curve", "r_over_d_max"));
    Table t;
    if (regime == "bandgap") {
      const auto kp = make_kernel_params(sp, patch, -delta_mag);
      t.columns = {"r_over_d", "J_over_hbeta_Gamma_2d"};
      for (Eigen::Index i = 0; i < rs.size(); ++i)
        t.add_row({rs[i], kernel_bandgap(kp, rs[i] * patch.d) / kp.Gamma_2d});
    } else if (regime == "dispersive") {
      const auto kp = make_kernel_params(sp, patch, delta_mag);
      t.columns = {"r_over_d", "gamma_half_over_hbeta_Gamma_2d", "J_over_hbeta_Gamma_2d"};
      for (Eigen::Index i = 0; i < rs.size(); ++i) {
        const auto g = kernel_dispersive(kp, rs[i] * patch.d);
        t.add_row({rs[i], g.real() / kp.Gamma_2d, g.imag() / kp.Gamma_2d});
      }
    } else {
      config_fail("kernel_curve.regime: expected bandgap or dispersive");
    }
    ctx.emit("kernel_curve", t);
  }

  if (cfg.contains("bz_scan")) {
    const json& bz = cfg["bz_scan"];
    expect_keys(bz, "bz_scan",
                {"band_grid", "delta_over_2pi_Hz_min", "delta_over_2pi_Hz_max", "points",
                 "r_ij_units_of_d"});
    const std::string path = req_str(bz, "bz_scan", "band_grid");
    const BandGrid grid = read_band_grid(path, patch.d);
    ctx.data_files.insert(path);
    Eigen::Vector2d r{patch.d, 0};
    if (bz.contains("r_ij_units_of_d")) {
      const auto& rr = bz["r_ij_units_of_d"];
      if (!rr.is_array() || rr.size() != 2) config_fail("bz_scan.r_ij_units_of_d: need [nx, ny]");
      r = {rr[0].get<double>() * patch.d, rr[1].get<double>() * patch.d};
    }
    const auto deltas = logspace(req_num(bz, "bz_scan", "delta_over_2pi_Hz_min"),
                                 req_num(bz, "bz_scan", "delta_over_2pi_Hz_max"),
                                 static_cast<int>(req_num(bz, "bz_scan", "points")));
    const double omega_edge = grid.omega(0, 0);
    Table t;
    t.columns = {"Delta_over_2pi_Hz", "J_over_Gamma_a", "xi_over_d_from_patch_A"};
    for (Eigen::Index i = 0; i < deltas.size(); ++i) {
      const double delta = to_angular(deltas[i]);
      const double j = bz_integrate_bandgap(grid, sp, omega_edge - delta, r);
      t.add_row({deltas[i], j / sp.Gamma_a, interaction_length(patch.A, delta) / patch.d});
    }
    ctx.emit("bz_scan", t);
  }
  return res;
}

// ----------------------------------------------------------------- budget

RunResult run_budget(Ctx& ctx, const json& cfg) {
  expect_keys(cfg, "config",
              {"kind", "species", "patch", "Q", "Gamma_prime_over_Gamma_a", "delta_scan"});
  const AtomSpecies sp = get_species(ctx, cfg);
  const BandPatch patch = parse_patch(ctx, cfg.at("patch"));
  const double q = req_num(cfg, "config", "Q");
  const double gp = req_num(cfg, "config", "Gamma_prime_over_Gamma_a") * sp.Gamma_a;

  const json& scan = cfg.at("delta_scan");
  expect_keys(scan, "delta_scan", {"min_over_2pi_Hz", "max_over_2pi_Hz", "points"});
  const auto deltas = logspace(req_num(scan, "delta_scan", "min_over_2pi_Hz"),
                               req_num(scan, "delta_scan", "max_over_2pi_Hz"),
                               static_cast<int>(req_num(scan, "delta_scan", "points")));

  Table t;
  t.columns = {"Delta_over_2pi_Hz", "J_over_Gamma_a", "kappa_eff_over_2pi_Hz", "N_cycles",
               "xi_over_d"};
  for (Eigen::Index i = 0; i < deltas.size(); ++i) {
    const auto rep = coherence_cycles(q, gp, sp, patch, to_angular(deltas[i]));
    t.add_row({deltas[i], rep.J / sp.Gamma_a, to_ordinary_hz(rep.kappa_eff), rep.N,
               rep.xi / patch.d});
  }
  ctx.emit("budget_curve", t);

  const auto opt = optimize_detuning(q, gp, sp, patch, to_angular(deltas[0]),
                                     to_angular(deltas[deltas.size() - 1]));
  json rep;
  rep["Q"] = q;
  rep["kappa_2pi"] = to_ordinary_hz(kappa_from_q(patch.omega_c, q));
  rep["Gamma_prime_over_Gamma_a"] = gp / sp.Gamma_a;
  rep["Delta_star_2pi"] = to_ordinary_hz(opt.Delta_star);
  rep["N_max"] = opt.N_max;
  rep["J_over_Gamma_a"] = opt.J_star / sp.Gamma_a;
  rep["xi_over_d"] = opt.xi_star / patch.d;
  rep["boundary_warning"] = opt.boundary_warning;
  ctx.emit_json("budget", rep);

  RunResult res;
  res.summary["N_max"] = opt.N_max;
  res.summary["Delta_star_over_2pi_Hz"] = to_ordinary_hz(opt.Delta_star);
  res.summary["J_over_Gamma_a"] = opt.J_star / sp.Gamma_a;
  res.summary["xi_over_d"] = opt.xi_star / patch.d;
  res.summary["kappa_over_2pi_Hz"] = to_ordinary_hz(kappa_from_q(patch.omega_c, q));
  return res;
}

// ------------------------------------------------------------------ spins

Eigen::MatrixXd parse_matrix(const json& arr, Eigen::Index n, const std::string& where) {
  if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != n)
    config_fail(where + ": expected a " + std::to_string(n) + "x" + std::to_string(n) +
                " matrix");
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = arr[i];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
      config_fail(where + ": ragged matrix row");
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = to_angular(row[j].get<double>());
  }
  if (!m.isApprox(m.transpose(), 1e-12)) config_fail(where + ": matrix must be symmetric");
  return m;
}

RunResult run_spins(Ctx& ctx, const json& cfg) {
  expect_keys(cfg, "config",
              {"kind", "species", "d_nm", "sites_units_of_d", "model", "scheme", "patch",
               "initial_state", "times", "include_onsite", "correlators"});
  const double d = req_num(cfg, "config", "d_nm") * 1e-9;

  const json& sites_j = cfg.at("sites_units_of_d");
  if (!sites_j.is_array() || sites_j.empty()) config_fail("sites_units_of_d: need site list");
  const Eigen::Index n = static_cast<Eigen::Index>(sites_j.size());
  Eigen::MatrixX2d sites(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = sites_j[i];
    if (!s.is_array() || s.size() != 2) config_fail("sites_units_of_d: each site is [nx, ny]");
    sites(i, 0) = s[0].get<double>() * d;
    sites(i, 1) = s[1].get<double>() * d;
  }

  SpinModel model;
  if (cfg.contains("model")) {
    const json& m = cfg["model"];
    expect_keys(m, "model",
                {"Jxy_over_2pi_Hz", "Jz_over_2pi_Hz", "gamma_xy_over_2pi_Hz",
                 "gamma_z_over_2pi_Hz"});
    model.sites = sites;
    model.Jxy = m.contains("Jxy_over_2pi_Hz")
                    ? parse_matrix(m["Jxy_over_2pi_Hz"], n, "model.Jxy")
                    : Eigen::MatrixXd::Zero(n, n);
    model.Jz = m.contains("Jz_over_2pi_Hz") ? parse_matrix(m["Jz_over_2pi_Hz"], n, "model.Jz")
                                            : Eigen::MatrixXd::Zero(n, n);
    model.gamma_xy = m.contains("gamma_xy_over_2pi_Hz")
                         ? parse_matrix(m["gamma_xy_over_2pi_Hz"], n, "model.gamma_xy")
                         : Eigen::MatrixXd::Zero(n, n);
    model.gamma_z = m.contains("gamma_z_over_2pi_Hz")
                        ? parse_matrix(m["gamma_z_over_2pi_Hz"], n, "model.gamma_z")
                        : Eigen::MatrixXd::Zero(n, n);
    if (model.gamma_xy.cwiseAbs().maxCoeff() > 0 || model.gamma_z.cwiseAbs().maxCoeff() > 0)
      model.regime_xy = model.regime_z = CouplingRegime::dispersive;
  } else if (cfg.contains("scheme") && cfg.contains("patch")) {
    const AtomSpecies sp = get_species(ctx, cfg);
    const BandPatch patch = parse_patch(ctx, cfg.at("patch"));
    const json& s = cfg["scheme"];
    expect_keys(s, "scheme",
                {"Omega_1_over_2pi_Hz", "Omega_2_over_2pi_Hz", "Delta_z_over_2pi_Hz",
                 "Delta_xy_over_2pi_Hz", "Delta_1_over_2pi_Hz", "ground_splitting_over_2pi_Hz"});
    const double omega_g2 = to_angular(opt_num(s, "ground_splitting_over_2pi_Hz",
                                               6.834682610904e9));
    const double delta_1 = to_angular(opt_num(s, "Delta_1_over_2pi_Hz", 3e13));
    const double delta_z = to_angular(req_num(s, "scheme", "Delta_z_over_2pi_Hz"));
    const double delta_xy = to_angular(req_num(s, "scheme", "Delta_xy_over_2pi_Hz"));
    const double omega_l1 = patch.omega_c + delta_z;
    const double omega_l2 = patch.omega_c + delta_xy - omega_g2;
    const double omega_e = omega_l1 + delta_1;  // omega_g1 = 0 reference
    const auto scheme = make_lambda_scheme(
        to_angular(req_num(s, "scheme", "Omega_1_over_2pi_Hz")),
        to_angular(req_num(s, "scheme", "Omega_2_over_2pi_Hz")), omega_l1, omega_l2, 0.0,
        omega_g2, omega_e, patch.omega_c);
    model = build_spin_model(sp, scheme, patch, sites);
  } else {
    config_fail("spins: need either 'model' matrices or 'scheme' + 'patch'");
  }

  const auto rho0 = DensityMatrix::product_state(req_str(cfg, "config", "initial_state"));
  if (rho0.n_spins() != static_cast<int>(n))
    config_fail("initial_state: spin count does not match sites");

  const json& times = cfg.at("times");
  expect_keys(times, "times", {"t_max_over_J", "t_max_s", "points"});
  const int points = static_cast<int>(req_num(times, "times", "points"));
  double t_max = 0;
  if (times.contains("t_max_s")) {
    t_max = times["t_max_s"].get<double>();
  } else {
    double jscale = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (i != j)
          jscale = std::max({jscale, std::abs(model.Jxy(i, j)), std::abs(model.Jz(i, j)),
                             std::abs(model.gamma_xy(i, j))});
    if (jscale == 0) config_fail("times.t_max_over_J: model has no off-diagonal coupling");
    t_max = req_num(times, "times", "t_max_over_J") / jscale;
  }

  const bool correlators = cfg.value("correlators", false);
  EvolveOptions eopt;
  eopt.store_states = correlators;
  const auto result = evolve(rho0, model, Eigen::VectorXd::LinSpaced(points, 0.0, t_max), eopt);

  Table t;
  t.columns = {"t_s"};
  for (Eigen::Index i = 0; i < n; ++i) t.columns.push_back("sz_" + std::to_string(i));
  t.columns.push_back("total_sz");
  t.columns.push_back("purity");
  if (correlators) {
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const std::string tag = std::to_string(i) + "_" + std::to_string(j);
        t.columns.push_back("re_corr_pm_" + tag);
        t.columns.push_back("im_corr_pm_" + tag);
      }
  }
  for (int k = 0; k < points; ++k) {
    std::vector<double> row{result.times[k]};
    for (Eigen::Index i = 0; i < n; ++i) row.push_back(result.sz(k, i));
    row.push_back(result.total_sz[k]);
    row.push_back(result.purity[k]);
    if (correlators) {
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
          const auto corr =
              correlator_pm(result.states[k], static_cast<int>(i), static_cast<int>(j),
                            static_cast<int>(n));
          row.push_back(corr.real());
          row.push_back(corr.imag());
        }
    }
    t.add_row(row);
  }
  ctx.emit("spins", t);

  RunResult res;
  res.summary["final_total_sz"] = result.total_sz[points - 1];
  res.summary["final_purity"] = result.purity[points - 1];
  res.summary["max_trace_dev"] = result.max_trace_dev;
  return res;
}

// ------------------------------------------------------------------ sweep

RunResult dispatch(Ctx& ctx, const json& cfg);

void set_path(json& obj, const std::string& path, const json& value) {
  json* cur = &obj;
  size_t start = 0;
  while (true) {
    const size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (key.empty()) config_fail("sweep axis path: empty key in '" + path + "'");
    if (dot == std::string::npos) {
      (*cur)[key] = value;
      return;
    }
    if (!cur->contains(key)) (*cur)[key] = json::object();
    cur = &(*cur)[key];
    start = dot + 1;
  }
}

RunResult run_sweep(Ctx& ctx, const json& cfg) {
  expect_keys(cfg, "config", {"kind", "base", "axes"});
  const json& base = cfg.at("base");
  const json& axes = cfg.at("axes");
  if (!axes.is_array()) config_fail("axes: expected an array");
  for (const auto& axis : axes) {
    expect_keys(axis, "axes[]", {"path", "values"});
    if (!axis.at("values").is_array() || axis["values"].empty())
      config_fail("axes[].values: need a nonempty array");
  }

  // cartesian product, row-major with the last axis fastest
  size_t total = 1;
  for (const auto& axis : axes) total *= axis["values"].size();

  std::vector<json> configs(total);
  std::vector<std::vector<double>> axis_values(total);
  for (size_t idx = 0; idx < total; ++idx) {
    json row = base;
    size_t rem = idx;
    std::vector<double> vals(axes.size());
    for (size_t a = axes.size(); a-- > 0;) {
      const auto& values = axes[a]["values"];
      const size_t vi = rem % values.size();
      rem /= values.size();
      set_path(row, axes[a]["path"].get<std::string>(), values[vi]);
      vals[a] = values[vi].get<double>();
    }
    configs[idx] = std::move(row);
    axis_values[idx] = std::move(vals);
  }

  // evaluate rows in parallel; outputs ordered by index regardless of timing
  std::vector<std::map<std::string, double>> summaries(total);
  std::vector<std::string> errors(total);
  std::mutex files_mtx;
  const int threads = ctx.opts.threads > 0
                          ? ctx.opts.threads
                          : std::max(1u, std::thread::hardware_concurrency());
  const auto worker = [&](size_t first) {
    for (size_t idx = first; idx < total; idx += static_cast<size_t>(threads)) {
      try {
        Ctx row_ctx;
        row_ctx.opts = ctx.opts;
        row_ctx.write = false;
        summaries[idx] = dispatch(row_ctx, configs[idx]).summary;
        std::lock_guard<std::mutex> lock(files_mtx);
        ctx.data_files.insert(row_ctx.data_files.begin(), row_ctx.data_files.end());
      } catch (const std::exception& e) {
        errors[idx] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w) pool.emplace_back(worker, static_cast<size_t>(w));
  for (auto& th : pool) th.join();
  for (size_t idx = 0; idx < total; ++idx)
    if (!errors[idx].empty())
      throw std::runtime_error("sweep row " + std::to_string(idx) + ": " + errors[idx]);

  // column set: axis paths, then the first row's summary keys (sorted maps
  // keep the order deterministic)
  Table t;
  for (const auto& axis : axes) t.columns.push_back(axis["path"].get<std::string>());
  std::vector<std::string> summary_keys;
  for (const auto& [key, unused] : summaries[0]) summary_keys.push_back(key);
  t.columns.insert(t.columns.end(), summary_keys.begin(), summary_keys.end());
  for (size_t idx = 0; idx < total; ++idx) {
    std::vector<double> row = axis_values[idx];
    for (const auto& key : summary_keys) {
      const auto it = summaries[idx].find(key);
      row.push_back(it == summaries[idx].end() ? std::nan("") : it->second);
    }
    t.add_row(row);
  }
  ctx.emit("sweep", t);

  RunResult res;
  res.summary["rows"] = static_cast<double>(total);
  return res;
}

RunResult dispatch(Ctx& ctx, const json& cfg) {
  const std::string kind = req_str(cfg, "config", "kind");
  if (kind == "slab") return run_slab(ctx, cfg);
  if (kind == "trap") return run_trap(ctx, cfg);
  if (kind == "vacuum-lattice") return run_vacuum_lattice(ctx, cfg);
  if (kind == "coupling") return run_coupling(ctx, cfg);
  if (kind == "budget") return run_budget(ctx, cfg);
  if (kind == "spins") return run_spins(ctx, cfg);
  if (kind == "sweep") return run_sweep(ctx, cfg);
  config_fail("unknown kind '" + kind + "'");
}

}  // namespace

namespace {

// one canonical spelling per failure class, machine-readable on stderr
json error_json(const std::string& type, const std::string& message) {
  json j;
  j["error"]["type"] = type;
  j["error"]["message"] = message;
  return j;
}

}  // namespace

RunResult run_scenario(const std::string& config_bytes, const std::string& expected_kind,
                       const RunOptions& options) {
  json cfg;
  try {
    cfg = json::parse(config_bytes);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("config parse error: ") + e.what());
  }
  if (!expected_kind.empty()) {
    const std::string kind = cfg.value("kind", "");
    if (kind != expected_kind)
      config_fail("kind '" + kind + "' does not match subcommand '" + expected_kind + "'");
  }

  Ctx ctx;
  ctx.opts = options;
  RunResult res = dispatch(ctx, cfg);

  const RunManifest manifest = make_manifest(
      config_bytes, std::vector<std::string>(ctx.data_files.begin(), ctx.data_files.end()));
  if (ctx.write) {
    fs::create_directories(options.out_dir);
    const std::string path = options.out_dir + "/manifest.json";
    std::ofstream out(path);
    out << manifest_json(manifest);
    ctx.artifacts.push_back(path);
  }
  res.artifacts = ctx.artifacts;
  return res;
}

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"pcwlat: subwavelength lattices and photon-mediated couplings near 2-D PCWs"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", format = "csv", species_file;
  int threads = 0;

  const std::vector<std::pair<std::string, std::string>> kinds = {
      {"slab", "symmetric TE slab modes and the minimum lattice constant"},
      {"trap", "trap-scene grid scan: sites, depths, frequencies, line cuts"},
      {"vacuum-lattice", "CP-grid scans: vertical/horizontal potential cut families"},
      {"coupling", "Gamma_2d sweeps, kernel curves, Brillouin-zone integration"},
      {"budget", "coherence budget N(Delta) curve and optimal detuning report"},
      {"spins", "few-spin master-equation evolution time series"},
      {"sweep", "cartesian parameter sweep over any scenario"}};
  for (const auto& [name, blurb] : kinds) {
    auto* sub = app.add_subcommand(name, blurb);
    sub->add_option("--config", config_path, "scenario config file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory")->envname("PCWLAT_OUT");
    sub->add_option("--threads", threads, "worker threads for sweeps (0 = all cores)")
        ->envname("PCWLAT_THREADS");
    sub->add_option("--format", format, "artifact table format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->envname("PCWLAT_FORMAT");
    sub->add_option("--species-file", species_file, "species reference-data file")
        ->envname("PCWLAT_SPECIES_FILE");
  }

  // CLI11 consumes argv-style arrays; rebuild one with a program name slot
  std::vector<const char*> argv;
  argv.push_back("pcwlat");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  const std::string kind = app.get_subcommands().front()->get_name();
  std::ifstream in(config_path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();

  RunOptions opts;
  opts.out_dir = out_dir;
  opts.threads = threads;
  opts.format = format;
  opts.species_file = species_file;

  try {
    const RunResult res = run_scenario(buf.str(), kind, opts);
    for (const auto& artifact : res.artifacts) std::cout << artifact << "\n";
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << error_json("validation", e.what()).dump() << "\n";
  } catch (const std::domain_error& e) {
    std::cerr << error_json("domain", e.what()).dump() << "\n";
  } catch (const std::out_of_range& e) {
    std::cerr << error_json("range", e.what()).dump() << "\n";
  } catch (const std::exception& e) {
    std::cerr << error_json("runtime", e.what()).dump() << "\n";
  }
  return 1;
}

}  // namespace pcwlat
