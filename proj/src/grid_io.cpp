#include "pcwlat/grid_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pcwlat/constants.hpp"
#include "pcwlat/units.hpp"

namespace pcwlat {

namespace {

[[noreturn]] void parse_fail(const std::string& path, long line, const std::string& msg) {
  std::ostringstream out;
  out << path << ":" << line << ": " << msg;
  throw std::runtime_error(out.str());
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct TableReader {
  std::string path;
  std::ifstream in;
  long line_no = 0;

  explicit TableReader(const std::string& p) : path(p), in(p) {
    if (!in) throw std::runtime_error(path + ": not readable");
  }

  // next non-comment, non-blank line; false at EOF
  bool next(std::string& line) {
    while (std::getline(in, line)) {
      ++line_no;
      const auto pos = line.find('#');
      if (pos != std::string::npos) line.erase(pos);
      if (line.find_first_not_of(" \t\r\n") != std::string::npos) return true;
    }
    return false;
  }
};

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream ss(s);
  return {std::istream_iterator<std::string>(ss), std::istream_iterator<std::string>()};
}

double parse_double(const std::string& tok, const std::string& path, long line) {
  try {
    size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) parse_fail(path, line, "trailing characters in number '" + tok + "'");
    return v;
  } catch (const std::invalid_argument&) {
    parse_fail(path, line, "not a number: '" + tok + "'");
  } catch (const std::out_of_range&) {
    parse_fail(path, line, "number out of range: '" + tok + "'");
  }
}

// collect the sorted unique values of a coordinate column
Eigen::ArrayXd unique_sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return Eigen::Map<Eigen::ArrayXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::Index find_index(const Eigen::ArrayXd& axis, double v, const std::string& path, long line) {
  const auto it = std::lower_bound(axis.data(), axis.data() + axis.size(), v);
  if (it == axis.data() + axis.size() || *it != v)
    parse_fail(path, line, "coordinate not on the grid lattice");
  return it - axis.data();
}

}  // namespace

BandGrid read_band_grid(const std::string& path, double d) {
  if (!(d > 0)) throw std::invalid_argument("read_band_grid: d must be > 0");
  TableReader r(path);
  std::string line;
  if (!r.next(line)) parse_fail(path, r.line_no, "empty file");
  const auto header = split_ws(line);
  const std::vector<std::string> want = {"kx_over_pi_d", "ky_over_pi_d", "omega_over_2pi_Hz",
                                         "Lm_m"};
  if (header != want)
    parse_fail(path, r.line_no,
               "expected header 'kx_over_pi_d ky_over_pi_d omega_over_2pi_Hz Lm_m'");

  struct Row {
    double kx, ky, omega, lm;
    long line;
  };
  std::vector<Row> rows;
  while (r.next(line)) {
    const auto tok = split_ws(line);
    if (tok.size() != 4) parse_fail(path, r.line_no, "expected 4 columns");
    rows.push_back({parse_double(tok[0], path, r.line_no), parse_double(tok[1], path, r.line_no),
                    parse_double(tok[2], path, r.line_no), parse_double(tok[3], path, r.line_no),
                    r.line_no});
  }
  if (rows.empty()) parse_fail(path, r.line_no, "no data rows");

  std::vector<double> kxs, kys;
  for (const auto& row : rows) {
    kxs.push_back(row.kx);
    kys.push_back(row.ky);
  }
  BandGrid grid;
  const double scale = constants::pi / d;
  const Eigen::ArrayXd ukx = unique_sorted(kxs), uky = unique_sorted(kys);
  grid.kx = ukx * scale;
  grid.ky = uky * scale;
  grid.d = d;
  grid.omega.setConstant(ukx.size(), uky.size(), std::numeric_limits<double>::quiet_NaN());
  grid.L_m.setConstant(ukx.size(), uky.size(), std::numeric_limits<double>::quiet_NaN());
  for (const auto& row : rows) {
    const Eigen::Index i = find_index(ukx, row.kx, path, row.line);
    const Eigen::Index j = find_index(uky, row.ky, path, row.line);
    if (!std::isnan(grid.omega(i, j))) parse_fail(path, row.line, "duplicate (kx, ky) sample");
    grid.omega(i, j) = to_angular(row.omega);
    grid.L_m(i, j) = row.lm;
  }
  if (grid.omega.isNaN().any())
    throw std::runtime_error(path + ": samples do not cover the full kx x ky product grid");
  grid.validate();
  return grid;
}

void write_band_grid(const std::string& path, const BandGrid& grid) {
  grid.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": not writable");
  out << "kx_over_pi_d\tky_over_pi_d\tomega_over_2pi_Hz\tLm_m\n";
  // divide by the same factor the reader multiplies with, so a read/write
  // cycle reproduces the stored axes
  const double scale = constants::pi / grid.d;
  for (Eigen::Index i = 0; i < grid.kx.size(); ++i)
    for (Eigen::Index j = 0; j < grid.ky.size(); ++j)
      out << fmt17(grid.kx[i] / scale) << '\t' << fmt17(grid.ky[j] / scale) << '\t'
          << fmt17(to_ordinary_hz(grid.omega(i, j))) << '\t' << fmt17(grid.L_m(i, j)) << '\n';
}

FieldDensity read_field_density(const std::string& path) {
  TableReader r(path);
  std::string line;
  if (!r.next(line)) parse_fail(path, r.line_no, "empty file");
  if (split_ws(line) != std::vector<std::string>{"x_m", "y_m", "z_m", "eps", "E2"})
    parse_fail(path, r.line_no, "expected header 'x_m y_m z_m eps E2'");

  struct Row {
    double x, y, z, eps, e2;
    long line;
  };
  std::vector<Row> rows;
  std::vector<double> xs, ys, zs;
  while (r.next(line)) {
    const auto tok = split_ws(line);
    if (tok.size() != 5) parse_fail(path, r.line_no, "expected 5 columns");
    Row row{parse_double(tok[0], path, r.line_no), parse_double(tok[1], path, r.line_no),
            parse_double(tok[2], path, r.line_no), parse_double(tok[3], path, r.line_no),
            parse_double(tok[4], path, r.line_no), r.line_no};
    rows.push_back(row);
    xs.push_back(row.x);
    ys.push_back(row.y);
    zs.push_back(row.z);
  }
  if (rows.empty()) parse_fail(path, r.line_no, "no data rows");

  const Eigen::ArrayXd ux = unique_sorted(xs), uy = unique_sorted(ys), uz = unique_sorted(zs);
  const Eigen::Index n = ux.size() * uy.size() * uz.size();
  Eigen::ArrayXd eps = Eigen::ArrayXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
  Eigen::ArrayXd e2 = eps;
  for (const auto& row : rows) {
    const Eigen::Index i = find_index(ux, row.x, path, row.line);
    const Eigen::Index j = find_index(uy, row.y, path, row.line);
    const Eigen::Index k = find_index(uz, row.z, path, row.line);
    const Eigen::Index idx = (i * uy.size() + j) * uz.size() + k;
    if (!std::isnan(eps[idx])) parse_fail(path, row.line, "duplicate (x, y, z) sample");
    eps[idx] = row.eps;
    e2[idx] = row.e2;
  }
  if (eps.isNaN().any())
    throw std::runtime_error(path + ": samples do not cover the full x-y-z product grid");
  return {Field3(ux, uy, uz, eps), Field3(ux, uy, uz, e2)};
}

void write_field_density(const std::string& path, const FieldDensity& field) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": not writable");
  out << "x_m\ty_m\tz_m\teps\tE2\n";
  const Field3& e = field.eps;
  for (Eigen::Index i = 0; i < e.nx(); ++i)
    for (Eigen::Index j = 0; j < e.ny(); ++j)
      for (Eigen::Index k = 0; k < e.nz(); ++k)
        out << fmt17(e.x()[i]) << '\t' << fmt17(e.y()[j]) << '\t' << fmt17(e.z()[k]) << '\t'
            << fmt17(e.at(i, j, k)) << '\t' << fmt17(field.E2.at(i, j, k)) << '\n';
}

Field3 read_cp_grid(const std::string& path) {
  TableReader r(path);
  std::string line;
  if (!r.next(line) || split_ws(line) != std::vector<std::string>{"pcwlat-cp-grid-v1"})
    parse_fail(path, r.line_no, "expected magic 'pcwlat-cp-grid-v1'");

  if (!r.next(line)) parse_fail(path, r.line_no, "missing dimensions line");
  const auto dims = split_ws(line);
  if (dims.size() != 3) parse_fail(path, r.line_no, "expected 'nx ny nz'");
  const long nx = std::lround(parse_double(dims[0], path, r.line_no));
  const long ny = std::lround(parse_double(dims[1], path, r.line_no));
  const long nz = std::lround(parse_double(dims[2], path, r.line_no));
  if (nx < 1 || ny < 1 || nz < 1) parse_fail(path, r.line_no, "dimensions must be >= 1");

  const auto read_range = [&](const char* label) {
    if (!r.next(line)) parse_fail(path, r.line_no, std::string("missing ") + label + " range");
    const auto tok = split_ws(line);
    if (tok.size() != 2) parse_fail(path, r.line_no, std::string(label) + " range needs 2 values");
    return std::pair{parse_double(tok[0], path, r.line_no),
                     parse_double(tok[1], path, r.line_no)};
  };
  const auto [x0, x1] = read_range("x");
  const auto [y0, y1] = read_range("y");
  const auto [z0, z1] = read_range("z");

  const auto linspace = [](double a, double b, long n) {
    Eigen::ArrayXd v(n);
    if (n == 1) {
      v[0] = a;
      return v;
    }
    for (long i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / (n - 1);
    return v;
  };

  Eigen::ArrayXd values(nx * ny * nz);
  Eigen::Index got = 0;
  while (got < values.size() && r.next(line)) {
    for (const auto& tok : split_ws(line)) {
      if (got >= values.size()) parse_fail(path, r.line_no, "more values than nx*ny*nz");
      values[got++] = parse_double(tok, path, r.line_no);
    }
  }
  if (got < values.size()) {
    std::ostringstream msg;
    msg << "expected " << values.size() << " values, got " << got << " (file truncated)";
    parse_fail(path, r.line_no, msg.str());
  }
  try {
    return Field3(linspace(x0, x1, nx), linspace(y0, y1, ny), linspace(z0, z1, nz), values);
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void write_cp_grid(const std::string& path, const Field3& field) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": not writable");
  out << "pcwlat-cp-grid-v1\n";
  out << field.nx() << ' ' << field.ny() << ' ' << field.nz() << '\n';
  out << fmt17(field.x()[0]) << ' ' << fmt17(field.x()[field.nx() - 1]) << '\n';
  out << fmt17(field.y()[0]) << ' ' << fmt17(field.y()[field.ny() - 1]) << '\n';
  out << fmt17(field.z()[0]) << ' ' << fmt17(field.z()[field.nz() - 1]) << '\n';
  for (Eigen::Index i = 0; i < field.values().size(); ++i)
    out << fmt17(field.values()[i]) << '\n';
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (const unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::string bytes_hash(const std::string& bytes) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": not readable for hashing");
  std::ostringstream ss;
  ss << in.rdbuf();
  return bytes_hash(ss.str());
}

}  // namespace pcwlat
