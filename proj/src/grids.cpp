#include "pcwlat/grids.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pcwlat {

namespace {

void check_axis(const Eigen::ArrayXd& a, const char* label) {
  if (a.size() < 1) throw std::invalid_argument(std::string("Field3: empty ") + label + " axis");
  for (Eigen::Index i = 0; i + 1 < a.size(); ++i)
    if (!(a[i] < a[i + 1]))
      throw std::invalid_argument(std::string("Field3: ") + label +
                                  " axis not strictly increasing");
  if (!a.isFinite().all())
    throw std::invalid_argument(std::string("Field3: non-finite ") + label + " axis");
}

// Largest i with a[i] <= v, clamped so that i+1 is valid.
Eigen::Index cell_index(const Eigen::ArrayXd& a, double v) {
  Eigen::Index lo = 0, hi = a.size() - 1;
  while (hi - lo > 1) {
    const Eigen::Index mid = (lo + hi) / 2;
    (a[mid] <= v ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

Field3::Field3(Eigen::ArrayXd x, Eigen::ArrayXd y, Eigen::ArrayXd z, Eigen::ArrayXd values)
    : x_(std::move(x)), y_(std::move(y)), z_(std::move(z)), values_(std::move(values)) {
  check_axis(x_, "x");
  check_axis(y_, "y");
  check_axis(z_, "z");
  if (values_.size() != x_.size() * y_.size() * z_.size())
    throw std::invalid_argument("Field3: value count does not match axes");
  if (!values_.isFinite().all()) throw std::invalid_argument("Field3: non-finite values");
}

namespace {

// boundary slop of one part in 1e12 of the axis span, so points that land an
// ulp outside after unit conversions still count as on-grid
bool in_range(const Eigen::ArrayXd& a, double v) {
  const double span = a[a.size() - 1] - a[0];
  const double tol = 1e-12 * (span > 0 ? span : std::abs(a[0]));
  return v >= a[0] - tol && v <= a[a.size() - 1] + tol;
}

}  // namespace

bool Field3::contains(const Eigen::Vector3d& r) const {
  return in_range(x_, r.x()) && in_range(y_, r.y()) && in_range(z_, r.z());
}

double Field3::interpolate(const Eigen::Vector3d& r) const {
  if (!contains(r)) {
    std::ostringstream msg;
    msg << "Field3: point (" << r.x() << ", " << r.y() << ", " << r.z()
        << ") outside grid domain (no extrapolation)";
    throw std::out_of_range(msg.str());
  }
  // degenerate single-plane axes collapse to the stored value along that axis
  const auto frac = [](const Eigen::ArrayXd& a, double v, Eigen::Index& i) {
    if (a.size() == 1) {
      i = 0;
      return 0.0;
    }
    v = std::clamp(v, a[0], a[a.size() - 1]);  // boundary slop already vetted
    i = cell_index(a, v);
    return (v - a[i]) / (a[i + 1] - a[i]);
  };
  Eigen::Index ix, iy, iz;
  const double fx = frac(x_, r.x(), ix);
  const double fy = frac(y_, r.y(), iy);
  const double fz = frac(z_, r.z(), iz);
  const Eigen::Index jx = std::min(ix + 1, nx() - 1);
  const Eigen::Index jy = std::min(iy + 1, ny() - 1);
  const Eigen::Index jz = std::min(iz + 1, nz() - 1);

  double acc = 0.0;
  for (int dx = 0; dx < 2; ++dx)
    for (int dy = 0; dy < 2; ++dy)
      for (int dz = 0; dz < 2; ++dz) {
        const double w = (dx ? fx : 1 - fx) * (dy ? fy : 1 - fy) * (dz ? fz : 1 - fz);
        acc += w * at(dx ? jx : ix, dy ? jy : iy, dz ? jz : iz);
      }
  return acc;
}

}  // namespace pcwlat
