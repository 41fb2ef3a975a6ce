#pragma once

#include <Eigen/Dense>

namespace pcwlat {

// 3-D sampled scalar field on a rectilinear grid.  Values are flattened
// row-major with z fastest: index(ix, iy, iz) = (ix*ny + iy)*nz + iz,
// matching the on-disk CP-grid layout.  Axes must be strictly increasing.
class Field3 {
 public:
  Field3() = default;
  Field3(Eigen::ArrayXd x, Eigen::ArrayXd y, Eigen::ArrayXd z, Eigen::ArrayXd values);

  Eigen::Index nx() const { return x_.size(); }
  Eigen::Index ny() const { return y_.size(); }
  Eigen::Index nz() const { return z_.size(); }
  const Eigen::ArrayXd& x() const { return x_; }
  const Eigen::ArrayXd& y() const { return y_; }
  const Eigen::ArrayXd& z() const { return z_; }
  const Eigen::ArrayXd& values() const { return values_; }

  double at(Eigen::Index ix, Eigen::Index iy, Eigen::Index iz) const {
    return values_[(ix * ny() + iy) * nz() + iz];
  }
  double& at(Eigen::Index ix, Eigen::Index iy, Eigen::Index iz) {
    return values_[(ix * ny() + iy) * nz() + iz];
  }

  bool contains(const Eigen::Vector3d& r) const;

  // Trilinear interpolation; no extrapolation (std::out_of_range outside).
  double interpolate(const Eigen::Vector3d& r) const;

 private:
  Eigen::ArrayXd x_, y_, z_, values_;
};

}  // namespace pcwlat
