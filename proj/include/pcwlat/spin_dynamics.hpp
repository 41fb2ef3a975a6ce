#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pcwlat/raman.hpp"

namespace pcwlat {

// Basis: |g1> = 0 (sigma^z eigenvalue +1), |g2> = 1 (eigenvalue -1); spin 0
// is the leftmost Kronecker factor.  The xy jump operator is |g1><g2|.
class DensityMatrix {
 public:
  static constexpr int max_spins = 10;

  DensityMatrix(int n_spins, Eigen::MatrixXcd rho);  // validates

  // Product state from a comma-separated list, e.g. "g1,g2,g1".
  static DensityMatrix product_state(const std::string& state);

  int n_spins() const { return n_spins_; }
  Eigen::Index dim() const { return rho_.rows(); }
  const Eigen::MatrixXcd& rho() const { return rho_; }
  Eigen::MatrixXcd& rho() { return rho_; }

  // Hermiticity to 1e-12, trace 1 to 1e-12, eigenvalues >= -1e-10.
  void validate() const;

 private:
  int n_spins_;
  Eigen::MatrixXcd rho_;
};

// Single-site operator embedded at `site` in an n-spin register.
Eigen::MatrixXcd embed_site_operator(const Eigen::Matrix2cd& op, int site, int n_spins);

// H = sum over ordered pairs i != j of
//       Jz_ij sigma_i^z sigma_j^z + Jxy_ij (sigma_i^+ sigma_j^- + sigma_j^+ sigma_i^-),
// so a symmetric pair carries exchange element 2 Jxy_ij.  Diagonal Jxy_ii
// enters as the local shift -(Jxy_ii/2) sigma_i^z (constant dropped);
// diagonal Jz_ii is a global constant and is dropped.
Eigen::MatrixXcd build_hamiltonian(const SpinModel& model, bool include_onsite = true);

// Liouvillian superoperator (column-major vec convention) for spectral checks.
Eigen::MatrixXcd build_liouvillian(const SpinModel& model);

struct EvolveOptions {
  double abs_tol = 1e-10;
  bool store_states = false;
  double guard_tol = 1e-9;  // trace/Hermiticity drift beyond this only flags
};

struct EvolutionResult {
  Eigen::VectorXd times;
  Eigen::MatrixXd sz;             // times x n_spins, <sigma_i^z>
  Eigen::VectorXd total_sz;       // sum_i <sigma_i^z>
  Eigen::VectorXd purity;         // Tr rho^2
  std::vector<Eigen::MatrixXcd> states;  // when requested
  double max_trace_dev = 0;
  double max_herm_dev = 0;
  bool guard_violated = false;
};

// drho/dt = -i[H, rho]
//           + sum_{ij,beta} gamma^beta_ij/2 (2 O_i rho O_j^+ - O_j^+ O_i rho - rho O_j^+ O_i)
// with O^xy = |g1><g2| and O^z = sigma^z.  Adaptive Dormand-Prince 5(4) on
// the dense density matrix.  Throws on step-size collapse with diagnostics.
EvolutionResult evolve(const DensityMatrix& rho0, const SpinModel& model,
                       const Eigen::VectorXd& t_grid, const EvolveOptions& options = {});

// ---- observables ----
double expect_sz(const Eigen::MatrixXcd& rho, int site, int n_spins);
double total_sz(const Eigen::MatrixXcd& rho, int n_spins);
double purity(const Eigen::MatrixXcd& rho);
// <sigma_i^+ sigma_j^->
std::complex<double> correlator_pm(const Eigen::MatrixXcd& rho, int i, int j, int n_spins);
// Hermitian n x n matrix of <sigma_i^+ sigma_j^->
Eigen::MatrixXcd correlation_matrix(const Eigen::MatrixXcd& rho, int n_spins);

}  // namespace pcwlat
