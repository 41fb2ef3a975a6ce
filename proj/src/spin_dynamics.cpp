#include "pcwlat/spin_dynamics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pcwlat {

namespace {

using Eigen::Index;
using Matrix2cd = Eigen::Matrix2cd;
using MatrixXcd = Eigen::MatrixXcd;
constexpr std::complex<double> I_unit{0.0, 1.0};

Matrix2cd sigma_z_1() {
  Matrix2cd m;
  m << 1, 0, 0, -1;
  return m;
}

Matrix2cd sigma_plus_1() {  // |g1><g2|, raising into the sigma^z = +1 state
  Matrix2cd m;
  m << 0, 1, 0, 0;
  return m;
}

MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
  MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace

DensityMatrix::DensityMatrix(int n_spins, Eigen::MatrixXcd rho)
    : n_spins_(n_spins), rho_(std::move(rho)) {
  if (n_spins < 1 || n_spins > max_spins)
    throw std::invalid_argument("DensityMatrix: n_spins must be in [1, 10]");
  const Index dim = Index(1) << n_spins;
  if (rho_.rows() != dim || rho_.cols() != dim)
    throw std::invalid_argument("DensityMatrix: dimension does not match n_spins");
  validate();
}

DensityMatrix DensityMatrix::product_state(const std::string& state) {
  std::vector<int> levels;
  std::stringstream ss(state);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    // trim blanks
    tok.erase(0, tok.find_first_not_of(" \t"));
    tok.erase(tok.find_last_not_of(" \t") + 1);
    if (tok == "g1")
      levels.push_back(0);
    else if (tok == "g2")
      levels.push_back(1);
    else
      throw std::invalid_argument("product_state: expected g1/g2 tokens, got '" + tok + "'");
  }
  if (levels.empty()) throw std::invalid_argument("product_state: empty state string");
  const int n = static_cast<int>(levels.size());
  Index idx = 0;
  for (int i = 0; i < n; ++i) idx = (idx << 1) | levels[i];
  MatrixXcd rho = MatrixXcd::Zero(Index(1) << n, Index(1) << n);
  rho(idx, idx) = 1.0;
  return DensityMatrix(n, std::move(rho));
}

void DensityMatrix::validate() const {
  const double herm = (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
  if (herm > 1e-12) throw std::invalid_argument("DensityMatrix: not Hermitian (dev > 1e-12)");
  const double tr = std::abs(rho_.trace() - std::complex<double>(1.0));
  if (tr > 1e-12) throw std::invalid_argument("DensityMatrix: trace != 1 (dev > 1e-12)");
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (rho_ + rho_.adjoint()),
                                              Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw std::invalid_argument("DensityMatrix: negative eigenvalue below -1e-10");
}

Eigen::MatrixXcd embed_site_operator(const Eigen::Matrix2cd& op, int site, int n_spins) {
  if (site < 0 || site >= n_spins) throw std::invalid_argument("embed_site_operator: bad site");
  MatrixXcd out = MatrixXcd::Identity(1, 1);
  for (int i = 0; i < n_spins; ++i) {
    const MatrixXcd factor = (i == site) ? MatrixXcd(op) : MatrixXcd(Matrix2cd::Identity());
    out = kron(out, factor);
  }
  return out;
}

Eigen::MatrixXcd build_hamiltonian(const SpinModel& model, bool include_onsite) {
  const int n = static_cast<int>(model.sites.rows());
  if (n > DensityMatrix::max_spins)
    throw std::invalid_argument("build_hamiltonian: more than 10 spins");
  const Index dim = Index(1) << n;

  std::vector<MatrixXcd> sz(n), sp(n), sm(n);
  for (int i = 0; i < n; ++i) {
    sz[i] = embed_site_operator(sigma_z_1(), i, n);
    sp[i] = embed_site_operator(sigma_plus_1(), i, n);
    sm[i] = sp[i].adjoint();
  }

  MatrixXcd H = MatrixXcd::Zero(dim, dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (model.Jz(i, j) != 0.0) H += model.Jz(i, j) * (sz[i] * sz[j]);
      if (model.Jxy(i, j) != 0.0)
        H += model.Jxy(i, j) * (sp[i] * sm[j] + sp[j] * sm[i]);
    }
  if (include_onsite) {
    for (int i = 0; i < n; ++i)
      if (model.Jxy(i, i) != 0.0) H += -0.5 * model.Jxy(i, i) * sz[i];
  }
  return H;
}

namespace {

struct Dissipator {
  std::vector<MatrixXcd> ops;      // O_i
  std::vector<MatrixXcd> c_ops;    // C_i = sum_j gamma_ij O_j
  MatrixXcd m;                     // sum_ij gamma_ij O_j^+ O_i
  bool active = false;
};

Dissipator make_dissipator(const Eigen::MatrixXd& gamma, const std::vector<MatrixXcd>& ops,
                           Index dim) {
  Dissipator d;
  d.active = gamma.cwiseAbs().maxCoeff() > 0;
  if (!d.active) return d;
  const int n = static_cast<int>(gamma.rows());
  d.ops = ops;
  d.c_ops.resize(n);
  d.m = MatrixXcd::Zero(dim, dim);
  for (int i = 0; i < n; ++i) {
    d.c_ops[i] = MatrixXcd::Zero(dim, dim);
    for (int j = 0; j < n; ++j)
      if (gamma(i, j) != 0.0) d.c_ops[i] += gamma(i, j) * ops[j];
  }
  for (int i = 0; i < n; ++i) d.m += d.c_ops[i].adjoint() * ops[i];
  return d;
}

struct Liouville {
  MatrixXcd H;
  std::vector<Dissipator> diss;

  MatrixXcd apply(const MatrixXcd& rho) const {
    MatrixXcd out = -I_unit * (H * rho - rho * H);
    for (const auto& d : diss) {
      if (!d.active) continue;
      for (size_t i = 0; i < d.ops.size(); ++i)
        out += d.ops[i] * rho * d.c_ops[i].adjoint();
      out -= 0.5 * (d.m * rho + rho * d.m);
    }
    return out;
  }
};

Liouville make_liouville(const SpinModel& model) {
  const int n = static_cast<int>(model.sites.rows());
  std::vector<MatrixXcd> o_xy(n), o_z(n);
  for (int i = 0; i < n; ++i) {
    o_xy[i] = embed_site_operator(sigma_plus_1(), i, n);  // |g1><g2|
    o_z[i] = embed_site_operator(sigma_z_1(), i, n);
  }
  Liouville L;
  L.H = build_hamiltonian(model);
  const Index dim = L.H.rows();
  L.diss.push_back(make_dissipator(model.gamma_xy, o_xy, dim));
  L.diss.push_back(make_dissipator(model.gamma_z, o_z, dim));
  return L;
}

// Dormand-Prince 5(4) tableau
constexpr double dp_c[7] = {0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double dp_a[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
constexpr double dp_b5[7] = {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784,
                             11.0 / 84, 0};
constexpr double dp_b4[7] = {5179.0 / 57600, 0,           7571.0 / 16695, 393.0 / 640,
                             -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

}  // namespace

Eigen::MatrixXcd build_liouvillian(const SpinModel& model) {
  const Liouville L = make_liouville(model);
  const Index dim = L.H.rows();
  const Index dim2 = dim * dim;
  MatrixXcd super = MatrixXcd::Zero(dim2, dim2);
  // column-major vec: vec(A rho B) = (B^T kron A) vec(rho)
  const MatrixXcd id = MatrixXcd::Identity(dim, dim);
  super -= I_unit * (kron(id, L.H) - kron(L.H.transpose(), id));
  for (const auto& d : L.diss) {
    if (!d.active) continue;
    for (size_t i = 0; i < d.ops.size(); ++i)
      super += kron(d.c_ops[i].conjugate(), d.ops[i]);
    super -= 0.5 * (kron(id, d.m) + kron(d.m.transpose(), id));
  }
  return super;
}

EvolutionResult evolve(const DensityMatrix& rho0, const SpinModel& model,
                       const Eigen::VectorXd& t_grid, const EvolveOptions& options) {
  if (t_grid.size() < 1) throw std::invalid_argument("evolve: empty time grid");
  for (Index i = 0; i + 1 < t_grid.size(); ++i)
    if (!(t_grid[i] < t_grid[i + 1]))
      throw std::invalid_argument("evolve: time grid must be strictly increasing");
  if (model.sites.rows() != rho0.n_spins())
    throw std::invalid_argument("evolve: model size does not match state");

  const Liouville L = make_liouville(model);
  const int n = rho0.n_spins();

  EvolutionResult res;
  res.times = t_grid;
  res.sz.resize(t_grid.size(), n);
  res.total_sz.resize(t_grid.size());
  res.purity.resize(t_grid.size());
  if (options.store_states) res.states.reserve(t_grid.size());

  MatrixXcd rho = rho0.rho();
  double t = t_grid[0];

  const auto record = [&](Index slot) {
    for (int i = 0; i < n; ++i) res.sz(slot, i) = expect_sz(rho, i, n);
    res.total_sz[slot] = res.sz.row(slot).sum();
    res.purity[slot] = purity(rho);
    if (options.store_states) res.states.push_back(rho);
  };
  record(0);

  // scale for the error control and the stiffness bail-out
  const double t_span = std::max(t_grid[t_grid.size() - 1] - t_grid[0],
                                 std::numeric_limits<double>::min());
  double h = t_span / 100.0;
  long steps = 0;

  std::array<MatrixXcd, 7> k;
  for (Index slot = 1; slot < t_grid.size(); ++slot) {
    const double t_end = t_grid[slot];
    while (t < t_end) {
      h = std::min(h, t_end - t);
      if (h < 1e-15 * t_span || ++steps > 2'000'000) {
        std::ostringstream msg;
        msg << "evolve: step size collapsed (t = " << t << ", h = " << h
            << ", steps = " << steps << "); system too stiff for the RK45 integrator";
        throw std::runtime_error(msg.str());
      }

      k[0] = L.apply(rho);
      for (int s = 1; s < 7; ++s) {
        MatrixXcd y = rho;
        for (int j = 0; j < s; ++j)
          if (dp_a[s][j] != 0.0) y += (h * dp_a[s][j]) * k[j];
        k[s] = L.apply(y);
      }
      MatrixXcd y5 = rho, err = MatrixXcd::Zero(rho.rows(), rho.cols());
      for (int s = 0; s < 7; ++s) {
        if (dp_b5[s] != 0.0) y5 += (h * dp_b5[s]) * k[s];
        const double db = dp_b5[s] - dp_b4[s];
        if (db != 0.0) err += (h * db) * k[s];
      }
      const double err_norm = err.cwiseAbs().maxCoeff() / options.abs_tol;
      if (err_norm <= 1.0) {
        t += h;
        rho = std::move(y5);
        // guard: flag drift; renormalize only within the guard tolerance
        const double tr_dev = std::abs(rho.trace() - std::complex<double>(1.0));
        const double herm_dev = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
        res.max_trace_dev = std::max(res.max_trace_dev, tr_dev);
        res.max_herm_dev = std::max(res.max_herm_dev, herm_dev);
        if (tr_dev > options.guard_tol || herm_dev > options.guard_tol) {
          res.guard_violated = true;
        } else {
          rho = 0.5 * (rho + rho.adjoint().eval());
          rho /= rho.trace().real();
        }
      }
      const double factor =
          err_norm > 0 ? 0.9 * std::pow(err_norm, -0.2) : 5.0;
      h *= std::clamp(factor, 0.2, 5.0);
    }
    record(slot);
  }
  return res;
}

double expect_sz(const Eigen::MatrixXcd& rho, int site, int n_spins) {
  const Index dim = rho.rows();
  double acc = 0;
  const Index bit = Index(1) << (n_spins - 1 - site);
  for (Index s = 0; s < dim; ++s) acc += ((s & bit) ? -1.0 : 1.0) * rho(s, s).real();
  return acc;
}

double total_sz(const Eigen::MatrixXcd& rho, int n_spins) {
  double acc = 0;
  for (int i = 0; i < n_spins; ++i) acc += expect_sz(rho, i, n_spins);
  return acc;
}

double purity(const Eigen::MatrixXcd& rho) { return (rho * rho).trace().real(); }

std::complex<double> correlator_pm(const Eigen::MatrixXcd& rho, int i, int j, int n_spins) {
  const MatrixXcd op = embed_site_operator(sigma_plus_1(), i, n_spins) *
                       embed_site_operator(sigma_plus_1(), j, n_spins).adjoint();
  return (op * rho).trace();
}

Eigen::MatrixXcd correlation_matrix(const Eigen::MatrixXcd& rho, int n_spins) {
  MatrixXcd out(n_spins, n_spins);
  for (int i = 0; i < n_spins; ++i)
    for (int j = 0; j < n_spins; ++j) out(i, j) = correlator_pm(rho, i, j, n_spins);
  return out;
}

}  // namespace pcwlat
