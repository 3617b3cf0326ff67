// operators.hpp — Multipartite complex linear algebra.
//
// A MultipartiteOperator is a dense complex matrix tagged with an ordered
// list of labelled subsystems; basis index order follows the Kronecker
// convention (system 0 most significant). All values are immutable after
// construction.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace decoupler {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Complex = std::complex<double>;

struct SystemLabel {
  std::string name;
  int dim = 1;

  friend bool operator==(const SystemLabel& a, const SystemLabel& b) {
    return a.name == b.name && a.dim == b.dim;
  }
};

namespace detail {

inline long total_dim(const std::vector<SystemLabel>& systems) {
  long d = 1;
  for (const auto& s : systems) d *= s.dim;
  return d;
}

inline void check_unique_names(const std::vector<SystemLabel>& systems) {
  for (std::size_t i = 0; i < systems.size(); ++i) {
    if (systems[i].dim < 1)
      throw std::invalid_argument("system '" + systems[i].name + "': dim must be >= 1");
    for (std::size_t j = i + 1; j < systems.size(); ++j)
      if (systems[i].name == systems[j].name)
        throw std::invalid_argument("duplicate system name '" + systems[i].name + "'");
  }
}

// Strides for the Kronecker index convention: system 0 most significant.
inline std::vector<long> strides(const std::vector<SystemLabel>& systems) {
  std::vector<long> st(systems.size());
  long acc = 1;
  for (std::size_t i = systems.size(); i-- > 0;) {
    st[i] = acc;
    acc *= systems[i].dim;
  }
  return st;
}

}  // namespace detail

class MultipartiteOperator {
 public:
  MultipartiteOperator() = default;

  MultipartiteOperator(std::vector<SystemLabel> systems, Matrix entries)
      : systems_(std::move(systems)), mat_(std::move(entries)) {
    detail::check_unique_names(systems_);
    const long d = detail::total_dim(systems_);
    if (mat_.rows() != d || mat_.cols() != d)
      throw std::invalid_argument("matrix side " + std::to_string(mat_.rows()) +
                                  " does not match product of subsystem dims " +
                                  std::to_string(d));
  }

  static MultipartiteOperator identity(std::vector<SystemLabel> systems) {
    const long d = detail::total_dim(systems);
    return MultipartiteOperator(std::move(systems), Matrix::Identity(d, d));
  }

  const std::vector<SystemLabel>& systems() const { return systems_; }
  const Matrix& matrix() const { return mat_; }
  long dim() const { return mat_.rows(); }

  Complex trace() const { return mat_.trace(); }

  bool has_system(const std::string& name) const {
    return std::any_of(systems_.begin(), systems_.end(),
                       [&](const SystemLabel& s) { return s.name == name; });
  }

  const SystemLabel& system(const std::string& name) const {
    for (const auto& s : systems_)
      if (s.name == name) return s;
    throw std::invalid_argument("unknown system label '" + name + "'");
  }

  bool is_hermitian(double tol = 1e-10) const {
    return (mat_ - mat_.adjoint()).cwiseAbs().maxCoeff() <= tol;
  }

  // PSD up to -tol on the smallest eigenvalue.
  bool is_psd(double tol = 1e-10) const {
    if (!is_hermitian(std::max(tol, 1e-9))) return false;
    Eigen::SelfAdjointEigenSolver<Matrix> es(mat_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -tol;
  }

  bool is_density_matrix(double tol = 1e-10) const {
    return is_psd(tol) && std::abs(trace() - 1.0) <= tol;
  }

 private:
  std::vector<SystemLabel> systems_;
  Matrix mat_;
};

class PureState {
 public:
  PureState() = default;

  PureState(std::vector<SystemLabel> systems, Vector amplitudes)
      : systems_(std::move(systems)), amps_(std::move(amplitudes)) {
    detail::check_unique_names(systems_);
    if (amps_.size() != detail::total_dim(systems_))
      throw std::invalid_argument("amplitude vector length does not match subsystem dims");
    if (std::abs(amps_.norm() - 1.0) > 1e-10)
      throw std::invalid_argument("pure state amplitudes must have unit 2-norm");
  }

  const std::vector<SystemLabel>& systems() const { return systems_; }
  const Vector& amplitudes() const { return amps_; }

  bool has_system(const std::string& name) const {
    return std::any_of(systems_.begin(), systems_.end(),
                       [&](const SystemLabel& s) { return s.name == name; });
  }

  const SystemLabel& system(const std::string& name) const {
    for (const auto& s : systems_)
      if (s.name == name) return s;
    throw std::invalid_argument("unknown system '" + name + "'");
  }

  MultipartiteOperator to_operator() const {
    return MultipartiteOperator(systems_, amps_ * amps_.adjoint());
  }

 private:
  std::vector<SystemLabel> systems_;
  Vector amps_;
};

// --------------------------------------------------------------------------
// Tensor bookkeeping

inline MultipartiteOperator tensor_product(const MultipartiteOperator& x,
                                           const MultipartiteOperator& y) {
  std::vector<SystemLabel> systems = x.systems();
  for (const auto& s : y.systems()) {
    if (x.has_system(s.name))
      throw std::invalid_argument("tensor_product: system name clash on '" + s.name + "'");
    systems.push_back(s);
  }
  Matrix m = Eigen::kroneckerProduct(x.matrix(), y.matrix());
  return MultipartiteOperator(std::move(systems), std::move(m));
}

inline PureState tensor_product(const PureState& x, const PureState& y) {
  std::vector<SystemLabel> systems = x.systems();
  for (const auto& s : y.systems()) {
    for (const auto& t : systems)
      if (t.name == s.name)
        throw std::invalid_argument("tensor_product: system name clash on '" + s.name + "'");
    systems.push_back(s);
  }
  Vector v = Eigen::kroneckerProduct(x.amplitudes(), y.amplitudes());
  return PureState(std::move(systems), std::move(v));
}

namespace detail {

inline std::vector<std::size_t> positions_of(const std::vector<SystemLabel>& systems,
                                             const std::vector<std::string>& names,
                                             const char* op) {
  std::vector<std::size_t> pos;
  pos.reserve(names.size());
  for (const auto& n : names) {
    bool found = false;
    for (std::size_t i = 0; i < systems.size(); ++i) {
      if (systems[i].name == n) {
        pos.push_back(i);
        found = true;
        break;
      }
    }
    if (!found)
      throw std::invalid_argument(std::string(op) + ": unknown system label '" + n + "'");
  }
  return pos;
}

}  // namespace detail

// Trace out everything not in `keep`; kept systems retain their original
// relative order.
inline MultipartiteOperator partial_trace(const MultipartiteOperator& x,
                                          const std::vector<std::string>& keep) {
  const auto& systems = x.systems();
  (void)detail::positions_of(systems, keep, "partial_trace");

  std::vector<SystemLabel> kept, traced;
  std::vector<bool> is_kept(systems.size(), false);
  for (std::size_t i = 0; i < systems.size(); ++i) {
    bool k = std::find(keep.begin(), keep.end(), systems[i].name) != keep.end();
    is_kept[i] = k;
    (k ? kept : traced).push_back(systems[i]);
  }

  const auto st = detail::strides(systems);
  std::vector<long> keep_strides, trace_strides;
  std::vector<int> keep_dims, trace_dims;
  for (std::size_t i = 0; i < systems.size(); ++i) {
    if (is_kept[i]) {
      keep_strides.push_back(st[i]);
      keep_dims.push_back(systems[i].dim);
    } else {
      trace_strides.push_back(st[i]);
      trace_dims.push_back(systems[i].dim);
    }
  }

  const long dk = detail::total_dim(kept);
  const long dt = detail::total_dim(traced);

  // Map a flat index over a dim list to a full-matrix offset.
  auto offset = [](long flat, const std::vector<int>& dims, const std::vector<long>& strides) {
    long off = 0;
    for (std::size_t i = dims.size(); i-- > 0;) {
      off += (flat % dims[i]) * strides[i];
      flat /= dims[i];
    }
    return off;
  };

  std::vector<long> keep_off(dk), trace_off(dt);
  for (long r = 0; r < dk; ++r) keep_off[r] = offset(r, keep_dims, keep_strides);
  for (long t = 0; t < dt; ++t) trace_off[t] = offset(t, trace_dims, trace_strides);

  Matrix out = Matrix::Zero(dk, dk);
  const Matrix& m = x.matrix();
  for (long r = 0; r < dk; ++r)
    for (long c = 0; c < dk; ++c) {
      Complex acc = 0.0;
      for (long t = 0; t < dt; ++t)
        acc += m(keep_off[r] + trace_off[t], keep_off[c] + trace_off[t]);
      out(r, c) = acc;
    }
  return MultipartiteOperator(std::move(kept), std::move(out));
}

// Re-index the operator so its systems appear in the order given by `order`
// (a permutation of the current system names). Spectrum is unchanged.
inline MultipartiteOperator permute_systems(const MultipartiteOperator& x,
                                            const std::vector<std::string>& order) {
  const auto& systems = x.systems();
  if (order.size() != systems.size())
    throw std::invalid_argument("permute_systems: order is not a permutation of the system list");
  auto pos = detail::positions_of(systems, order, "permute_systems");
  {
    auto sorted = pos;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i)
      if (sorted[i] != i)
        throw std::invalid_argument("permute_systems: order is not a permutation of the system list");
  }

  std::vector<SystemLabel> new_systems;
  new_systems.reserve(systems.size());
  for (auto p : pos) new_systems.push_back(systems[p]);

  const auto old_st = detail::strides(systems);
  const auto new_st = detail::strides(new_systems);
  const long d = x.dim();

  // old index -> new index
  std::vector<long> remap(d);
  for (long idx = 0; idx < d; ++idx) {
    long rest = idx, nidx = 0;
    std::vector<long> digits(systems.size());
    for (std::size_t i = 0; i < systems.size(); ++i) {
      digits[i] = rest / old_st[i];
      rest %= old_st[i];
    }
    for (std::size_t i = 0; i < pos.size(); ++i) nidx += digits[pos[i]] * new_st[i];
    remap[idx] = nidx;
  }

  Matrix out(d, d);
  const Matrix& m = x.matrix();
  for (long r = 0; r < d; ++r)
    for (long c = 0; c < d; ++c) out(remap[r], remap[c]) = m(r, c);
  return MultipartiteOperator(std::move(new_systems), std::move(out));
}

inline PureState permute_systems(const PureState& x, const std::vector<std::string>& order) {
  const auto& systems = x.systems();
  auto pos = detail::positions_of(systems, order, "permute_systems");
  std::vector<SystemLabel> new_systems;
  for (auto p : pos) new_systems.push_back(systems[p]);
  const auto old_st = detail::strides(systems);
  const auto new_st = detail::strides(new_systems);
  const long d = x.amplitudes().size();
  Vector out(d);
  for (long idx = 0; idx < d; ++idx) {
    long rest = idx, nidx = 0;
    std::vector<long> digits(systems.size());
    for (std::size_t i = 0; i < systems.size(); ++i) {
      digits[i] = rest / old_st[i];
      rest %= old_st[i];
    }
    for (std::size_t i = 0; i < pos.size(); ++i) nidx += digits[pos[i]] * new_st[i];
    out(nidx) = x.amplitudes()(idx);
  }
  return PureState(std::move(new_systems), std::move(out));
}

// Lift an operator acting on a subset of `target`'s systems to the full
// list, tensoring identity on the rest and matching systems by name.
inline MultipartiteOperator embed(const MultipartiteOperator& x,
                                  const std::vector<SystemLabel>& target) {
  std::vector<SystemLabel> rest;
  for (const auto& s : target) {
    if (x.has_system(s.name)) {
      if (x.system(s.name).dim != s.dim)
        throw std::invalid_argument("embed: dimension mismatch on system '" + s.name + "'");
    } else {
      rest.push_back(s);
    }
  }
  for (const auto& s : x.systems())
    if (std::none_of(target.begin(), target.end(),
                     [&](const SystemLabel& t) { return t.name == s.name; }))
      throw std::invalid_argument("embed: system '" + s.name + "' not present in target");

  MultipartiteOperator full =
      rest.empty() ? x : tensor_product(x, MultipartiteOperator::identity(rest));
  std::vector<std::string> order;
  for (const auto& s : target) order.push_back(s.name);
  return permute_systems(full, order);
}

// Swap operator F on A ⊗ A' with F|i⟩|j⟩ = |j⟩|i⟩. The primed copy is
// labelled by appending ' to the name.
inline MultipartiteOperator swap_operator(const SystemLabel& a) {
  const int d = a.dim;
  Matrix f = Matrix::Zero(long(d) * d, long(d) * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) f(long(j) * d + i, long(i) * d + j) = 1.0;
  return MultipartiteOperator({a, {a.name + "'", d}}, std::move(f));
}

// Φ = (1/√d) Σ_i |ii⟩ on a ⊗ a'.
inline PureState max_entangled(const SystemLabel& a, const SystemLabel& a_prime) {
  if (a.dim != a_prime.dim)
    throw std::invalid_argument("max_entangled: dimension mismatch between '" + a.name +
                                "' and '" + a_prime.name + "'");
  const int d = a.dim;
  Vector v = Vector::Zero(long(d) * d);
  for (int i = 0; i < d; ++i) v(long(i) * d + i) = 1.0 / std::sqrt(double(d));
  return PureState({a, a_prime}, std::move(v));
}

// --------------------------------------------------------------------------
// Spectral operations

namespace detail {

struct EigBasis {
  Eigen::VectorXd values;  // ascending
  Matrix vectors;
};

inline EigBasis hermitian_eig(const MultipartiteOperator& x) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(x.matrix());
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition failed to converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

}  // namespace detail

// Moore-Penrose style negative matrix power: eigenvalues below the rank
// cutoff (side * eps * lambda_max) map to 0, the rest to lambda^power.
inline MultipartiteOperator pseudo_inverse(const MultipartiteOperator& s, double power) {
  if (!s.is_hermitian(1e-9))
    throw std::invalid_argument("pseudo_inverse: input is not Hermitian");
  auto eig = detail::hermitian_eig(s);
  const double lmax = eig.values.cwiseAbs().maxCoeff();
  const double cutoff = double(s.dim()) * std::numeric_limits<double>::epsilon() * lmax;
  if (eig.values.minCoeff() < -std::max(cutoff, 1e-10))
    throw std::invalid_argument("pseudo_inverse: input is not positive semidefinite");

  Eigen::VectorXd powered = Eigen::VectorXd::Zero(eig.values.size());
  for (long i = 0; i < eig.values.size(); ++i)
    if (eig.values(i) > cutoff) powered(i) = std::pow(eig.values(i), power);
  Matrix out = eig.vectors * powered.asDiagonal() * eig.vectors.adjoint();
  return MultipartiteOperator(s.systems(), std::move(out));
}

inline MultipartiteOperator support_projector(const MultipartiteOperator& s) {
  auto eig = detail::hermitian_eig(s);
  const double lmax = eig.values.cwiseAbs().maxCoeff();
  const double cutoff = double(s.dim()) * std::numeric_limits<double>::epsilon() * lmax;
  Eigen::VectorXd ind = Eigen::VectorXd::Zero(eig.values.size());
  for (long i = 0; i < eig.values.size(); ++i)
    if (eig.values(i) > cutoff) ind(i) = 1.0;
  return MultipartiteOperator(s.systems(), eig.vectors * ind.asDiagonal() * eig.vectors.adjoint());
}

inline int support_rank(const MultipartiteOperator& s) {
  auto eig = detail::hermitian_eig(s);
  const double lmax = std::max(eig.values.cwiseAbs().maxCoeff(), 0.0);
  const double cutoff = double(s.dim()) * std::numeric_limits<double>::epsilon() * lmax;
  int r = 0;
  for (long i = 0; i < eig.values.size(); ++i)
    if (eig.values(i) > cutoff) ++r;
  return r;
}

// Zero out the longest ascending prefix of eigenvalues whose sum stays
// <= delta; rebuild in the original basis. Ties in degenerate subspaces
// are resolved by the eigensolver's ascending order, which is fine: any
// choice keeps 0 <= result <= rho and removed mass <= delta.
inline MultipartiteOperator delta_truncate(const MultipartiteOperator& rho, double delta) {
  if (delta < 0.0 || delta >= 1.0)
    throw std::invalid_argument("delta_truncate: delta must lie in [0, 1)");
  auto eig = detail::hermitian_eig(rho);
  Eigen::VectorXd vals = eig.values;
  double acc = 0.0;
  for (long i = 0; i < vals.size(); ++i) {
    const double v = std::max(vals(i), 0.0);
    if (acc + v <= delta) {
      acc += v;
      vals(i) = 0.0;
    } else {
      break;
    }
  }
  for (long i = 0; i < vals.size(); ++i) vals(i) = std::max(vals(i), 0.0);
  Matrix out = eig.vectors * vals.asDiagonal() * eig.vectors.adjoint();
  return MultipartiteOperator(rho.systems(), std::move(out));
}

inline double schatten_norm(const MultipartiteOperator& x, int p) {
  if (p == 2) return x.matrix().norm();
  if (p != 1) throw std::invalid_argument("schatten_norm: p must be 1 or 2");
  if (x.is_hermitian(1e-12)) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(x.matrix(), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
  }
  Eigen::JacobiSVD<Matrix> svd(x.matrix());
  return svd.singularValues().sum();
}

// Trace norm of a Hermitian difference via its eigenvalues.
inline double trace_norm_hermitian(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

// Spectral purification: |phi⟩ = Σ_i sqrt(λ_i) |v_i⟩|i⟩.
inline PureState purify(const MultipartiteOperator& rho, const SystemLabel& purifier) {
  if (!rho.is_psd(1e-9) || std::abs(rho.trace() - 1.0) > 1e-9)
    throw std::invalid_argument("purify: input must be a density matrix");
  auto eig = detail::hermitian_eig(rho);
  const long d = rho.dim();
  const int r = support_rank(rho);
  if (purifier.dim < r)
    throw std::invalid_argument("purify: purifier dim " + std::to_string(purifier.dim) +
                                " below rank " + std::to_string(r));
  Vector v = Vector::Zero(d * purifier.dim);
  // Eigenvalues ascending; enumerate the largest first so the fiducial
  // basis assignment is deterministic.
  int slot = 0;
  for (long i = d - 1; i >= 0 && slot < purifier.dim; --i) {
    if (eig.values(i) <= 0) break;
    const double amp = std::sqrt(eig.values(i));
    for (long row = 0; row < d; ++row) v(row * purifier.dim + slot) += amp * eig.vectors(row, i);
    ++slot;
  }
  std::vector<SystemLabel> systems = rho.systems();
  systems.push_back(purifier);
  v /= v.norm();
  return PureState(std::move(systems), std::move(v));
}

}  // namespace decoupler
