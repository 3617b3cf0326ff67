// Shared random-instance generators for the test suite. All draws are
// seeded so every test is reproducible in isolation.

#pragma once

#include "decoupler/operators.hpp"
#include "decoupler/rng.hpp"

#include <cstdint>
#include <vector>

namespace testutil {

using decoupler::Complex;
using decoupler::Matrix;
using decoupler::MultipartiteOperator;
using decoupler::PureState;
using decoupler::SystemLabel;
using decoupler::Vector;

inline Matrix random_matrix(long rows, long cols, std::uint64_t seed) {
  decoupler::rng::GaussianStream g(decoupler::rng::derive_seed(seed, 0));
  Matrix m(rows, cols);
  for (long c = 0; c < cols; ++c)
    for (long r = 0; r < rows; ++r) m(r, c) = Complex(g.next(), g.next());
  return m;
}

inline Matrix random_hermitian(long n, std::uint64_t seed) {
  Matrix z = random_matrix(n, n, seed);
  return 0.5 * (z + z.adjoint());
}

inline Matrix random_psd(long n, std::uint64_t seed, long rank = 0) {
  if (rank <= 0 || rank > n) rank = n;
  Matrix g = random_matrix(n, rank, seed);
  return g * g.adjoint();
}

inline Matrix random_density_matrix(long n, std::uint64_t seed, long rank = 0) {
  Matrix p = random_psd(n, seed, rank);
  return p / p.trace().real();
}

inline MultipartiteOperator random_density(std::vector<SystemLabel> systems,
                                           std::uint64_t seed, long rank = 0) {
  long n = 1;
  for (const auto& s : systems) n *= s.dim;
  return MultipartiteOperator(std::move(systems), random_density_matrix(n, seed, rank));
}

inline PureState random_pure(std::vector<SystemLabel> systems, std::uint64_t seed) {
  long n = 1;
  for (const auto& s : systems) n *= s.dim;
  Vector v = random_matrix(n, 1, seed).col(0);
  v /= v.norm();
  return PureState(std::move(systems), std::move(v));
}

// Fidelity Tr sqrt(sqrt(rho) sigma sqrt(rho)) via dense eigendecompositions,
// written independently of the library's operations.
inline double fidelity(const Matrix& rho, const Matrix& sigma) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
  Eigen::VectorXd vals = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  Matrix sqrt_rho = es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().adjoint();
  Eigen::SelfAdjointEigenSolver<Matrix> es2(sqrt_rho * sigma * sqrt_rho);
  return es2.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
}

}  // namespace testutil
