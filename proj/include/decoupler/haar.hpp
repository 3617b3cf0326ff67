// haar.hpp — Exact second-moment Haar integration for k independent
// unitaries in tensor product, Haar sampling, and the Monte-Carlo
// cross-validation estimator.
//
// Conventions: a twirled operator M lives on ⊗_i (A_i ⊗ A_i') with the
// pair of sender i adjacent and sender 0 most significant. Coefficient
// vectors are indexed by integers a whose bit i refers to sender i
// (bit set = swap F on that sender's doubled system).

#pragma once

#include "decoupler/channel.hpp"
#include "decoupler/operators.hpp"
#include "decoupler/rng.hpp"

#include <cstdint>
#include <vector>

namespace decoupler {

inline Matrix haar_from_stream(int dim, rng::GaussianStream& g) {
  Matrix z(dim, dim);
  for (int c = 0; c < dim; ++c)
    for (int r = 0; r < dim; ++r) z(r, c) = Complex(g.next(), g.next());
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ();
  Matrix rmat = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix the gauge: divide out the phases of R's diagonal so the
  // distribution is exactly Haar, not QR-convention biased.
  for (int i = 0; i < dim; ++i) {
    Complex d = rmat(i, i);
    double a = std::abs(d);
    q.col(i) *= (a > 0) ? d / a : Complex(1.0, 0.0);
  }
  return q;
}

// QR of a complex standard-Gaussian matrix with R-diagonal phase correction.
inline Matrix sample_haar(int dim, std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("sample_haar: dim must be >= 1");
  rng::GaussianStream g(seed);
  return haar_from_stream(dim, g);
}

inline QuantumChannel random_channel(const std::vector<SystemLabel>& inputs,
                                     const SystemLabel& output, int env_dim,
                                     std::uint64_t seed) {
  const long din = detail::total_dim(inputs);
  const long big = long(output.dim) * env_dim;
  if (big < din)
    throw std::invalid_argument("random_channel: env*output must be >= total input dim");
  Matrix u = sample_haar(int(big), seed);
  // Isometry = first din columns; slice on the environment index to get
  // env_dim Kraus operators (rows ordered output-major, matching stinespring).
  std::vector<Matrix> kraus(env_dim, Matrix(output.dim, din));
  for (int e = 0; e < env_dim; ++e)
    for (int o = 0; o < output.dim; ++o)
      kraus[e].row(o) = u.block(long(o) * env_dim + e, 0, 1, din);
  return QuantumChannel(inputs, output, std::move(kraus));
}

// --------------------------------------------------------------------------
// Commutant basis and closed-form twirl coefficients

// ⊗_i (F^{A_i A_i'})^{a_i} as a dense matrix on ⊗_i (A_i ⊗ A_i').
inline Matrix commutant_basis_element(const std::vector<int>& dims, std::uint64_t bits) {
  Matrix out = Matrix::Identity(1, 1);
  for (std::size_t i = 0; i < dims.size(); ++i) {
    const int d = dims[i];
    Matrix blk;
    if ((bits >> i) & 1) {
      blk = swap_operator({"A", d}).matrix();
    } else {
      blk = Matrix::Identity(long(d) * d, long(d) * d);
    }
    out = Eigen::kroneckerProduct(out, blk).eval();
  }
  return out;
}

struct TwirlResult {
  std::vector<int> dims;
  std::vector<double> alphas;   // indexed by bit string a, bit i = sender i
  std::vector<double> moments;  // m_b = Tr[(⊗ F^{b_i}) M]
  MultipartiteOperator reconstructed;
};

namespace detail {

inline std::vector<SystemLabel> doubled_systems(const std::vector<int>& dims) {
  std::vector<SystemLabel> systems;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    const std::string base = "A" + std::to_string(i);
    systems.push_back({base, dims[i]});
    systems.push_back({base + "'", dims[i]});
  }
  return systems;
}

inline void check_twirl_input(const Matrix& m, const std::vector<int>& dims) {
  long side = 1;
  for (int d : dims) side *= long(d) * d;
  if (m.rows() != side || m.cols() != side)
    throw std::invalid_argument("twirl: matrix side does not match ⊗(A_i ⊗ A_i') dims");
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-8 * std::max(1.0, m.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("twirl: operand must be Hermitian");
}

}  // namespace detail

// Moment matrix K relating commutant coefficients to the traces
// m_b = Tr[(⊗ F^{b_i}) M]: K = |A_[k]| ⊗_i [[|A_i|, 1], [1, |A_i|]], so
// entry (b, a) is |A_[k]| Π_i |A_i|^{¬(b_i⊕a_i)}.
inline double k_matrix_entry(const std::vector<int>& dims, std::uint64_t b, std::uint64_t a) {
  double v = 1.0;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    v *= dims[i];  // the |A_[k]| prefactor
    if (((b ^ a) >> i & 1) == 0) v *= dims[i];
  }
  return v;
}

// Closed-form tensor-structured inverse: each 2×2 block inverts to
// [[|A_i|, -1], [-1, |A_i|]] / (|A_i|²-1), the prefactor to 1/|A_[k]|.
inline double k_inverse_entry(const std::vector<int>& dims, std::uint64_t a, std::uint64_t b) {
  double v = 1.0;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    v /= double(dims[i]) * (double(dims[i]) * dims[i] - 1.0);
    if (((a ^ b) >> i & 1) == 0)
      v *= dims[i];
    else
      v *= -1.0;
  }
  return v;
}

// E_U[(U⊗U)·M] = αI + βF via Fact-style 2×2 moment equations.
inline TwirlResult twirl2_single(const Matrix& m, int dim) {
  detail::check_twirl_input(m, {dim});
  const double tr_m = m.trace().real();
  std::vector<double> alphas(2), moments(2);
  moments[0] = tr_m;
  if (dim == 1) {
    // I and F coincide; single equation Tr M = α + β, resolved as β = 0.
    moments[1] = tr_m;
    alphas[0] = tr_m;
    alphas[1] = 0.0;
  } else {
    const Matrix f = swap_operator({"A", dim}).matrix();
    moments[1] = (f * m).trace().real();
    const double d = dim;
    const double det = d * d * (d * d - 1.0);
    alphas[0] = (d * d * moments[0] - d * moments[1]) / det;
    alphas[1] = (d * d * moments[1] - d * moments[0]) / det;
  }
  Matrix rec = alphas[0] * commutant_basis_element({dim}, 0) +
               alphas[1] * commutant_basis_element({dim}, 1);
  return TwirlResult{{dim},
                     std::move(alphas),
                     std::move(moments),
                     MultipartiteOperator(detail::doubled_systems({dim}), std::move(rec))};
}

// E[⊗_i (U_i ⊗ U_i) · M] over independent Haar unitaries: moments for all
// 2^k bit strings, coefficients via the closed-form K^{-1}.
inline TwirlResult twirl2_tensor(const Matrix& m, const std::vector<int>& dims) {
  if (dims.empty()) throw std::invalid_argument("twirl2_tensor: need k >= 1 senders");
  detail::check_twirl_input(m, dims);

  // Dim-1 senders make the K blocks singular; fall back to the reduced-k
  // problem and force a_i = 0 on the degenerate senders.
  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < dims.size(); ++i)
    if (dims[i] > 1) live.push_back(i);

  const std::size_t k = dims.size();
  const std::uint64_t nk = 1ULL << k;
  std::vector<double> moments(nk);
  for (std::uint64_t b = 0; b < nk; ++b) {
    Matrix basis = commutant_basis_element(dims, b);
    moments[b] = (basis * m).trace().real();
  }

  std::vector<double> alphas(nk, 0.0);
  const std::uint64_t nlive = 1ULL << live.size();
  std::vector<int> live_dims;
  for (auto i : live) live_dims.push_back(dims[i]);
  for (std::uint64_t ar = 0; ar < nlive; ++ar) {
    std::uint64_t a = 0;
    for (std::size_t j = 0; j < live.size(); ++j)
      if ((ar >> j) & 1) a |= 1ULL << live[j];
    double acc = 0.0;
    for (std::uint64_t br = 0; br < nlive; ++br) {
      std::uint64_t b = 0;
      for (std::size_t j = 0; j < live.size(); ++j)
        if ((br >> j) & 1) b |= 1ULL << live[j];
      acc += k_inverse_entry(live_dims, ar, br) * moments[b];
    }
    alphas[a] = acc;
  }

  long side = 1;
  for (int d : dims) side *= long(d) * d;
  Matrix rec = Matrix::Zero(side, side);
  for (std::uint64_t a = 0; a < nk; ++a)
    if (alphas[a] != 0.0) rec += alphas[a] * commutant_basis_element(dims, a);
  return TwirlResult{dims, std::move(alphas), std::move(moments),
                     MultipartiteOperator(detail::doubled_systems(dims), std::move(rec))};
}

// --------------------------------------------------------------------------
// Monte-Carlo estimator

namespace detail {

using ComplexF = std::complex<float>;
using MatrixF = Eigen::MatrixXcf;

// Conjugate every matrix in `work` (flat, column-major n×n blocks) by
// ⊗_i (U_i ⊗ U_i), via mode-rotation: multiply the fastest tensor mode,
// store transposed so the next mode becomes fastest. Modes cycle
// completely, restoring the original layout. Single precision: the MC
// estimator's statistical error (∝ 1/√N) dwarfs float rounding, and the
// smaller working set keeps the whole batch inside L2.
inline void conjugate_batch(std::vector<ComplexF>& work, std::vector<ComplexF>& scratch,
                            long n, long count, const std::vector<MatrixF>& unitaries,
                            const std::vector<int>& dims) {
  const std::size_t k = dims.size();
  // Mode order from fastest: row digit pairs (A_{k-1}, A_{k-1}'), ...,
  // (A_0, A_0'), then the column digit pairs likewise, then the matrix
  // index. Each sender's doubled pair is handled as one dim-d² mode with
  // the precomputed U ⊗ U block.
  struct Step {
    int dim;
    int unitary;  // -1: rotate only; otherwise sender index
    bool conj;
  };
  std::vector<Step> steps;
  std::vector<MatrixF> blocks(k);
  for (std::size_t i = 0; i < k; ++i)
    blocks[i] = Eigen::kroneckerProduct(unitaries[i], unitaries[i]);
  for (int pass = 0; pass < 2; ++pass)
    for (std::size_t j = 0; j < k; ++j) {
      const int sender = int(k - 1 - j);
      steps.push_back({dims[sender] * dims[sender], sender, pass == 1});
    }
  steps.push_back({int(count), -1, false});

  const long total = n * n * count;
  std::vector<ComplexF>* src = &work;
  std::vector<ComplexF>* dst = &scratch;
  for (const auto& st : steps) {
    const long d = st.dim;
    const long rest = total / d;
    Eigen::Map<const MatrixF> x(src->data(), d, rest);
    Eigen::Map<MatrixF> y(dst->data(), rest, d);
    if (st.unitary < 0) {
      y = x.transpose();
    } else if (st.conj) {
      y = (blocks[st.unitary].conjugate() * x).transpose();
    } else {
      y = (blocks[st.unitary] * x).transpose();
    }
    std::swap(src, dst);
  }
  if (src != &work) work.swap(scratch);
}

}  // namespace detail

// (1/N) Σ_j ⊗_i (U_i ⊗ U_i) · M_l · (⊗_i (U_i ⊗ U_i))† for every M_l, with
// the per-sample unitaries drawn from streams derived from (seed, j).
inline std::vector<Matrix> monte_carlo_twirl_batch(const std::vector<Matrix>& ms,
                                                   const std::vector<int>& dims, int samples,
                                                   std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("monte_carlo_twirl: samples must be >= 1");
  long n = 1;
  for (int d : dims) n *= long(d) * d;
  for (const auto& m : ms)
    if (m.rows() != n || m.cols() != n)
      throw std::invalid_argument("monte_carlo_twirl: matrix side mismatch");
  const long count = long(ms.size());
  const long total = n * n * count;

  std::vector<detail::ComplexF> base(total);
  for (long l = 0; l < count; ++l)
    Eigen::Map<detail::MatrixF>(base.data() + l * n * n, n, n) = ms[l].cast<detail::ComplexF>();

  std::vector<detail::ComplexF> work(total), scratch(total);
  std::vector<Complex> acc(total, Complex(0.0, 0.0));
  std::vector<detail::MatrixF> us(dims.size());

  for (int j = 0; j < samples; ++j) {
    rng::GaussianStream g(rng::derive_seed(seed, std::uint64_t(j)));
    for (std::size_t i = 0; i < dims.size(); ++i)
      us[i] = haar_from_stream(dims[i], g).cast<detail::ComplexF>();
    std::copy(base.begin(), base.end(), work.begin());
    detail::conjugate_batch(work, scratch, n, count, us, dims);
    for (long t = 0; t < total; ++t) acc[t] += work[t];
  }

  std::vector<Matrix> out(ms.size());
  const double inv = 1.0 / samples;
  for (long l = 0; l < count; ++l)
    out[l] = inv * Eigen::Map<Matrix>(acc.data() + l * n * n, n, n);
  return out;
}

inline MultipartiteOperator monte_carlo_twirl(const Matrix& m, const std::vector<int>& dims,
                                              int samples, std::uint64_t seed) {
  auto avg = monte_carlo_twirl_batch({m}, dims, samples, seed);
  return MultipartiteOperator(detail::doubled_systems(dims), std::move(avg[0]));
}

// --------------------------------------------------------------------------
// Closed-form bounds on the twirl coefficients

struct AlphaBound {
  std::uint64_t bits;
  double alpha;
  double bound;
  double slack;  // bound - alpha
};

struct AlphaBoundReport {
  std::vector<AlphaBound> entries;
  bool all_hold = true;
};

// Verify the exact coefficients of a twirl of M = T̃†⊗²(F^{EE'}) against
// the closed-form upper bounds used in the decoupling proofs. choi_norms[b]
// must hold ‖ω̃^{A^b E}‖₂².
inline AlphaBoundReport alpha_bounds_check(const TwirlResult& tw,
                                           const std::vector<double>& choi_norms) {
  const auto& dims = tw.dims;
  const std::size_t k = dims.size();
  const std::uint64_t nk = 1ULL << k;
  if (choi_norms.size() != nk)
    throw std::invalid_argument("alpha_bounds_check: need one norm per bit string");

  double dmax = 1.0, prod_all = 1.0, prod_den = 1.0;
  std::size_t smallest = 0;
  for (std::size_t i = 0; i < k; ++i) {
    dmax = std::max(dmax, double(dims[i]));
    prod_all *= dims[i];
    prod_den *= double(dims[i]) * dims[i] - 1.0;
    if (dims[i] < dims[smallest]) smallest = i;
  }

  AlphaBoundReport rep;
  for (std::uint64_t a = 0; a < nk; ++a) {
    double bound;
    if (k <= 2) {
      // two-sender proof: every α_a <= (|A_max|²/(|A_max|²-1)) ‖ω̃^{A^a E}‖₂²
      bound = dmax * dmax / (dmax * dmax - 1.0) * choi_norms[a];
    } else if (a != 0) {
      bound = prod_all * prod_all / prod_den * choi_norms[a] * double(1ULL << k);
    } else {
      // α_{0^k} bound with A_smallest playing the distinguished role
      double rest_sq = 1.0, rest_den = 1.0;
      for (std::size_t i = 0; i < k; ++i)
        if (i != smallest) {
          rest_sq *= double(dims[i]) * dims[i];
          rest_den *= double(dims[i]) * dims[i] - 1.0;
        }
      bound = choi_norms[0] * rest_sq / rest_den;
      for (std::uint64_t c = 1; c < nk; ++c) {
        if ((c >> smallest) & 1) continue;
        double w = 1.0;
        for (std::size_t i = 0; i < k; ++i) {
          if (i == smallest) continue;
          const int cb = int((c >> i) & 1);
          w *= std::pow(double(dims[i]), (1 - cb) + 1);  // |A_i|^{c̄_i + 1}
        }
        bound += choi_norms[c] * w / rest_den;
      }
    }
    const double slack = bound - tw.alphas[a];
    rep.entries.push_back({a, tw.alphas[a], bound, slack});
    if (slack < -1e-9) rep.all_hold = false;
  }
  return rep;
}

}  // namespace decoupler
