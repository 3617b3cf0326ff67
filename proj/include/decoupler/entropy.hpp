// entropy.hpp — One-shot entropies: δ-tilde conditional 2-entropy, δ-tilde
// max entropy, non-smooth max entropy, and the fixed-weight conditional
// 2-entropy.
//
// All values are in bits. Subnormalized inputs are handled throughout
// (δ-truncation never renormalizes).

#pragma once

#include "decoupler/operators.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace decoupler {

struct EntropyReport {
  double value = 0.0;
  double delta = 0.0;
  double truncated_mass = 0.0;
  int support_rank = 0;
};

namespace detail {

inline double log2_checked(double x, const char* what) {
  if (!(x > 0.0)) throw std::runtime_error(std::string(what) + ": vanishing trace expression");
  return std::log2(x);
}

}  // namespace detail

// -log₂ Tr[ρ (I⊗ρ^B_δ^{-1/2}) ρ (I⊗ρ^B_δ^{-1/2})], the symmetric form of
// the δ-tilde conditional 2-entropy. `cond` names the conditioning systems
// (the B part); an empty cond gives the plain collision entropy -log₂Tr[ρ²].
// Components of ρ outside the support of the truncated marginal are
// annihilated by the pseudoinverse, per the Moore-Penrose convention.
inline EntropyReport tilde_h2_cond(const MultipartiteOperator& rho,
                                   const std::vector<std::string>& cond, double delta) {
  if (cond.size() >= rho.systems().size() && !cond.empty())
    throw std::invalid_argument("tilde_h2_cond: conditioning on every system leaves no A part");
  for (const auto& n : cond) (void)rho.system(n);

  if (cond.empty()) {
    const double t = (rho.matrix() * rho.matrix()).trace().real();
    return EntropyReport{-detail::log2_checked(t, "tilde_h2_cond"), delta, 0.0,
                         support_rank(rho)};
  }

  MultipartiteOperator marg = partial_trace(rho, cond);
  MultipartiteOperator w = delta_truncate(marg, delta);
  MultipartiteOperator w_inv_half = pseudo_inverse(w, -0.5);
  Matrix g = embed(w_inv_half, rho.systems()).matrix();
  const Matrix rg = rho.matrix() * g;
  const double t = (rg * rg).trace().real();
  return EntropyReport{-detail::log2_checked(t, "tilde_h2_cond"),
                       delta,
                       (marg.trace() - w.trace()).real(),
                       support_rank(w)};
}

// log₂ ‖(ρ_δ)⁻¹‖_∞ = -log₂ of the smallest surviving eigenvalue.
inline double tilde_hmax_delta(const MultipartiteOperator& rho, double delta) {
  MultipartiteOperator w = delta_truncate(rho, delta);
  auto eig = detail::hermitian_eig(w);
  const double lmax = std::max(eig.values.maxCoeff(), 0.0);
  const double cutoff = double(w.dim()) * std::numeric_limits<double>::epsilon() * lmax;
  double smallest = -1.0;
  for (long i = 0; i < eig.values.size(); ++i)
    if (eig.values(i) > cutoff) {
      smallest = eig.values(i);
      break;
    }
  if (smallest <= 0.0)
    throw std::runtime_error("tilde_hmax_delta: truncation removed the entire spectrum");
  return -std::log2(smallest);
}

// 2 log₂ Tr[√ρ]  (ε = 0 specialization of the smooth max entropy).
inline double hmax(const MultipartiteOperator& rho) {
  auto eig = detail::hermitian_eig(rho);
  double s = 0.0;
  for (long i = 0; i < eig.values.size(); ++i)
    if (eig.values(i) > 0.0) s += std::sqrt(eig.values(i));
  return 2.0 * detail::log2_checked(s, "hmax");
}

// -2 log₂ ‖(weight⊗I)^{-1/4} ρ (weight⊗I)^{-1/4}‖₂ with a caller-fixed
// weight on the conditioning systems (no optimization). The weight's
// support must contain the support of ρ's conditioning marginal.
inline double h2_cond_fixed(const MultipartiteOperator& rho,
                            const std::vector<std::string>& cond,
                            const MultipartiteOperator& weight) {
  if (weight.systems().size() != cond.size())
    throw std::invalid_argument("h2_cond_fixed: weight must live on the conditioning systems");
  for (const auto& n : cond) (void)weight.system(n);
  if (!weight.is_psd(1e-9))
    throw std::invalid_argument("h2_cond_fixed: weight must be positive semidefinite");

  MultipartiteOperator marg = partial_trace(rho, cond);
  MultipartiteOperator proj = support_projector(weight);
  const Matrix pm = proj.matrix();
  const double leak =
      (marg.matrix() - pm * marg.matrix() * pm).cwiseAbs().maxCoeff();
  if (leak > 1e-8)
    throw std::invalid_argument(
        "h2_cond_fixed: weight support does not contain the conditioning marginal's support");

  Matrix q = embed(pseudo_inverse(weight, -0.25), rho.systems()).matrix();
  const double n2 = (q * rho.matrix() * q).norm();
  return -2.0 * detail::log2_checked(n2, "h2_cond_fixed");
}

// ε-smoothed variants are reserved by name only; the smoothing search has
// no algorithm here.
inline EntropyReport smooth_tilde_h2_cond(const MultipartiteOperator&,
                                          const std::vector<std::string>&, double, double) {
  throw std::logic_error("smooth_tilde_h2_cond: unimplemented");
}

}  // namespace decoupler
