// decoupling.hpp — Both sides of the multi-sender decoupling bounds: the
// Monte-Carlo empirical left-hand side and the analytic right-hand sides
// (two-sender, entropic, k-sender, and projector-compression forms).

#pragma once

#include "decoupler/channel.hpp"
#include "decoupler/entropy.hpp"
#include "decoupler/haar.hpp"
#include "decoupler/operators.hpp"
#include "decoupler/parallel.hpp"
#include "decoupler/rng.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace decoupler {

struct DecouplingExperiment {
  QuantumChannel channel;       // CP map on the sender systems, possibly non-tp
  MultipartiteOperator input;   // state on senders + reference systems
  double delta = 0.0;
  long samples = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline std::vector<std::string> sender_names(const DecouplingExperiment& exp) {
  std::vector<std::string> names;
  for (const auto& s : exp.channel.inputs()) names.push_back(s.name);
  return names;
}

inline std::vector<std::string> reference_names(const DecouplingExperiment& exp) {
  std::vector<std::string> names;
  for (const auto& s : exp.input.systems())
    if (std::none_of(exp.channel.inputs().begin(), exp.channel.inputs().end(),
                     [&](const SystemLabel& t) { return t.name == s.name; }))
      names.push_back(s.name);
  return names;
}

inline void validate_experiment(const DecouplingExperiment& exp) {
  for (const auto& s : exp.channel.inputs()) {
    if (!exp.input.has_system(s.name) || exp.input.system(s.name).dim != s.dim)
      throw std::invalid_argument("experiment: input state lacks sender system '" + s.name + "'");
  }
  if (!exp.input.is_psd(1e-9) || std::abs(exp.input.trace() - 1.0) > 1e-9)
    throw std::invalid_argument("experiment: input must be a unit-trace density operator");
  if (exp.delta < 0.0 || exp.delta >= 1.0)
    throw std::invalid_argument("experiment: delta must lie in [0, 1)");
  const std::string& out = exp.channel.output().name;
  if (exp.input.has_system(out) &&
      std::none_of(exp.channel.inputs().begin(), exp.channel.inputs().end(),
                   [&](const SystemLabel& t) { return t.name == out; }))
    throw std::invalid_argument("experiment: channel output label clashes with a reference system");
}

// Names of the senders selected by bitmask b (bit i = channel input i),
// optionally through the Choi mirror renaming.
inline std::vector<std::string> subset_names(const DecouplingExperiment& exp, std::uint64_t b,
                                             bool mirrored) {
  std::vector<std::string> names;
  const auto& ins = exp.channel.inputs();
  for (std::size_t i = 0; i < ins.size(); ++i)
    if ((b >> i) & 1u) names.push_back(mirrored ? mirror_name(ins[i].name) : ins[i].name);
  return names;
}

}  // namespace detail

struct TildeTriple {
  MultipartiteOperator sigma_e;   // δ-truncated ω^E
  MultipartiteOperator zeta_r;    // δ-truncated ρ^R (reference marginal)
  QuantumChannel tilde_channel;   // Kraus σ^{-1/4} K_j
  MultipartiteOperator tilde_rho; // (I ⊗ ζ^{-1/4}) ρ (I ⊗ ζ^{-1/4})
  ChoiState tilde_omega;          // Choi state of the weighted channel
};

inline TildeTriple tilde_objects(const DecouplingExperiment& exp) {
  detail::validate_experiment(exp);
  const std::string e_name = exp.channel.output().name;

  ChoiState cs = choi(exp.channel);
  MultipartiteOperator omega_e = partial_trace(cs.state, {e_name});
  MultipartiteOperator sigma = delta_truncate(omega_e, exp.delta);
  if (support_rank(sigma) == 0)
    throw std::runtime_error("tilde_objects: delta truncation removed the whole spectrum of w^E");
  const Matrix s_quarter = pseudo_inverse(sigma, -0.25).matrix();
  std::vector<Matrix> kraus;
  kraus.reserve(exp.channel.kraus().size());
  for (const auto& k : exp.channel.kraus()) kraus.push_back(s_quarter * k);
  QuantumChannel tch(exp.channel.inputs(), exp.channel.output(), std::move(kraus));

  const auto refs = detail::reference_names(exp);
  MultipartiteOperator tilde_rho = exp.input;
  MultipartiteOperator zeta({}, Matrix::Identity(1, 1));
  if (!refs.empty()) {
    MultipartiteOperator rho_r = partial_trace(exp.input, refs);
    zeta = delta_truncate(rho_r, exp.delta);
    if (support_rank(zeta) == 0)
      throw std::runtime_error("tilde_objects: delta truncation removed the whole spectrum of rho^R");
    const Matrix g = embed(pseudo_inverse(zeta, -0.25), exp.input.systems()).matrix();
    tilde_rho = MultipartiteOperator(exp.input.systems(), g * exp.input.matrix() * g);
  }
  ChoiState tilde_omega = choi(tch);
  return TildeTriple{std::move(sigma), std::move(zeta), std::move(tch), std::move(tilde_rho),
                     std::move(tilde_omega)};
}

// Squared 2-norms of every sender-subset marginal of the tilde objects.
// Index = sender bitmask; entry 0 carries the pure reference/environment
// marginals ‖ρ̃^R‖₂² and ‖ω̃^E‖₂².
struct TermNorms {
  std::vector<double> rho_sq;
  std::vector<double> omega_sq;
};

inline TermNorms term_norms(const DecouplingExperiment& exp, const TildeTriple& t) {
  const std::size_t k = exp.channel.inputs().size();
  const std::uint64_t nk = 1ull << k;
  const auto refs = detail::reference_names(exp);
  const std::string e_name = exp.channel.output().name;
  TermNorms out;
  out.rho_sq.resize(nk);
  out.omega_sq.resize(nk);
  for (std::uint64_t b = 0; b < nk; ++b) {
    std::vector<std::string> rho_keep = detail::subset_names(exp, b, false);
    rho_keep.insert(rho_keep.end(), refs.begin(), refs.end());
    if (rho_keep.empty())
      out.rho_sq[b] = std::norm(t.tilde_rho.trace());
    else {
      const double n = schatten_norm(partial_trace(t.tilde_rho, rho_keep), 2);
      out.rho_sq[b] = n * n;
    }
    std::vector<std::string> om_keep = detail::subset_names(exp, b, true);
    om_keep.push_back(e_name);
    const double n = schatten_norm(partial_trace(t.tilde_omega.state, om_keep), 2);
    out.omega_sq[b] = n * n;
  }
  return out;
}

// Sample mean and standard error of ‖𝒯((⊗ᵢUᵢ)·ρ) − ω^E⊗ρ^R‖₁ over
// independent Haar unitaries per sender. Deterministic per (seed, sample
// index) regardless of worker count.
inline std::pair<double, double> lhs_estimate(const DecouplingExperiment& exp) {
  detail::validate_experiment(exp);
  if (exp.samples < 2) throw std::invalid_argument("lhs_estimate: need at least 2 samples");

  const auto& ins = exp.channel.inputs();
  const auto refs = detail::reference_names(exp);
  std::vector<std::string> order = detail::sender_names(exp);
  order.insert(order.end(), refs.begin(), refs.end());
  const Matrix base = permute_systems(exp.input, order).matrix();

  long dr = 1;
  for (const auto& n : refs) dr *= exp.input.system(n).dim;
  const Matrix id_r = Matrix::Identity(dr, dr);
  std::vector<Matrix> kraus_full;
  for (const auto& k : exp.channel.kraus())
    kraus_full.push_back(Eigen::kroneckerProduct(k, id_r));

  // Target ω^E ⊗ ρ^R in the same [E, refs...] layout apply() would produce.
  const std::string e_name = exp.channel.output().name;
  ChoiState cs = choi(exp.channel);
  Matrix target = partial_trace(cs.state, {e_name}).matrix();
  if (!refs.empty())
    target = Eigen::kroneckerProduct(target, partial_trace(exp.input, refs).matrix()).eval();

  std::vector<double> vals(std::size_t(exp.samples));
  parallel_for(exp.samples, [&](std::int64_t j) {
    rng::GaussianStream stream(rng::derive_seed(exp.seed, std::uint64_t(j)));
    Matrix u = Matrix::Identity(1, 1);
    for (const auto& s : ins)
      u = Eigen::kroneckerProduct(u, haar_from_stream(s.dim, stream)).eval();
    u = Eigen::kroneckerProduct(u, id_r).eval();
    const Matrix rotated = u * base * u.adjoint();
    Matrix out = Matrix::Zero(target.rows(), target.cols());
    for (const auto& kf : kraus_full) out += kf * rotated * kf.adjoint();
    vals[std::size_t(j)] = trace_norm_hermitian(out - target);
  });

  double mean = 0.0;
  for (double v : vals) mean += v;
  mean /= double(exp.samples);
  double var = 0.0;
  for (double v : vals) var += (v - mean) * (v - mean);
  var /= double(exp.samples) * double(exp.samples - 1);
  return {mean, std::sqrt(var)};
}

// √(δ + |A₂|²/(|A₂|²−1) · Σ_{∅≠S⊆{1,2}} ‖ρ̃^{A^S R}‖₂² ‖ω̃^{Â^S E}‖₂²),
// with A₂ relabelled internally to the larger sender.
inline double rhs_two_sender(const DecouplingExperiment& exp, const TildeTriple& t,
                             const TermNorms& n) {
  const auto& ins = exp.channel.inputs();
  if (ins.size() != 2) throw std::invalid_argument("rhs_two_sender: exactly two senders required");
  for (const auto& s : ins)
    if (s.dim < 2) throw std::invalid_argument("rhs_two_sender: sender dimensions must be >= 2");
  (void)t;
  const double dmax = double(std::max(ins[0].dim, ins[1].dim));
  const double factor = dmax * dmax / (dmax * dmax - 1.0);
  double sum = 0.0;
  for (std::uint64_t b = 1; b < 4; ++b) sum += n.rho_sq[b] * n.omega_sq[b];
  return std::sqrt(exp.delta + factor * sum);
}

inline double rhs_two_sender(const DecouplingExperiment& exp) {
  TildeTriple t = tilde_objects(exp);
  return rhs_two_sender(exp, t, term_norms(exp, t));
}

// δ + 2 Σ_{∅≠S⊆{1,2}} 2^{−H̃₂(A^S|R)_ρ − H̃₂(Â^S|E)_ω}, the entropic
// two-sender form with the twirl constant rounded up to 2.
inline double rhs_entropic(const DecouplingExperiment& exp) {
  detail::validate_experiment(exp);
  const auto& ins = exp.channel.inputs();
  if (ins.size() != 2) throw std::invalid_argument("rhs_entropic: exactly two senders required");
  for (const auto& s : ins)
    if (s.dim < 2) throw std::invalid_argument("rhs_entropic: sender dimensions must be >= 2");
  const auto refs = detail::reference_names(exp);
  const std::string e_name = exp.channel.output().name;
  ChoiState cs = choi(exp.channel);

  double sum = 0.0;
  for (std::uint64_t b = 1; b < 4; ++b) {
    std::vector<std::string> rho_keep = detail::subset_names(exp, b, false);
    rho_keep.insert(rho_keep.end(), refs.begin(), refs.end());
    const double h_rho =
        tilde_h2_cond(partial_trace(exp.input, rho_keep), refs, exp.delta).value;
    std::vector<std::string> om_keep = detail::subset_names(exp, b, true);
    om_keep.push_back(e_name);
    const double h_om =
        tilde_h2_cond(partial_trace(cs.state, om_keep), {e_name}, exp.delta).value;
    sum += std::exp2(-h_rho - h_om);
  }
  return exp.delta + 2.0 * sum;
}

struct KSenderBound {
  double squared = 0.0;   // bound on the squared deviation
  double one_norm = 0.0;  // its square root, comparable to lhs_estimate
};

// k-sender tensor-product bound. A₀ is relabelled internally to the
// smallest sender; the leading term excludes it from the dimension factor.
inline KSenderBound rhs_k_sender(const DecouplingExperiment& exp, const TildeTriple& t,
                                 const TermNorms& n) {
  const auto& ins = exp.channel.inputs();
  const std::size_t k = ins.size();
  if (k < 2) throw std::invalid_argument("rhs_k_sender: at least two senders required");
  for (const auto& s : ins)
    if (s.dim < 2) throw std::invalid_argument("rhs_k_sender: sender dimensions must be >= 2");
  (void)t;
  std::size_t smallest = 0;
  for (std::size_t i = 1; i < k; ++i)
    if (ins[i].dim < ins[smallest].dim) smallest = i;

  double rest_prod = 1.0, rest_den = 1.0, all_prod = 1.0, all_den = 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double d = double(ins[i].dim);
    all_prod *= d;
    all_den *= d * d - 1.0;
    if (i != smallest) {
      rest_prod *= d;
      rest_den *= d * d - 1.0;
    }
  }

  double sq = (rest_prod * rest_prod / rest_den - 1.0) * n.omega_sq[0] * n.rho_sq[0];
  const double factor = all_prod * all_prod / all_den;
  const double two_k = std::exp2(double(k));
  for (std::uint64_t b = 1; b < (1ull << k); ++b)
    sq += factor * n.omega_sq[b] * (n.rho_sq[b] * two_k + n.rho_sq[0]);
  return KSenderBound{sq, std::sqrt(std::max(sq, 0.0))};
}

inline KSenderBound rhs_k_sender(const DecouplingExperiment& exp) {
  TildeTriple t = tilde_objects(exp);
  return rhs_k_sender(exp, t, term_norms(exp, t));
}

// Projector-compression bound: √(δ + 2|E₁|2^{−H̃₂(A₁|R)} + |E₂|2^{−H̃₂(A₂|R)}
// + |E₁E₂|2^{−H̃₂(A₁A₂|R)}). `senders` names the two compressed systems of
// rho; pi_list[i] is the |Eᵢ|×|Aᵢ| slice of the i-th projector.
inline double rhs_buscemi(const std::vector<Matrix>& pi_list, const MultipartiteOperator& rho,
                          const std::vector<std::string>& senders, double delta) {
  if (pi_list.size() != 2 || senders.size() != 2)
    throw std::invalid_argument("rhs_buscemi: exactly two senders required");
  for (const auto& v : pi_list)
    if (v.rows() < 1) throw std::invalid_argument("rhs_buscemi: projector rank must be >= 1");
  for (std::size_t i = 0; i < 2; ++i)
    if (pi_list[i].cols() != rho.system(senders[i]).dim)
      throw std::invalid_argument("rhs_buscemi: projector shape does not match sender");

  std::vector<std::string> refs;
  for (const auto& s : rho.systems())
    if (s.name != senders[0] && s.name != senders[1]) refs.push_back(s.name);

  auto h = [&](const std::vector<std::string>& part) {
    std::vector<std::string> keep = part;
    keep.insert(keep.end(), refs.begin(), refs.end());
    return tilde_h2_cond(partial_trace(rho, keep), refs, delta).value;
  };
  const double e1 = double(pi_list[0].rows());
  const double e2 = double(pi_list[1].rows());
  const double sum = 2.0 * e1 * std::exp2(-h({senders[0]})) + e2 * std::exp2(-h({senders[1]})) +
                     e1 * e2 * std::exp2(-h({senders[0], senders[1]}));
  return std::sqrt(delta + sum);
}

}  // namespace decoupler
