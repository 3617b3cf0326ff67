// channel.hpp — CP maps as Kraus families with Stinespring, complementary,
// Choi and adjoint views.
//
// A channel acts on a named subset of a larger state's systems; the rest
// is carried through by an implicit identity. Matching is always by
// system name, never positional.

#pragma once

#include "decoupler/operators.hpp"
#include "decoupler/rng.hpp"

#include <cstdint>
#include <utility>

namespace decoupler {

struct StinespringIsometry {
  Matrix matrix;  // (output ⊗ environment) × input
  SystemLabel output;
  SystemLabel environment;
};

class QuantumChannel {
 public:
  QuantumChannel(std::vector<SystemLabel> inputs, SystemLabel output,
                 std::vector<Matrix> kraus)
      : inputs_(std::move(inputs)), output_(std::move(output)), kraus_(std::move(kraus)) {
    detail::check_unique_names(inputs_);
    if (kraus_.empty()) throw std::invalid_argument("channel needs at least one Kraus operator");
    const long din = detail::total_dim(inputs_);
    for (const auto& k : kraus_)
      if (k.rows() != output_.dim || k.cols() != din)
        throw std::invalid_argument("Kraus operator shape does not match channel signature");
    // CP-only maps are first class (the scaled compression map amplifies
    // trace); tp is an advisory flag, never enforced by apply.
    Matrix s = Matrix::Zero(din, din);
    for (const auto& k : kraus_) s += k.adjoint() * k;
    tp_ = (s - Matrix::Identity(din, din)).cwiseAbs().maxCoeff() <= 1e-10;
  }

  const std::vector<SystemLabel>& inputs() const { return inputs_; }
  const SystemLabel& output() const { return output_; }
  const std::vector<Matrix>& kraus() const { return kraus_; }
  bool trace_preserving() const { return tp_; }
  long input_dim() const { return detail::total_dim(inputs_); }

 private:
  std::vector<SystemLabel> inputs_;
  SystemLabel output_;
  std::vector<Matrix> kraus_;
  bool tp_ = false;
};

// A CP map that only rescales (identity Kraus times sqrt(scale)) is used in
// a few constructions; plain helper.
inline QuantumChannel identity_channel(const std::vector<SystemLabel>& inputs,
                                       const SystemLabel& output) {
  const long d = detail::total_dim(inputs);
  if (output.dim != d) throw std::invalid_argument("identity_channel: output dim mismatch");
  return QuantumChannel(inputs, output, {Matrix::Identity(d, d)});
}

// Σ_k (K_k ⊗ I) rho (K_k ⊗ I)†; output systems = [output, untouched...].
inline MultipartiteOperator apply(const QuantumChannel& ch, const MultipartiteOperator& rho) {
  std::vector<std::string> order;
  for (const auto& s : ch.inputs()) {
    if (!rho.has_system(s.name) || rho.system(s.name).dim != s.dim)
      throw std::invalid_argument("apply: state lacks channel input system '" + s.name + "'");
    order.push_back(s.name);
  }
  std::vector<SystemLabel> rest;
  for (const auto& s : rho.systems())
    if (std::none_of(ch.inputs().begin(), ch.inputs().end(),
                     [&](const SystemLabel& t) { return t.name == s.name; })) {
      rest.push_back(s);
      order.push_back(s.name);
    }
  if (rho.has_system(ch.output().name) &&
      std::none_of(ch.inputs().begin(), ch.inputs().end(),
                   [&](const SystemLabel& t) { return t.name == ch.output().name; }))
    throw std::invalid_argument("apply: output label '" + ch.output().name +
                                "' clashes with an untouched system");

  const Matrix m = permute_systems(rho, order).matrix();
  const long dr = detail::total_dim(rest);
  const long dout = ch.output().dim * dr;
  Matrix out = Matrix::Zero(dout, dout);
  const Matrix id_rest = Matrix::Identity(dr, dr);
  for (const auto& k : ch.kraus()) {
    Matrix kf = Eigen::kroneckerProduct(k, id_rest);
    out += kf * m * kf.adjoint();
  }
  std::vector<SystemLabel> systems{ch.output()};
  for (const auto& s : rest) systems.push_back(s);
  return MultipartiteOperator(std::move(systems), std::move(out));
}

// Σ_k K† x K on the output system, relabelled to the inputs.
inline MultipartiteOperator adjoint_apply(const QuantumChannel& ch,
                                          const MultipartiteOperator& x) {
  if (x.systems().size() != 1 || x.systems()[0].dim != ch.output().dim)
    throw std::invalid_argument("adjoint_apply: operand must live on the channel output system");
  const long din = ch.input_dim();
  Matrix out = Matrix::Zero(din, din);
  for (const auto& k : ch.kraus()) out += k.adjoint() * x.matrix() * k;
  return MultipartiteOperator(ch.inputs(), std::move(out));
}

// V = Σ_k K_k ⊗ |k⟩ on output ⊗ environment; environment basis follows the
// Kraus enumeration order so complementary channels are deterministic.
inline StinespringIsometry stinespring(const QuantumChannel& ch,
                                       const std::string& env_name = "env") {
  if (!ch.trace_preserving())
    throw std::invalid_argument("stinespring: channel is not trace preserving");
  const long din = ch.input_dim();
  const int ne = int(ch.kraus().size());
  Matrix v = Matrix::Zero(long(ch.output().dim) * ne, din);
  for (int k = 0; k < ne; ++k)
    for (int o = 0; o < ch.output().dim; ++o)
      v.row(long(o) * ne + k) = ch.kraus()[k].row(o);
  return StinespringIsometry{std::move(v), ch.output(), SystemLabel{env_name, ne}};
}

// rho ↦ Tr_output[V rho V†]: Kraus sliced from V on the output index.
inline QuantumChannel complementary(const QuantumChannel& ch,
                                    const std::string& env_name = "env") {
  auto iso = stinespring(ch, env_name);
  const long din = ch.input_dim();
  const int ne = iso.environment.dim;
  std::vector<Matrix> kraus;
  kraus.reserve(ch.output().dim);
  for (int o = 0; o < ch.output().dim; ++o) {
    Matrix c(ne, din);
    for (int k = 0; k < ne; ++k) c.row(k) = iso.matrix.row(long(o) * ne + k);
    kraus.push_back(std::move(c));
  }
  return QuantumChannel(ch.inputs(), iso.environment, std::move(kraus));
}

struct ChoiState {
  MultipartiteOperator state;        // on mirrors ⊗ output
  std::vector<std::string> mirrors;  // one per input system, in input order
};

inline std::string mirror_name(const std::string& input_name) { return input_name + "^"; }

// (I ⊗ ch)(⊗_i Φ^{A_i Â_i}), returned with systems [Â_1, ..., Â_k, output].
inline ChoiState choi(const QuantumChannel& ch) {
  PureState phi_all;
  bool first = true;
  std::vector<std::string> mirrors;
  for (const auto& a : ch.inputs()) {
    SystemLabel hat{mirror_name(a.name), a.dim};
    mirrors.push_back(hat.name);
    PureState phi = max_entangled(a, hat);
    phi_all = first ? phi : tensor_product(phi_all, phi);
    first = false;
  }
  MultipartiteOperator out = apply(ch, phi_all.to_operator());
  std::vector<std::string> order = mirrors;
  order.push_back(ch.output().name);
  return ChoiState{permute_systems(out, order), std::move(mirrors)};
}

// Kraus family from the first columns of a Haar unitary on env*output.
inline QuantumChannel random_channel(const std::vector<SystemLabel>& inputs,
                                     const SystemLabel& output, int env_dim,
                                     std::uint64_t seed);

// Projector compression: the scaled CP (non-tp) map
// (|A_1|/|E_1|)(|A_2|/|E_2|) Π_1 ⊗ Π_2 with each Π_i a rank-|E_i|
// projector embedded as A_i → E_i. `pi_list` holds |E_i| × |A_i| slices
// V_i with V_i† V_i a projector of rank |E_i| (i.e. V_i V_i† = I^{E_i}).
inline QuantumChannel projector_compression(const std::vector<Matrix>& pi_list,
                                            const std::vector<SystemLabel>& inputs,
                                            const SystemLabel& output) {
  if (pi_list.size() != inputs.size())
    throw std::invalid_argument("projector_compression: one projector per input required");
  double scale = 1.0;
  Matrix big = Matrix::Identity(1, 1);
  long eout = 1;
  for (std::size_t i = 0; i < pi_list.size(); ++i) {
    const Matrix& v = pi_list[i];
    if (v.cols() != inputs[i].dim || v.rows() > v.cols() || v.rows() < 1)
      throw std::invalid_argument("projector_compression: slice shape mismatch");
    if ((v * v.adjoint() - Matrix::Identity(v.rows(), v.rows())).cwiseAbs().maxCoeff() > 1e-10)
      throw std::invalid_argument("projector_compression: input is not an orthogonal projector");
    scale *= double(inputs[i].dim) / double(v.rows());
    eout *= v.rows();
    big = Eigen::kroneckerProduct(big, v).eval();
  }
  if (output.dim != eout)
    throw std::invalid_argument("projector_compression: output dim must equal product of ranks");
  return QuantumChannel(inputs, output, {std::sqrt(scale) * big});
}

}  // namespace decoupler
