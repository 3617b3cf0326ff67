// builtins.hpp — Named catalog of stock channels and input states used by
// the CLI and the test suite.

#pragma once

#include "decoupler/channel.hpp"
#include "decoupler/haar.hpp"
#include "decoupler/operators.hpp"
#include "decoupler/rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace decoupler {

inline std::vector<std::string> builtin_channel_names() {
  return {"identity", "depolarizing", "dephasing", "erasure-to-E", "random"};
}

inline std::vector<std::string> builtin_state_names() {
  return {"max-entangled", "maximally-mixed", "ghz-like", "random"};
}

namespace detail {

inline std::vector<SystemLabel> sender_labels(const std::vector<int>& dims) {
  if (dims.empty()) throw std::invalid_argument("builtin: at least one sender required");
  std::vector<SystemLabel> labels;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (dims[i] < 1) throw std::invalid_argument("builtin: sender dims must be >= 1");
    labels.push_back({"A" + std::to_string(i + 1), dims[i]});
  }
  return labels;
}

}  // namespace detail

// Builds a catalog channel on senders A1..Ak with output system E.
// output_dim = 0 picks the natural default per family. `seed` only matters
// for "random".
inline QuantumChannel builtin_channel(const std::string& name, const std::vector<int>& dims,
                                      int output_dim = 0, std::uint64_t seed = 0) {
  auto inputs = detail::sender_labels(dims);
  const long din = detail::total_dim(inputs);
  if (name == "identity") {
    if (output_dim == 0) output_dim = int(din);
    if (output_dim != din)
      throw std::invalid_argument("identity: output dim must equal total input dim");
    return QuantumChannel(inputs, {"E", output_dim},
                          {Matrix::Identity(output_dim, output_dim)});
  }
  if (name == "depolarizing") {
    // Completely depolarizing: rho -> Tr[rho] * pi^E, Kraus |i><j| / sqrt(dE).
    if (output_dim == 0) output_dim = int(din);
    std::vector<Matrix> kraus;
    const double s = 1.0 / std::sqrt(double(output_dim));
    for (int i = 0; i < output_dim; ++i)
      for (long j = 0; j < din; ++j) {
        Matrix k = Matrix::Zero(output_dim, din);
        k(i, j) = s;
        kraus.push_back(std::move(k));
      }
    return QuantumChannel(inputs, {"E", output_dim}, std::move(kraus));
  }
  if (name == "dephasing") {
    if (output_dim == 0) output_dim = int(din);
    if (output_dim != din)
      throw std::invalid_argument("dephasing: output dim must equal total input dim");
    std::vector<Matrix> kraus;
    for (long i = 0; i < din; ++i) {
      Matrix k = Matrix::Zero(din, din);
      k(i, i) = 1.0;
      kraus.push_back(std::move(k));
    }
    return QuantumChannel(inputs, {"E", output_dim}, std::move(kraus));
  }
  if (name == "erasure-to-E") {
    // Symmetric (p = 1/2) erasure: keep the input in the first d levels or
    // emit the flag state |d>.
    if (output_dim == 0) output_dim = int(din) + 1;
    if (output_dim != din + 1)
      throw std::invalid_argument("erasure-to-E: output dim must be input dim + 1");
    const double p = 0.5;
    std::vector<Matrix> kraus;
    Matrix keep = Matrix::Zero(output_dim, din);
    for (long i = 0; i < din; ++i) keep(i, i) = std::sqrt(1.0 - p);
    kraus.push_back(std::move(keep));
    for (long i = 0; i < din; ++i) {
      Matrix k = Matrix::Zero(output_dim, din);
      k(din, i) = std::sqrt(p);
      kraus.push_back(std::move(k));
    }
    return QuantumChannel(inputs, {"E", output_dim}, std::move(kraus));
  }
  if (name == "random") {
    if (output_dim == 0) output_dim = 2;
    int env = int((din + output_dim - 1) / output_dim);
    if (long(env) * output_dim < din) ++env;
    return random_channel(inputs, {"E", output_dim}, env, seed);
  }
  std::string msg = "unknown builtin channel '" + name + "'; available:";
  for (const auto& n : builtin_channel_names()) msg += " " + n;
  throw std::invalid_argument(msg);
}

// Builds a catalog input state on senders A1..Ak plus reference R.
// ref_dim = 0 picks the natural default per family.
inline MultipartiteOperator builtin_state(const std::string& name, const std::vector<int>& dims,
                                          int ref_dim = 0, std::uint64_t seed = 0) {
  auto senders = detail::sender_labels(dims);
  const long da = detail::total_dim(senders);
  if (name == "max-entangled") {
    if (ref_dim == 0) ref_dim = int(da);
    if (ref_dim != da)
      throw std::invalid_argument("max-entangled: reference dim must equal total sender dim");
    Vector v = Vector::Zero(da * da);
    for (long i = 0; i < da; ++i) v(i * da + i) = 1.0 / std::sqrt(double(da));
    std::vector<SystemLabel> systems = senders;
    systems.push_back({"R", ref_dim});
    return PureState(std::move(systems), std::move(v)).to_operator();
  }
  if (name == "maximally-mixed") {
    if (ref_dim == 0) ref_dim = 1;
    std::vector<SystemLabel> systems = senders;
    systems.push_back({"R", ref_dim});
    const long d = da * ref_dim;
    return MultipartiteOperator(std::move(systems),
                                Matrix::Identity(d, d) / double(d));
  }
  if (name == "ghz-like") {
    // Uniform superposition of |i,i,...,i> across senders and reference,
    // ranging over the smallest dimension.
    if (ref_dim == 0) ref_dim = dims[0];
    std::vector<SystemLabel> systems = senders;
    systems.push_back({"R", ref_dim});
    int dmin = ref_dim;
    for (int d : dims) dmin = std::min(dmin, d);
    const auto st = detail::strides(systems);
    Vector v = Vector::Zero(detail::total_dim(systems));
    for (int i = 0; i < dmin; ++i) {
      long idx = 0;
      for (auto s : st) idx += long(i) * s;
      v(idx) = 1.0 / std::sqrt(double(dmin));
    }
    return PureState(std::move(systems), std::move(v)).to_operator();
  }
  if (name == "random") {
    if (ref_dim == 0) ref_dim = int(da);
    std::vector<SystemLabel> systems = senders;
    systems.push_back({"R", ref_dim});
    const long d = da * ref_dim;
    rng::GaussianStream stream(rng::derive_seed(seed, 0));
    Vector v(d);
    for (long i = 0; i < d; ++i) {
      const double re = stream.next();
      const double im = stream.next();
      v(i) = Complex(re, im);
    }
    v /= v.norm();
    return PureState(std::move(systems), std::move(v)).to_operator();
  }
  std::string msg = "unknown builtin state '" + name + "'; available:";
  for (const auto& n : builtin_state_names()) msg += " " + n;
  throw std::invalid_argument(msg);
}

}  // namespace decoupler
