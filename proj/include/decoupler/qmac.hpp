// qmac.hpp — Coding layer for the two-sender quantum multiple access
// channel: control states, the δ₁–δ₄ error ledger, achievable rate
// regions (entanglement-assisted and entanglement-generation), and
// Uhlmann decoder extraction.

#pragma once

#include "decoupler/channel.hpp"
#include "decoupler/decoupling.hpp"
#include "decoupler/entropy.hpp"
#include "decoupler/operators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace decoupler {

// ω^{A″B″CE} = U_N (Ω^{A′A″} ⊗ Δ^{B′B″}) for a tp channel N: A′B′ → C with
// Stinespring environment E. The kept halves A″, B″ are the code systems.
struct ControlState {
  PureState omega;      // on [A″, B″, C, E]
  PureState omega_in;   // Ω, permuted to [A″, A′]
  PureState delta_in;   // Δ, permuted to [B″, B′]
  QuantumChannel channel;
  std::string a_keep, b_keep, a_in, b_in, c_name, e_name;
};

inline ControlState control_state(const QuantumChannel& channel, const PureState& omega_in,
                                  const PureState& delta_in,
                                  const std::string& env_name = "E") {
  if (!channel.trace_preserving())
    throw std::invalid_argument("control_state: channel must be trace preserving");
  if (channel.inputs().size() != 2)
    throw std::invalid_argument("control_state: channel must have exactly two input systems");
  const SystemLabel& a_prime = channel.inputs()[0];
  const SystemLabel& b_prime = channel.inputs()[1];

  auto keep_half = [](const PureState& s, const SystemLabel& in, const char* which) {
    if (s.systems().size() != 2 || !std::any_of(s.systems().begin(), s.systems().end(),
                                                [&](const SystemLabel& t) { return t == in; }))
      throw std::invalid_argument(std::string("control_state: ") + which +
                                  " must be bipartite on the channel input '" + in.name + "'");
    const SystemLabel& keep =
        s.systems()[0].name == in.name ? s.systems()[1] : s.systems()[0];
    if (keep.dim != in.dim)
      throw std::invalid_argument(std::string("control_state: ") + which +
                                  " kept half must match the channel input dimension");
    return permute_systems(s, {keep.name, in.name});
  };
  PureState om = keep_half(omega_in, a_prime, "omega");
  PureState de = keep_half(delta_in, b_prime, "delta");

  PureState joint = tensor_product(om, de);  // [A″, A′, B″, B′]
  joint = permute_systems(joint, {om.systems()[0].name, de.systems()[0].name, a_prime.name,
                                  b_prime.name});
  std::string env = env_name;
  auto clashes = [&](const std::string& n) {
    return n == om.systems()[0].name || n == de.systems()[0].name ||
           n == channel.output().name;
  };
  while (clashes(env)) env += "~";
  auto iso = stinespring(channel, env);
  const long d_keep = long(om.systems()[0].dim) * de.systems()[0].dim;
  Matrix big = Eigen::kroneckerProduct(Matrix::Identity(d_keep, d_keep), iso.matrix);
  Vector amps = big * joint.amplitudes();
  std::vector<SystemLabel> systems{om.systems()[0], de.systems()[0], iso.output,
                                   iso.environment};
  detail::check_unique_names(systems);
  return ControlState{PureState(std::move(systems), std::move(amps)),
                      om,
                      de,
                      channel,
                      om.systems()[0].name,
                      de.systems()[0].name,
                      a_prime.name,
                      b_prime.name,
                      channel.output().name,
                      env};
}

struct ErrorLedger {
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
  double delta4 = 0.0;
  bool a_encoder_mismatch = false;  // δ₂ > 1: source spread exceeds code entropy
  bool b_encoder_mismatch = false;
};

namespace detail {

inline std::vector<std::string> rest_names(const PureState& s, const std::string& head) {
  std::vector<std::string> out;
  for (const auto& t : s.systems())
    if (t.name != head) out.push_back(t.name);
  return out;
}

}  // namespace detail

// Error ledger for sources ψ, φ whose first system is the message (A resp.
// B) and whose remaining systems are the reference. All entropies are
// δ-tilde conditional 2-entropies at the given δ.
inline ErrorLedger error_ledger(const ControlState& cs, const PureState& psi,
                                const PureState& phi, double delta) {
  const std::string a_msg = psi.systems()[0].name;
  const std::string b_msg = phi.systems()[0].name;
  const auto r1 = detail::rest_names(psi, a_msg);
  const auto r2 = detail::rest_names(phi, b_msg);
  const MultipartiteOperator psi_op = psi.to_operator();
  const MultipartiteOperator phi_op = phi.to_operator();
  const MultipartiteOperator omega_op = cs.omega.to_operator();

  auto h_omega = [&](const std::vector<std::string>& keep_code) {
    std::vector<std::string> keep = keep_code;
    keep.push_back(cs.e_name);
    return tilde_h2_cond(partial_trace(omega_op, keep), {cs.e_name}, delta).value;
  };
  const double h_ab_e = h_omega({cs.a_keep, cs.b_keep});
  const double h_a_e = h_omega({cs.a_keep});
  const double h_b_e = h_omega({cs.b_keep});
  const double h_a_r1 = tilde_h2_cond(psi_op, r1, delta).value;
  const double h_b_r2 = tilde_h2_cond(phi_op, r2, delta).value;

  ErrorLedger led;
  led.delta1 = std::sqrt(delta + std::exp2(-h_ab_e - h_a_r1 - h_b_r2) +
                         std::exp2(-h_b_e - h_b_r2) + std::exp2(-h_a_e - h_a_r1));

  const double h2_a = tilde_h2_cond(partial_trace(omega_op, {cs.a_keep}), {}, delta).value;
  const double h2_b = tilde_h2_cond(partial_trace(omega_op, {cs.b_keep}), {}, delta).value;
  led.delta2 = std::exp2(0.5 * (hmax(partial_trace(psi_op, {a_msg})) - h2_a));
  led.delta3 = std::exp2(0.5 * (hmax(partial_trace(phi_op, {b_msg})) - h2_b));
  led.a_encoder_mismatch = led.delta2 > 1.0;
  led.b_encoder_mismatch = led.delta3 > 1.0;
  led.delta4 = led.delta1 + 4.0 * std::sqrt(led.delta2) + 4.0 * std::sqrt(led.delta3) +
               12.0 * std::sqrt(led.delta2 * led.delta3);
  return led;
}

struct RateConstraint {
  std::string label;
  double coeff_qa = 0.0;
  double coeff_qb = 0.0;
  double bound = 0.0;  // coeff_qa·Q_A + coeff_qb·Q_B ≤ bound
};

struct RateRegion {
  std::vector<RateConstraint> constraints;
  std::vector<std::pair<double, double>> vertices;  // (Q_A, Q_B), CCW
  double error_level = 0.0;
};

namespace detail {

// Corner points of {x,y ≥ 0} ∩ {aᵢx + bᵢy ≤ cᵢ}: intersect every line pair
// (including the axes), keep feasible points, dedupe, order CCW.
inline std::vector<std::pair<double, double>> polygon_vertices(
    const std::vector<RateConstraint>& cons) {
  std::vector<std::array<double, 3>> lines;
  for (const auto& c : cons) lines.push_back({c.coeff_qa, c.coeff_qb, c.bound});
  lines.push_back({1.0, 0.0, 0.0});
  lines.push_back({0.0, 1.0, 0.0});

  const double tol = 1e-9;
  auto feasible = [&](double x, double y) {
    if (x < -tol || y < -tol) return false;
    for (const auto& c : cons)
      if (c.coeff_qa * x + c.coeff_qb * y > c.bound + tol) return false;
    return true;
  };

  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < lines.size(); ++i)
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      const double det = lines[i][0] * lines[j][1] - lines[i][1] * lines[j][0];
      if (std::abs(det) < 1e-12) continue;
      const double x = (lines[i][2] * lines[j][1] - lines[i][1] * lines[j][2]) / det;
      const double y = (lines[i][0] * lines[j][2] - lines[i][2] * lines[j][0]) / det;
      if (!feasible(x, y)) continue;
      const double cx = x <= 0.0 ? 0.0 : x;
      const double cy = y <= 0.0 ? 0.0 : y;
      if (std::none_of(pts.begin(), pts.end(), [&](const std::pair<double, double>& p) {
            return std::abs(p.first - cx) < 1e-7 && std::abs(p.second - cy) < 1e-7;
          }))
        pts.emplace_back(cx, cy);
    }

  if (pts.size() > 2) {
    double mx = 0.0, my = 0.0;
    for (const auto& p : pts) {
      mx += p.first;
      my += p.second;
    }
    mx /= double(pts.size());
    my /= double(pts.size());
    std::sort(pts.begin(), pts.end(),
              [&](const std::pair<double, double>& a, const std::pair<double, double>& b) {
                return std::atan2(a.second - my, a.first - mx) <
                       std::atan2(b.second - my, b.first - mx);
              });
  }
  return pts;
}

}  // namespace detail

// Achievable (Q_A, Q_B) polygon at fixed entanglement rates. Bounds are in
// bits; log(1−δ) is evaluated base 2 for consistency.
inline RateRegion rate_region(const ControlState& cs, double delta, double e_a, double e_b) {
  if (delta < 0.0 || delta >= 1.0)
    throw std::invalid_argument("rate_region: delta must lie in [0, 1)");
  const MultipartiteOperator omega_op = cs.omega.to_operator();
  auto h_cond_e = [&](const std::vector<std::string>& keep_code) {
    std::vector<std::string> keep = keep_code;
    keep.push_back(cs.e_name);
    return tilde_h2_cond(partial_trace(omega_op, keep), {cs.e_name}, delta).value;
  };
  auto h_plain = [&](const std::string& code) {
    return tilde_h2_cond(partial_trace(omega_op, {code}), {}, delta).value;
  };
  const double pen = std::log2(1.0 - delta);

  RateRegion region;
  region.constraints = {
      {"qa_minus_ea", 1.0, 0.0, h_cond_e({cs.a_keep}) + pen + e_a},
      {"qb_minus_eb", 0.0, 1.0, h_cond_e({cs.b_keep}) + pen + e_b},
      {"sum_minus_e", 1.0, 1.0, h_cond_e({cs.a_keep, cs.b_keep}) + 2.0 * pen + e_a + e_b},
      {"qa_plus_ea", 1.0, 0.0, h_plain(cs.a_keep) - e_a},
      {"qb_plus_eb", 0.0, 1.0, h_plain(cs.b_keep) - e_b},
  };
  region.vertices = detail::polygon_vertices(region.constraints);
  return region;
}

// Entanglement-generation rates (m, n): each bound shifts by log₂ ε, and
// the achieved error level is √(δ + 6ε).
inline RateRegion ent_gen_region(const ControlState& cs, double delta, double epsilon) {
  if (!(epsilon > 0.0) || epsilon > 1.0)
    throw std::invalid_argument("ent_gen_region: epsilon must lie in (0, 1]");
  const MultipartiteOperator omega_op = cs.omega.to_operator();
  auto h_cond_e = [&](const std::vector<std::string>& keep_code) {
    std::vector<std::string> keep = keep_code;
    keep.push_back(cs.e_name);
    return tilde_h2_cond(partial_trace(omega_op, keep), {cs.e_name}, delta).value;
  };
  const double pen = std::log2(epsilon);

  RateRegion region;
  region.constraints = {
      {"m", 1.0, 0.0, h_cond_e({cs.a_keep}) + pen},
      {"n", 0.0, 1.0, h_cond_e({cs.b_keep}) + pen},
      {"m_plus_n", 1.0, 1.0, h_cond_e({cs.a_keep, cs.b_keep}) + pen},
  };
  region.vertices = detail::polygon_vertices(region.constraints);
  region.error_level = std::sqrt(delta + 6.0 * epsilon);
  return region;
}

struct UhlmannResult {
  Matrix isometry;  // |Z| × |Y| partial isometry, V†V a projector
  double fidelity = 0.0;
};

// Best partial isometry V: Y → Z with ⟨ψ| (I_X ⊗ V) |φ⟩ maximal, where X is
// the set of systems the two states share by name. The achieved overlap is
// the nuclear norm of the reshaped cross-operator, which equals the
// fidelity of the X-marginals.
inline UhlmannResult uhlmann_isometry(const PureState& phi, const PureState& psi) {
  std::vector<std::string> shared, phi_rest, psi_rest;
  for (const auto& s : phi.systems()) {
    bool common = false;
    for (const auto& t : psi.systems())
      if (t.name == s.name) {
        if (t.dim != s.dim)
          throw std::invalid_argument("uhlmann_isometry: shared system '" + s.name +
                                      "' has mismatched dimensions");
        common = true;
      }
    (common ? shared : phi_rest).push_back(s.name);
  }
  for (const auto& t : psi.systems())
    if (std::none_of(shared.begin(), shared.end(),
                     [&](const std::string& n) { return n == t.name; }))
      psi_rest.push_back(t.name);

  auto reshape = [&](const PureState& s, const std::vector<std::string>& rest) {
    std::vector<std::string> order = shared;
    order.insert(order.end(), rest.begin(), rest.end());
    PureState p = permute_systems(s, order);
    long dr = 1;
    for (const auto& n : rest) dr *= s.system(n).dim;
    const long dx = p.amplitudes().size() / std::max(dr, 1L);
    return Matrix(Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic,
                                                 Eigen::RowMajor>>(p.amplitudes().data(), dx,
                                                                   dr));
  };
  const Matrix phi_hat = reshape(phi, phi_rest);
  const Matrix psi_hat = reshape(psi, psi_rest);

  // Conjugate-reshaped cross operator; its polar part attains the overlap.
  const Matrix m = psi_hat.transpose() * phi_hat.conjugate();  // |Z| × |Y|
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cutoff =
      double(std::max(m.rows(), m.cols())) * std::numeric_limits<double>::epsilon() *
      (sv.size() ? sv(0) : 0.0);
  long rank = 0;
  for (long i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++rank;
  Matrix v = svd.matrixU().leftCols(rank) * svd.matrixV().leftCols(rank).adjoint();
  return UhlmannResult{std::move(v), sv.head(rank).sum()};
}

// 𝒯^{ĀB̄→E}(ρ) = |A″B″| · N̄((O_A ⊗ O_B) ρ (O_A ⊗ O_B)†): the complementary
// channel composed with re-preparation through the control inputs, whose
// Choi state reproduces ω^{A″B″E}.
inline QuantumChannel encoding_channel(const ControlState& cs, const std::string& a_name,
                                       const std::string& b_name,
                                       const std::string& env_name) {
  auto bend = [](const PureState& pair) {
    // pair is [kept, input]; O(in, kept) = amplitude(kept·d_in + in).
    const int dk = pair.systems()[0].dim;
    const int di = pair.systems()[1].dim;
    Matrix o(di, dk);
    for (int a = 0; a < dk; ++a)
      for (int p = 0; p < di; ++p) o(p, a) = pair.amplitudes()(long(a) * di + p);
    return o;
  };
  const Matrix oa = bend(cs.omega_in);
  const Matrix ob = bend(cs.delta_in);
  const Matrix pre = Eigen::kroneckerProduct(oa, ob);
  const double scale =
      std::sqrt(double(cs.omega_in.systems()[0].dim) * cs.delta_in.systems()[0].dim);
  QuantumChannel comp = complementary(cs.channel, env_name);
  std::vector<Matrix> kraus;
  for (const auto& k : comp.kraus()) kraus.push_back(scale * k * pre);
  std::vector<SystemLabel> inputs{{a_name, cs.omega_in.systems()[0].dim},
                                  {b_name, cs.delta_in.systems()[0].dim}};
  return QuantumChannel(std::move(inputs), comp.output(), std::move(kraus));
}

struct EncodingCheck {
  double lhs_mean = 0.0;
  double lhs_stderr = 0.0;
  double delta1 = 0.0;
  bool pass = false;
};

namespace detail {

inline PureState embed_message(const PureState& s, int target_dim) {
  const int d = s.systems()[0].dim;
  if (d == target_dim) return s;
  if (d > target_dim)
    throw std::invalid_argument("embed_message: message dimension exceeds the code system");
  long dr = 1;
  for (std::size_t i = 1; i < s.systems().size(); ++i) dr *= s.systems()[i].dim;
  Vector out = Vector::Zero(long(target_dim) * dr);
  out.head(long(d) * dr) = s.amplitudes();
  std::vector<SystemLabel> systems = s.systems();
  systems[0].dim = target_dim;
  return PureState(std::move(systems), std::move(out));
}

}  // namespace detail

// Monte-Carlo check that random encodings decouple the environment from
// the references at the rate the ledger's δ₁ predicts.
inline EncodingCheck decoupling_check_for_encoding(const ControlState& cs, const PureState& psi,
                                                   const PureState& phi, double delta,
                                                   long samples, std::uint64_t seed) {
  const ErrorLedger led = error_ledger(cs, psi, phi, delta);
  PureState psi_e = detail::embed_message(psi, cs.omega_in.systems()[0].dim);
  PureState phi_e = detail::embed_message(phi, cs.delta_in.systems()[0].dim);
  PureState joint = tensor_product(psi_e, phi_e);

  std::string env = cs.e_name;
  while (joint.has_system(env)) env += "~";
  QuantumChannel t =
      encoding_channel(cs, psi_e.systems()[0].name, phi_e.systems()[0].name, env);

  DecouplingExperiment exp{t, joint.to_operator(), delta, samples, seed};
  auto [mean, stderr_] = lhs_estimate(exp);
  return EncodingCheck{mean, stderr_, led.delta1, mean <= led.delta1 + 3.0 * stderr_};
}

}  // namespace decoupler
