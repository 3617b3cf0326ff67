// decoupler — command-line front end: experiment configs in, JSON reports
// (and CSV vertex files for region modes) out.
//
//   decoupler <mode> --config <path> [--seed N] [--samples N] [--out <dir>]
//
// Modes: twirl-check, decouple, rate-region, ent-gen, entropy.
// Exit codes: 0 success, 2 validation error, 3 numerical failure.

#include "decoupler/builtins.hpp"
#include "decoupler/decoupling.hpp"
#include "decoupler/entropy.hpp"
#include "decoupler/haar.hpp"
#include "decoupler/io.hpp"
#include "decoupler/qmac.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <string>
#include <vector>

namespace {

using decoupler::Json;

Json run_twirl_check(const Json& cfg, std::uint64_t seed, long samples) {
  const std::vector<int> dims = cfg.value("dims", std::vector<int>{2, 2});
  const int count = cfg.value("count", 5);
  if (count < 1) throw std::invalid_argument("twirl-check: 'count' must be >= 1");
  if (samples < 1) throw std::invalid_argument("twirl-check: 'samples' must be >= 1");
  long n = 1;
  for (int d : dims) {
    if (d < 2) throw std::invalid_argument("twirl-check: sender dims must be >= 2");
    n *= long(d) * d;
  }

  std::vector<decoupler::Matrix> ms;
  for (int l = 0; l < count; ++l) {
    decoupler::rng::GaussianStream g(
        decoupler::rng::derive_seed(seed ^ 0x5ca1ab1eULL, std::uint64_t(l)));
    decoupler::Matrix z(n, n);
    for (long c = 0; c < n; ++c)
      for (long r = 0; r < n; ++r) z(r, c) = decoupler::Complex(g.next(), g.next());
    ms.push_back(0.5 * (z + z.adjoint()));
  }
  auto mc = decoupler::monte_carlo_twirl_batch(ms, dims, int(samples), seed);

  Json report;
  report["mode"] = "twirl-check";
  report["dims"] = dims;
  report["samples"] = samples;
  report["seed"] = seed;
  report["matrices"] = Json::array();
  bool all_pass = true;
  for (int l = 0; l < count; ++l) {
    auto analytic = decoupler::twirl2_tensor(ms[l], dims);
    const double err = (mc[l] - analytic.reconstructed.matrix()).norm();
    const double tol = 6.0 * ms[l].norm() / std::sqrt(double(samples));
    const bool pass = err <= tol;
    all_pass = all_pass && pass;
    Json entry;
    entry["operand_norm"] = ms[l].norm();
    entry["mc_error"] = err;
    entry["tolerance"] = tol;
    entry["pass"] = pass;
    report["matrices"].push_back(std::move(entry));
  }
  report["all_pass"] = all_pass;
  return report;
}

Json run_decouple(const Json& cfg, std::uint64_t seed, long samples) {
  decoupler::DecouplingExperiment exp{decoupler::resolve_channel(cfg),
                                      decoupler::resolve_state(cfg),
                                      cfg.value("delta", 0.0), samples, seed};
  auto [mean, se] = decoupler::lhs_estimate(exp);
  auto tilde = decoupler::tilde_objects(exp);
  auto norms = decoupler::term_norms(exp, tilde);
  const std::size_t k = exp.channel.inputs().size();

  Json report;
  report["mode"] = "decouple";
  report["delta"] = exp.delta;
  report["samples"] = samples;
  report["seed"] = seed;
  report["lhs_mean"] = mean;
  report["lhs_stderr"] = se;
  if (k == 2) {
    report["rhs_thm1"] = decoupler::rhs_two_sender(exp, tilde, norms);
    report["rhs_cor1"] = decoupler::rhs_entropic(exp);
  } else {
    report["rhs_thm1"] = nullptr;
    report["rhs_cor1"] = nullptr;
  }
  auto ks = decoupler::rhs_k_sender(exp, tilde, norms);
  report["rhs_thm3"] = ks.one_norm;
  report["rhs_thm3_squared"] = ks.squared;
  Json per;
  for (std::uint64_t b = 0; b < (1ull << k); ++b) {
    std::string key;
    for (std::size_t i = 0; i < k; ++i) key += char('0' + ((b >> i) & 1));
    per["rho_" + key] = norms.rho_sq[b];
    per["omega_" + key] = norms.omega_sq[b];
  }
  report["per_term_norms"] = std::move(per);
  return report;
}

decoupler::ControlState control_from_config(const Json& cfg) {
  decoupler::QuantumChannel ch = decoupler::resolve_channel(cfg);
  if (ch.inputs().size() != 2)
    throw std::invalid_argument("rate-region: channel must have exactly two input systems");
  const auto& a = ch.inputs()[0];
  const auto& b = ch.inputs()[1];
  decoupler::PureState omega =
      decoupler::max_entangled({a.name + "\"", a.dim}, a);
  decoupler::PureState delta_in =
      decoupler::max_entangled({b.name + "\"", b.dim}, b);
  return decoupler::control_state(ch, omega, delta_in);
}

Json region_json(const decoupler::RateRegion& region) {
  Json j;
  j["constraints"] = Json::array();
  for (const auto& c : region.constraints) {
    Json e;
    e["label"] = c.label;
    e["coeff_qa"] = c.coeff_qa;
    e["coeff_qb"] = c.coeff_qb;
    e["bound"] = c.bound;
    j["constraints"].push_back(std::move(e));
  }
  j["vertices"] = Json::array();
  for (const auto& v : region.vertices) j["vertices"].push_back(Json::array({v.first, v.second}));
  return j;
}

Json run_rate_region(const Json& cfg, const std::string& out_dir) {
  auto cs = control_from_config(cfg);
  auto region = decoupler::rate_region(cs, cfg.value("delta", 0.0), cfg.value("e_a", 0.0),
                                       cfg.value("e_b", 0.0));
  decoupler::write_text(out_dir + "/region.csv", decoupler::vertices_csv(region.vertices));
  Json report = region_json(region);
  report["mode"] = "rate-region";
  return report;
}

Json run_ent_gen(const Json& cfg, const std::string& out_dir) {
  auto cs = control_from_config(cfg);
  auto region =
      decoupler::ent_gen_region(cs, cfg.value("delta", 0.0), cfg.value("epsilon", 1.0));
  decoupler::write_text(out_dir + "/region.csv", decoupler::vertices_csv(region.vertices));
  Json report = region_json(region);
  report["mode"] = "ent-gen";
  report["error_level"] = region.error_level;
  return report;
}

Json run_entropy(const Json& cfg) {
  decoupler::MultipartiteOperator rho = decoupler::resolve_state(cfg);
  std::vector<std::string> cond = cfg.value("cond", std::vector<std::string>{"R"});
  auto rep = decoupler::tilde_h2_cond(rho, cond, cfg.value("delta", 0.0));
  Json report;
  report["mode"] = "entropy";
  report["value"] = rep.value;
  report["delta"] = rep.delta;
  report["truncated_mass"] = rep.truncated_mass;
  report["support_rank"] = rep.support_rank;
  return report;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decoupler: one-shot decoupling and QMAC rate-region lab"};
  std::string mode, config_path, out_dir = ".";
  bool seed_set = false, samples_set = false;
  std::uint64_t seed_flag = 0;
  long samples_flag = 0;
  app.add_option("mode", mode, "one of twirl-check, decouple, rate-region, ent-gen, entropy")
      ->required();
  app.add_option("--config", config_path, "path to the JSON experiment config")->required();
  app.add_option("--seed", seed_flag, "override the config seed")->each([&](const std::string&) {
    seed_set = true;
  });
  app.add_option("--samples", samples_flag, "override the config sample count")
      ->each([&](const std::string&) { samples_set = true; });
  app.add_option("--out", out_dir, "output directory for report files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const Json cfg = decoupler::load_json(config_path);
    const std::uint64_t seed =
        seed_set ? seed_flag : cfg.value("seed", std::uint64_t(0));
    const long samples = samples_set ? samples_flag : cfg.value("samples", 1000L);

    Json report;
    if (mode == "twirl-check")
      report = run_twirl_check(cfg, seed, samples);
    else if (mode == "decouple")
      report = run_decouple(cfg, seed, samples);
    else if (mode == "rate-region")
      report = run_rate_region(cfg, out_dir);
    else if (mode == "ent-gen")
      report = run_ent_gen(cfg, out_dir);
    else if (mode == "entropy")
      report = run_entropy(cfg);
    else
      throw std::invalid_argument(
          "unknown mode '" + mode +
          "'; available: twirl-check decouple rate-region ent-gen entropy");

    decoupler::write_report(out_dir + "/report.json", report);
    std::cout << report.dump(2) << "\n";
  } catch (const Json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::logic_error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
