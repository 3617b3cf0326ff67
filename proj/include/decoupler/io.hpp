// io.hpp — JSON (de)serialization for channels, states, experiment
// configs, and reports, plus the CSV vertex writer. Reports use insertion-
// ordered objects and shortest round-trip float printing so identical
// inputs produce byte-identical files.

#pragma once

#include "decoupler/builtins.hpp"
#include "decoupler/channel.hpp"
#include "decoupler/operators.hpp"

#include <json.hpp>

#include <fstream>
#include <string>
#include <vector>

namespace decoupler {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Channel: {inputs:[dims], output:dim, kraus:[[ [re,im], ... row-major ]]}

inline Json channel_to_json(const QuantumChannel& ch) {
  Json j;
  j["inputs"] = Json::array();
  for (const auto& s : ch.inputs()) j["inputs"].push_back(s.dim);
  j["output"] = ch.output().dim;
  j["kraus"] = Json::array();
  for (const auto& k : ch.kraus()) {
    Json flat = Json::array();
    for (long r = 0; r < k.rows(); ++r)
      for (long c = 0; c < k.cols(); ++c)
        flat.push_back(Json::array({k(r, c).real(), k(r, c).imag()}));
    j["kraus"].push_back(std::move(flat));
  }
  return j;
}

inline QuantumChannel channel_from_json(const Json& j) {
  if (!j.contains("inputs") || !j.contains("output") || !j.contains("kraus"))
    throw std::invalid_argument("channel: fields 'inputs', 'output', 'kraus' are required");
  std::vector<int> dims = j.at("inputs").get<std::vector<int>>();
  auto inputs = detail::sender_labels(dims);
  const int dout = j.at("output").get<int>();
  const long din = detail::total_dim(inputs);
  std::vector<Matrix> kraus;
  for (const auto& flat : j.at("kraus")) {
    if (long(flat.size()) != long(dout) * din)
      throw std::invalid_argument("channel: kraus entry count must be output*input dims");
    Matrix k(dout, din);
    long idx = 0;
    for (long r = 0; r < dout; ++r)
      for (long c = 0; c < din; ++c) {
        const auto& p = flat.at(idx++);
        k(r, c) = Complex(p.at(0).get<double>(), p.at(1).get<double>());
      }
    kraus.push_back(std::move(k));
  }
  return QuantumChannel(std::move(inputs), {"E", dout}, std::move(kraus));
}

// ---------------------------------------------------------------------------
// State: {dims:[...], ref:dim, entries:[[re,im], ... row-major]} — dims are
// the sender dims, ref the reference dimension appended as system R.

inline Json state_to_json(const MultipartiteOperator& rho) {
  Json j;
  j["dims"] = Json::array();
  for (std::size_t i = 0; i + 1 < rho.systems().size(); ++i)
    j["dims"].push_back(rho.systems()[i].dim);
  j["ref"] = rho.systems().back().dim;
  j["entries"] = Json::array();
  const Matrix& m = rho.matrix();
  for (long r = 0; r < m.rows(); ++r)
    for (long c = 0; c < m.cols(); ++c)
      j["entries"].push_back(Json::array({m(r, c).real(), m(r, c).imag()}));
  return j;
}

inline MultipartiteOperator state_from_json(const Json& j) {
  if (!j.contains("dims") || !j.contains("entries"))
    throw std::invalid_argument("state: fields 'dims' and 'entries' are required");
  std::vector<int> dims = j.at("dims").get<std::vector<int>>();
  std::vector<SystemLabel> systems = detail::sender_labels(dims);
  systems.push_back({"R", j.value("ref", 1)});
  const long d = detail::total_dim(systems);
  if (long(j.at("entries").size()) != d * d)
    throw std::invalid_argument("state: entry count must equal the squared total dimension");
  Matrix m(d, d);
  long idx = 0;
  for (long r = 0; r < d; ++r)
    for (long c = 0; c < d; ++c) {
      const auto& p = j.at("entries").at(idx++);
      m(r, c) = Complex(p.at(0).get<double>(), p.at(1).get<double>());
    }
  return MultipartiteOperator(std::move(systems), std::move(m));
}

// ---------------------------------------------------------------------------
// Config-level resolution: a channel/state field may be a JSON object or a
// builtin name string (with sibling fields dims / ref / output / seed).

inline QuantumChannel resolve_channel(const Json& config) {
  const Json& spec = config.at("channel");
  if (spec.is_object()) return channel_from_json(spec);
  if (!spec.is_string())
    throw std::invalid_argument("channel: expected an object or a builtin name");
  std::vector<int> dims = config.value("dims", std::vector<int>{2, 2});
  return builtin_channel(spec.get<std::string>(), dims, config.value("output", 0),
                         config.value("channel_seed", std::uint64_t(0)));
}

inline MultipartiteOperator resolve_state(const Json& config) {
  const Json& spec = config.at("state");
  if (spec.is_object()) return state_from_json(spec);
  if (!spec.is_string())
    throw std::invalid_argument("state: expected an object or a builtin name");
  std::vector<int> dims = config.value("dims", std::vector<int>{2, 2});
  return builtin_state(spec.get<std::string>(), dims, config.value("ref", 0),
                       config.value("state_seed", std::uint64_t(0)));
}

// ---------------------------------------------------------------------------
// File helpers

inline Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  Json j;
  in >> j;
  return j;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write '" + path + "'");
  out << text;
}

inline void write_report(const std::string& path, const Json& report) {
  write_text(path, report.dump(2) + "\n");
}

inline std::string vertices_csv(const std::vector<std::pair<double, double>>& vertices) {
  Json num;  // reuse the JSON float printer for shortest round-trip decimals
  std::string out = "Q_A,Q_B\n";
  for (const auto& v : vertices) {
    num = v.first;
    out += num.dump();
    out += ",";
    num = v.second;
    out += num.dump();
    out += "\n";
  }
  return out;
}

}  // namespace decoupler
