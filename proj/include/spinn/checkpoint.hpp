#pragma once

// JSON checkpoints for single nets and separable models.
// Net object: {"n_hidden", "n_out", "w1", "b1", "w2" (row-major), "b2",
// "frozen"}; nets with the double-sigmoid activation add "activation" and
// "act_shift". A separable model is {"rank", "n_axes", "bodies": [...]}.

#include "spinn/spinn_model.hpp"

#include <fstream>
#include <json.hpp>

namespace spinn {

using json = nlohmann::json;

inline json net_to_json(const ShallowNet& net) {
  json j;
  j["n_hidden"] = net.n_hidden;
  j["n_out"] = net.n_out;
  j["w1"] = net.w1;
  j["b1"] = net.b1;
  j["w2"] = net.w2;
  j["b2"] = net.b2;
  json frozen = json::array();
  if (net.frozen & TW1) frozen.push_back("W1");
  if (net.frozen & TB1) frozen.push_back("B1");
  if (net.frozen & TW2) frozen.push_back("W2");
  if (net.frozen & TB2) frozen.push_back("B2");
  j["frozen"] = frozen;
  if (net.activation == Activation::DoubleSigmoid) {
    j["activation"] = "double-sigmoid";
    j["act_shift"] = net.act_shift;
  }
  return j;
}

inline ShallowNet net_from_json(const json& j) {
  ShallowNet net;
  net.n_hidden = j.at("n_hidden").get<int>();
  net.n_out = j.at("n_out").get<int>();
  net.w1 = j.at("w1").get<std::vector<Real>>();
  net.b1 = j.at("b1").get<std::vector<Real>>();
  net.w2 = j.at("w2").get<std::vector<Real>>();
  net.b2 = j.at("b2").get<std::vector<Real>>();
  for (const auto& t : j.at("frozen")) {
    const std::string s = t.get<std::string>();
    if (s == "W1") net.frozen |= TW1;
    else if (s == "B1") net.frozen |= TB1;
    else if (s == "W2") net.frozen |= TW2;
    else if (s == "B2") net.frozen |= TB2;
    else throw std::invalid_argument("checkpoint: unknown frozen tensor " + s);
  }
  if (j.contains("activation")) {
    if (j["activation"] == "double-sigmoid") {
      net.activation = Activation::DoubleSigmoid;
      net.act_shift = j.at("act_shift").get<Real>();
    } else if (j["activation"] != "sigmoid") {
      throw std::invalid_argument("checkpoint: unknown activation");
    }
  }
  net.validate();
  return net;
}

inline json spinn_to_json(const SpinnModel& model) {
  json j;
  j["rank"] = model.rank;
  j["n_axes"] = model.n_axes();
  j["bodies"] = json::array();
  for (const ShallowNet& b : model.bodies) j["bodies"].push_back(net_to_json(b));
  return j;
}

inline SpinnModel spinn_from_json(const json& j) {
  SpinnModel m;
  m.rank = j.at("rank").get<int>();
  for (const auto& b : j.at("bodies")) m.bodies.push_back(net_from_json(b));
  if (m.n_axes() != j.at("n_axes").get<int>())
    throw std::invalid_argument("checkpoint: n_axes mismatch");
  m.validate();
  return m;
}

inline void save_json(const json& j, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << j.dump(2) << '\n';
}

inline json load_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  return json::parse(f);
}

} // namespace spinn
