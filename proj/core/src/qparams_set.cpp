#include "tqlab/qparams_set.hpp"

#include <fstream>

#include <json.hpp>

#include "tqlab/error.hpp"

namespace tq {

namespace {

using nlohmann::json;

json params_to_json(const QuantParams& p) {
  json j;
  if (p.granularity == Granularity::kPerTensor) {
    j["s"] = p.scale[0];
    j["z"] = p.zero[0];
  } else {
    j["s"] = p.scale;
    j["z"] = p.zero;
    j["axis"] = p.axis;
  }
  j["b"] = p.bits;
  j["granularity"] =
      p.granularity == Granularity::kPerTensor ? "per-tensor" : "per-channel";
  return j;
}

QuantParams params_from_json(const json& j) {
  QuantParams p;
  p.bits = j.at("b").get<int>();
  const std::string g = j.at("granularity").get<std::string>();
  if (g == "per-tensor") {
    p.granularity = Granularity::kPerTensor;
    p.scale = {j.at("s").get<double>()};
    p.zero = {j.at("z").get<std::int32_t>()};
  } else if (g == "per-channel") {
    p.granularity = Granularity::kPerChannel;
    p.scale = j.at("s").get<std::vector<double>>();
    p.zero = j.at("z").get<std::vector<std::int32_t>>();
    p.axis = j.at("axis").get<int>();
  } else {
    throw IoError("unknown granularity: " + g);
  }
  p.validate();
  return p;
}

}  // namespace

void QuantParamSet::validate(int timesteps) const {
  for (const auto& [site, p] : weights) {
    try {
      p.validate();
    } catch (const std::exception& e) {
      throw ContractError("weight site " + site + ": " + e.what());
    }
  }
  for (const auto& [site, a] : activations) {
    if (a.table.empty())
      throw ContractError("activation site " + site + ": empty table");
    if (a.table.size() != 1 && a.table.size() != static_cast<std::size_t>(timesteps))
      throw ContractError("activation site " + site + ": per-timestep table has " +
                          std::to_string(a.table.size()) + " entries, expected " +
                          std::to_string(timesteps));
    for (const auto& p : a.table) p.validate();
  }
}

void save_qparams(const QuantParamSet& qset, const std::string& path) {
  json j;
  j["weights"] = json::object();
  for (const auto& [site, p] : qset.weights) j["weights"][site] = params_to_json(p);
  j["activations"] = json::object();
  for (const auto& [site, a] : qset.activations) {
    if (a.table.size() == 1) {
      j["activations"][site] = params_to_json(a.table[0]);
    } else {
      json arr = json::array();
      for (const auto& p : a.table) arr.push_back(params_to_json(p));
      j["activations"][site] = std::move(arr);
    }
  }
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  os << j.dump(2) << "\n";
}

QuantParamSet load_qparams(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read " + path);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  QuantParamSet qset;
  for (const auto& [site, pj] : j.at("weights").items())
    qset.weights[site] = params_from_json(pj);
  for (const auto& [site, aj] : j.at("activations").items()) {
    ActQuant a;
    if (aj.is_array()) {
      for (const auto& pj : aj) a.table.push_back(params_from_json(pj));
    } else {
      a.table.push_back(params_from_json(aj));
    }
    qset.activations[site] = std::move(a);
  }
  return qset;
}

}  // namespace tq
