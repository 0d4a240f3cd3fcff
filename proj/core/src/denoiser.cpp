#include "tqlab/denoiser.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "tqlab/error.hpp"
#include "tqlab/rng.hpp"

namespace tq {

namespace {

struct LayerSpec {
  std::string name;  // parameter base, e.g. "block_0/fc1"
  std::int64_t fan_in;
  std::int64_t fan_out;
  bool has_bias;
  bool zero_init;
};

std::vector<LayerSpec> layer_specs(const DenoiserConfig& c) {
  std::vector<LayerSpec> specs;
  specs.push_back({"time_embed/fc1", c.time_embed_dim, c.hidden, true, false});
  specs.push_back({"time_embed/fc2", c.hidden, c.hidden, true, false});
  for (int i = 0; i < c.blocks; ++i)
    specs.push_back({DenoiserGraph::embed_base(i) + "/linear", c.hidden, c.hidden, true, false});
  for (int i = 0; i < c.blocks; ++i) {
    const std::int64_t in = i == 0 ? c.data_dim : c.hidden;
    const std::string b = DenoiserGraph::block_base(i);
    specs.push_back({b + "/in_proj", in, c.hidden, true, false});
    specs.push_back({b + "/fc1", c.hidden, c.hidden, true, false});
    specs.push_back({b + "/fc2", c.hidden, c.hidden, true, false});
  }
  specs.push_back({"block_0/skip", c.data_dim, c.hidden, false, false});
  specs.push_back({"head", c.hidden, c.data_dim, true, true});
  return specs;
}

}  // namespace

DenoiserGraph::DenoiserGraph(DenoiserConfig cfg, std::uint64_t seed) : cfg_(cfg) {
  if (cfg.timesteps < 2 || cfg.blocks < 1 || cfg.hidden < 1 || cfg.time_embed_dim < 2 ||
      cfg.time_embed_dim % 2 != 0 || cfg.data_dim < 1)
    throw ConfigError("DenoiserGraph: invalid architecture constants");
  init_params(seed);
}

DenoiserGraph::DenoiserGraph(DenoiserConfig cfg, std::map<std::string, Tensor> params)
    : cfg_(cfg), params_(std::move(params)) {}

void DenoiserGraph::init_params(std::uint64_t seed) {
  for (const auto& spec : layer_specs(cfg_)) {
    Rng rng(derive_seed(seed, spec.name));
    Tensor w = Tensor::zeros({spec.fan_in, spec.fan_out});
    if (!spec.zero_init) {
      const double sd = 1.0 / std::sqrt(static_cast<double>(spec.fan_in));
      for (double& v : w.data) v = sd * rng.normal();
    }
    params_[spec.name + "/weight"] = std::move(w);
    if (spec.has_bias) params_[spec.name + "/bias"] = Tensor::zeros({spec.fan_out});
  }
}

const Tensor& DenoiserGraph::param(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ContractError("unknown parameter: " + name);
  return it->second;
}

Tensor DenoiserGraph::sinusoidal_encoding(int t) const {
  const int half = cfg_.time_embed_dim / 2;
  Tensor enc = Tensor::zeros({1, cfg_.time_embed_dim});
  for (int k = 0; k < half; ++k) {
    const double freq = std::exp(-std::log(10000.0) * static_cast<double>(k) /
                                 static_cast<double>(half));
    enc.data[static_cast<std::size_t>(k)] = std::cos(static_cast<double>(t) * freq);
    enc.data[static_cast<std::size_t>(half + k)] = std::sin(static_cast<double>(t) * freq);
  }
  return enc;
}

std::vector<std::string> DenoiserGraph::tib_weight_sites() const {
  std::vector<std::string> sites = {"time_embed/fc1/weight", "time_embed/fc2/weight"};
  for (int i = 0; i < cfg_.blocks; ++i) sites.push_back(embed_base(i) + "/linear/weight");
  return sites;
}

std::vector<std::string> DenoiserGraph::weight_sites() const {
  std::vector<std::string> sites = tib_weight_sites();
  for (int i = 0; i < cfg_.blocks; ++i) {
    const std::string b = block_base(i);
    sites.push_back(b + "/in_proj/weight");
    sites.push_back(b + "/fc1/weight");
    sites.push_back(b + "/fc2/weight");
  }
  sites.push_back("block_0/skip/weight");
  sites.push_back("head/weight");
  return sites;
}

std::vector<std::string> DenoiserGraph::tib_activation_sites() const {
  std::vector<std::string> sites = {"time_embed/enc", "time_embed/fc1/out",
                                    "time_embed/fc1/act", "time_embed/fc2/out"};
  for (int i = 0; i < cfg_.blocks; ++i) {
    sites.push_back(embed_base(i) + "/act");
    sites.push_back(embed_base(i) + "/out");
  }
  return sites;
}

std::vector<std::string> DenoiserGraph::activation_sites() const {
  std::vector<std::string> sites = tib_activation_sites();
  for (int i = 0; i < cfg_.blocks; ++i) {
    const std::string b = block_base(i);
    sites.push_back(b + "/in_proj/out");
    sites.push_back(b + "/inject");
    sites.push_back(b + "/fc1/out");
    sites.push_back(b + "/fc1/act");
    sites.push_back(b + "/fc2/out");
    sites.push_back(b + "/out");
  }
  sites.push_back("block_0/skip/out");
  sites.push_back("head/out");
  return sites;
}

namespace {

void write_le_doubles(std::ofstream& os, const std::vector<double>& values) {
  for (double v : values) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(bytes), 8);
  }
}

void read_le_doubles(std::ifstream& is, std::vector<double>& values) {
  for (double& v : values) {
    unsigned char bytes[8];
    is.read(reinterpret_cast<char*>(bytes), 8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    std::memcpy(&v, &bits, sizeof v);
  }
}

}  // namespace

void save_checkpoint(const DenoiserGraph& model, const std::string& prefix) {
  nlohmann::json manifest;
  manifest["config"] = {{"timesteps", model.config().timesteps},
                        {"blocks", model.config().blocks},
                        {"hidden", model.config().hidden},
                        {"time_embed_dim", model.config().time_embed_dim},
                        {"data_dim", model.config().data_dim}};
  nlohmann::json plist = nlohmann::json::array();
  std::int64_t offset = 0;
  for (const auto& [name, t] : model.params()) {
    plist.push_back({{"name", name}, {"shape", t.shape}, {"offset", offset}});
    offset += t.numel() * 8;
  }
  manifest["params"] = std::move(plist);
  manifest["dtype"] = "float64-le";

  std::ofstream mos(prefix + ".json");
  if (!mos) throw IoError("cannot write " + prefix + ".json");
  mos << manifest.dump(2) << "\n";

  std::ofstream bos(prefix + ".bin", std::ios::binary);
  if (!bos) throw IoError("cannot write " + prefix + ".bin");
  for (const auto& [name, t] : model.params()) write_le_doubles(bos, t.data);
}

DenoiserGraph load_checkpoint(const std::string& prefix) {
  std::ifstream mis(prefix + ".json");
  if (!mis) throw IoError("cannot read " + prefix + ".json");
  nlohmann::json manifest;
  try {
    mis >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(prefix + ".json: " + e.what());
  }
  DenoiserConfig cfg;
  const auto& cj = manifest.at("config");
  cfg.timesteps = cj.at("timesteps").get<int>();
  cfg.blocks = cj.at("blocks").get<int>();
  cfg.hidden = cj.at("hidden").get<int>();
  cfg.time_embed_dim = cj.at("time_embed_dim").get<int>();
  cfg.data_dim = cj.at("data_dim").get<int>();

  std::ifstream bis(prefix + ".bin", std::ios::binary);
  if (!bis) throw IoError("cannot read " + prefix + ".bin");

  std::map<std::string, Tensor> params;
  for (const auto& pj : manifest.at("params")) {
    const auto name = pj.at("name").get<std::string>();
    const auto shape = pj.at("shape").get<std::vector<std::int64_t>>();
    const auto offset = pj.at("offset").get<std::int64_t>();
    bis.seekg(offset);
    Tensor t = Tensor::zeros(shape);
    read_le_doubles(bis, t.data);
    if (!bis) throw IoError("truncated checkpoint blob: " + prefix + ".bin");
    params[name] = std::move(t);
  }
  return DenoiserGraph(cfg, std::move(params));
}

}  // namespace tq
