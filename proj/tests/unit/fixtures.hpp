#pragma once

#include "crisp/data.hpp"
#include "crisp/model.hpp"
#include "crisp/pretrain.hpp"
#include "crisp/rng.hpp"

#include <filesystem>
#include <string>

namespace fixtures {

using namespace crisp;

inline ModelConfig config(int n, Variant variant = Variant::ModelA) {
  ModelConfig mc;
  mc.n = n;
  mc.variant = variant;
  return mc;
}

inline Ca3PretrainConfig ca3_config(const ModelConfig& mc) {
  Ca3PretrainConfig c;
  c.dim = mc.ca3_dim();
  c.length = mc.cycle_length();
  c.activity = mc.ca3_activity;
  return c;
}

inline DgPretrainConfig dg_config(const ModelConfig& mc) {
  DgPretrainConfig c;
  c.ec_dim = mc.ec_dim();
  c.dg_dim = mc.dg_dim();
  c.ec_activity = mc.ec_activity;
  c.dg_activity = mc.dg_activity;
  return c;
}

// Pre-training is the slow part, so the N = 200 scaffolding is shared.
inline const Ca3Scaffold& scaffold200() {
  static const Ca3Scaffold s = pretrain_ca3(ca3_config(config(200)), 11);
  return s;
}

inline const AutoEncoderPathway& dentate200() {
  static const AutoEncoderPathway d = pretrain_dg(dg_config(config(200)), 12);
  return d;
}

inline HippocampusModel model200(Variant variant = Variant::ModelA, std::uint64_t seed = 13) {
  std::optional<AutoEncoderPathway> dg;
  if (variant == Variant::ModelB) dg = dentate200();
  return HippocampusModel(config(200, variant), scaffold200(), dg, std::nullopt, seed);
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("crisp-test-" + tag + "-" + std::to_string(Rng(std::hash<std::string>{}(tag)).next()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

}  // namespace fixtures
