#include "crisp/pretrain.hpp"

#include "crisp/data.hpp"
#include "crisp/errors.hpp"
#include "crisp/plasticity.hpp"
#include "crisp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace crisp {

void init_gaussian(Matrix& weights, double std, std::uint64_t seed) {
  if (std < 0.0) throw ConfigError("initial weight std must be non-negative");
  Rng rng(seed);
  for (Index j = 0; j < weights.cols(); ++j) {
    for (Index i = 0; i < weights.rows(); ++i) weights(i, j) = std * rng.normal();
  }
}

std::string_view to_string(Ca3Noise noise) {
  return noise == Ca3Noise::Uniform ? "uniform" : "balanced";
}

Ca3Noise ca3_noise_from_string(std::string_view name) {
  if (name == "uniform") return Ca3Noise::Uniform;
  if (name == "balanced") return Ca3Noise::Balanced;
  throw ConfigError("unknown CA3 noise model '" + std::string(name) + "'");
}

Ca3Scaffold pretrain_ca3(const Ca3PretrainConfig& config, std::uint64_t seed) {
  if (config.dim <= 0 || config.length < 2) throw ConfigError("CA3 pre-training: invalid size");
  if (config.epochs < 0 || config.batch_size <= 0) {
    throw ConfigError("CA3 pre-training: epochs must be >= 0 and batch size > 0");
  }
  Ca3Scaffold out;
  const Dataset chain =
      gen_rand(config.length, config.dim, config.activity, derive_seed(seed, "ca3.sequence"));
  out.sequence.patterns = chain.patterns;
  out.sequence.activity = config.activity;

  out.recurrent = Pathway(config.dim, config.dim, config.activity, Activation::Sigmoid);
  init_gaussian(out.recurrent.weights, config.init_std, derive_seed(seed, "ca3.init"));

  const Index length = config.length;
  Matrix targets(config.dim, length);
  for (Index t = 0; t < length; ++t) targets.col(t) = out.sequence.pattern(out.sequence.successor(t));

  const LearningRate eta(config.learning_rate);
  Momentum<PathwayUpdate> momentum(0.0);
  Rng noise(derive_seed(seed, "ca3.noise"));
  const Index active = active_count(config.activity, config.dim);
  const Index flips = static_cast<Index>(std::llround(
      config.input_noise *
      static_cast<double>(config.noise == Ca3Noise::Uniform ? config.dim : active)));
  if (config.noise == Ca3Noise::Balanced && flips > config.dim - active) {
    throw ConfigError("CA3 pre-training: not enough inactive units for balanced noise");
  }
  std::vector<Index> on, off;
  Matrix inputs(config.dim, length);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    inputs = out.sequence.patterns;
    for (Index t = 0; t < length; ++t) {
      if (config.noise == Ca3Noise::Uniform) {
        for (const auto idx : noise.sample_without_replacement(config.dim, flips)) {
          inputs(idx, t) = 1.0 - inputs(idx, t);
        }
        continue;
      }
      on.clear();
      off.clear();
      for (Index i = 0; i < config.dim; ++i) (inputs(i, t) > 0.5 ? on : off).push_back(i);
      for (const auto j : noise.sample_without_replacement(static_cast<Index>(on.size()), flips)) {
        inputs(on[static_cast<std::size_t>(j)], t) = 0.0;
      }
      for (const auto j : noise.sample_without_replacement(static_cast<Index>(off.size()), flips)) {
        inputs(off[static_cast<std::size_t>(j)], t) = 1.0;
      }
    }
    for (Index start = 0; start < length; start += config.batch_size) {
      const Index n = std::min(config.batch_size, length - start);
      minibatch_update(out.recurrent, inputs.middleCols(start, n), targets.middleCols(start, n),
                       eta, momentum);
    }
  }
  return out;
}

AutoEncoderPathway pretrain_dg(const DgPretrainConfig& config, std::uint64_t seed) {
  if (config.ec_dim <= 0 || config.dg_dim <= 0 || config.patterns <= 0 ||
      config.batch_size <= 0 || config.epochs < 0) {
    throw ConfigError("DG pre-training: invalid configuration");
  }
  AutoEncoderPathway ae(config.ec_dim, config.dg_dim, config.ec_activity, config.dg_activity,
                        config.dg_activity, Activation::Sigmoid, Activation::Sigmoid);
  init_gaussian(ae.weights, config.init_std, derive_seed(seed, "dg.init"));
  const Dataset train =
      gen_rand(config.patterns, config.ec_dim, config.ec_activity, derive_seed(seed, "dg.data"));

  const LearningRate eta(config.learning_rate);
  Momentum<AutoEncoderUpdate> momentum(0.0);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (Index start = 0; start < train.size(); start += config.batch_size) {
      const Index n = std::min(config.batch_size, train.size() - start);
      minibatch_update(ae, train.patterns.middleCols(start, n), eta, true, momentum);
    }
  }
  return ae;
}

AutoEncoderPathway pretrain_si_codec(const Matrix& data, const SiCodecConfig& config,
                                     std::uint64_t seed) {
  if (data.cols() == 0 || config.ec_dim <= 0 || config.batch_size <= 0 || config.epochs < 0) {
    throw ConfigError("SI codec pre-training: invalid configuration");
  }
  AutoEncoderPathway ae(data.rows(), config.ec_dim, 0.0, config.ec_activity, config.ec_activity,
                        Activation::Step, Activation::Sigmoid);
  ae.visible_offsets = data.rowwise().mean();
  init_gaussian(ae.weights, config.init_std, derive_seed(seed, "si.init"));

  const LearningRate eta(config.learning_rate);
  Momentum<AutoEncoderUpdate> momentum(config.momentum);
  Rng order_rng(derive_seed(seed, "si.order"));
  std::vector<Index> order(static_cast<std::size_t>(data.cols()));
  std::iota(order.begin(), order.end(), Index{0});
  Matrix batch(data.rows(), config.batch_size);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    order_rng.shuffle(order.begin(), order.end());
    for (Index start = 0; start < data.cols(); start += config.batch_size) {
      const Index n = std::min(config.batch_size, data.cols() - start);
      batch.resize(data.rows(), n);
      for (Index k = 0; k < n; ++k) batch.col(k) = data.col(order[static_cast<std::size_t>(start + k)]);
      minibatch_update(ae, batch, eta, true, momentum);
    }
  }
  return ae;
}

}  // namespace crisp
