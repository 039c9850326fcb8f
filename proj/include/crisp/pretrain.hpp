#pragma once

#include "crisp/core.hpp"

#include <cstdint>
#include <string_view>

namespace crisp {

/// Cyclic chain of binary CA3 patterns; the successor of the last index is 0.
struct IntrinsicSequence {
  Matrix patterns;  // dim x length
  double activity = 0.2;

  Index dim() const { return patterns.rows(); }
  Index length() const { return patterns.cols(); }
  Index successor(Index i) const { return (i + 1) % length(); }
  /// Position reached after `steps` transitions from index i.
  Index advance(Index i, Index steps) const { return (i + steps) % length(); }
  auto pattern(Index i) const { return patterns.col(i); }
};

/// How the CA3 training inputs are corrupted in every epoch. Uniform flips
/// round(input_noise * dim) random bits. Balanced switches off
/// round(input_noise * active) active bits and switches on as many inactive
/// ones, so the noisy input keeps the pattern activity.
enum class Ca3Noise : std::uint8_t { Uniform = 0, Balanced = 1 };

std::string_view to_string(Ca3Noise noise);
Ca3Noise ca3_noise_from_string(std::string_view name);

struct Ca3PretrainConfig {
  Index dim = 500;
  Index length = 200;
  double activity = 0.2;
  int epochs = 100;
  Index batch_size = 10;
  double learning_rate = 1.0;
  double input_noise = 0.1;
  Ca3Noise noise = Ca3Noise::Balanced;
  double init_std = 0.01;
};

struct Ca3Scaffold {
  Pathway recurrent;
  IntrinsicSequence sequence;
};

/// Samples the intrinsic sequence and trains the recurrent pathway to map
/// each pattern (with fresh input bit flips every epoch) to its successor.
Ca3Scaffold pretrain_ca3(const Ca3PretrainConfig& config, std::uint64_t seed);

struct DgPretrainConfig {
  Index ec_dim = 220;
  Index dg_dim = 2400;
  double ec_activity = 0.35;
  double dg_activity = 0.03;
  Index patterns = 4000;
  int epochs = 1;
  Index batch_size = 10;
  double learning_rate = 100.0;
  double init_std = 0.01;
};

/// Tied-weight sparse auto encoder on random EC patterns; only the encoder
/// half (EC -> DG) is used by Model-B.
AutoEncoderPathway pretrain_dg(const DgPretrainConfig& config, std::uint64_t seed);

struct SiCodecConfig {
  Index ec_dim = 220;
  double ec_activity = 0.35;
  Index batch_size = 100;
  double learning_rate = 0.01;
  double momentum = 0.9;
  int epochs = 10;
  double init_std = 0.01;
};

/// Auto encoder SI -> EC with a Step encoder (binary EC codes) and a Sigmoid
/// decoder used to visualize EC patterns in the input domain. `data` holds one
/// sample per column; visible offsets are set to its mean.
AutoEncoderPathway pretrain_si_codec(const Matrix& data, const SiCodecConfig& config,
                                     std::uint64_t seed);

/// I.i.d. N(0, std^2) weights from a seeded stream.
void init_gaussian(Matrix& weights, double std, std::uint64_t seed);

}  // namespace crisp
