#pragma once

#include "crisp/core.hpp"

#include <optional>

namespace crisp {

class LearningRate {
 public:
  /// Throws UsageError unless eta > 0 and finite.
  explicit LearningRate(double eta);

  double value() const { return eta_; }

 private:
  double eta_;
};

/// The size-aware online rate 20/N.
LearningRate online_learning_rate(int n);

/// Parameter increments for a Pathway, already scaled by -eta.
struct PathwayUpdate {
  Matrix weights;
  Vector bias;

  PathwayUpdate& operator*=(double s);
  PathwayUpdate& operator+=(const PathwayUpdate& other);
};

/// Parameter increments for an AutoEncoderPathway. `encode_bias` is empty when
/// the optional hidden bias rule is disabled.
struct AutoEncoderUpdate {
  Matrix weights;
  Vector decode_bias;
  Vector encode_bias;

  AutoEncoderUpdate& operator*=(double s);
  AutoEncoderUpdate& operator+=(const AutoEncoderUpdate& other);
};

/// Hebbian-descent for hetero-association, averaged over the columns:
///   dW_ij = -eta (x_i - mu_i)(h_j - t_j),   db_j = -eta (h_j - t_j)
/// with h the current forward output. Computes one forward pass.
PathwayUpdate hetero_delta(const Pathway& pathway, const Eigen::Ref<const Matrix>& inputs,
                           const Eigen::Ref<const Matrix>& targets, LearningRate eta);

/// Auto-associative Hebbian-descent, averaged over the columns:
///   dW_ij = -eta (h_j - lambda_j)(z_i - x_i),  dc_i = -eta (z_i - x_i),
///   db_j  = -eta (h_j - target_j)   (only when `update_encode_bias`).
/// The tied weight matrix receives this single combined increment.
AutoEncoderUpdate auto_delta(const AutoEncoderPathway& ae, const Eigen::Ref<const Matrix>& inputs,
                             LearningRate eta, bool update_encode_bias);

void apply(Pathway& pathway, const PathwayUpdate& update);
void apply(AutoEncoderPathway& ae, const AutoEncoderUpdate& update);

/// One online learning step on a single pattern pair, applied in place
/// immediately (one forward pass, one rank-1 weight increment).
void hetero_update(Pathway& pathway, const Eigen::Ref<const Vector>& input,
                   const Eigen::Ref<const Vector>& target, LearningRate eta);

void auto_update(AutoEncoderPathway& ae, const Eigen::Ref<const Vector>& input, LearningRate eta,
                 bool update_encode_bias);

/// Heavy-ball momentum: applied = mean_update + momentum * previous_applied.
template <typename Update>
class Momentum {
 public:
  explicit Momentum(double momentum);

  double coefficient() const { return momentum_; }
  /// Folds `update` into the running velocity and returns the step to apply.
  const Update& step(Update update);
  void reset() { velocity_.reset(); }

 private:
  double momentum_;
  std::optional<Update> velocity_;
};

extern template class Momentum<PathwayUpdate>;
extern template class Momentum<AutoEncoderUpdate>;

/// Mini-batch hetero step: the mean of the per-sample updates is applied once.
/// Columns of `inputs`/`targets` form the batch. Throws UsageError on an empty
/// batch. With a zero momentum coefficient the increment is accumulated
/// directly into the weights.
void minibatch_update(Pathway& pathway, const Eigen::Ref<const Matrix>& inputs,
                      const Eigen::Ref<const Matrix>& targets, LearningRate eta,
                      Momentum<PathwayUpdate>& momentum);

/// Mini-batch auto-associative step.
void minibatch_update(AutoEncoderPathway& ae, const Eigen::Ref<const Matrix>& inputs,
                      LearningRate eta, bool update_encode_bias,
                      Momentum<AutoEncoderUpdate>& momentum);

}  // namespace crisp
