#include "crisp/plasticity.hpp"

#include "crisp/errors.hpp"

#include <cmath>
#include <string>

namespace crisp {

LearningRate::LearningRate(double eta) : eta_(eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw UsageError("learning rate must be positive and finite, got " + std::to_string(eta));
  }
}

LearningRate online_learning_rate(int n) {
  if (n < 1) throw UsageError("network size must be at least 1");
  return LearningRate(20.0 / static_cast<double>(n));
}

PathwayUpdate& PathwayUpdate::operator*=(double s) {
  weights *= s;
  bias *= s;
  return *this;
}

PathwayUpdate& PathwayUpdate::operator+=(const PathwayUpdate& other) {
  weights += other.weights;
  bias += other.bias;
  return *this;
}

AutoEncoderUpdate& AutoEncoderUpdate::operator*=(double s) {
  weights *= s;
  decode_bias *= s;
  encode_bias *= s;
  return *this;
}

AutoEncoderUpdate& AutoEncoderUpdate::operator+=(const AutoEncoderUpdate& other) {
  weights += other.weights;
  decode_bias += other.decode_bias;
  if (encode_bias.size() == other.encode_bias.size()) {
    encode_bias += other.encode_bias;
  } else if (encode_bias.size() == 0) {
    encode_bias = other.encode_bias;
  }
  return *this;
}

PathwayUpdate hetero_delta(const Pathway& pathway, const Eigen::Ref<const Matrix>& inputs,
                           const Eigen::Ref<const Matrix>& targets, LearningRate eta) {
  if (inputs.cols() == 0) throw UsageError("hetero update needs at least one sample");
  if (targets.rows() != pathway.output_dim() || targets.cols() != inputs.cols()) {
    throw ConfigError("hetero update: target shape " + std::to_string(targets.rows()) + "x" +
                      std::to_string(targets.cols()) + " does not match output dimension " +
                      std::to_string(pathway.output_dim()));
  }
  const Matrix output = forward_batch(pathway, inputs);
  const Matrix error = output - targets;
  const Matrix centered = inputs.colwise() - pathway.offsets;
  const double scale = -eta.value() / static_cast<double>(inputs.cols());
  PathwayUpdate update;
  update.weights.noalias() = scale * (centered * error.transpose());
  update.bias = scale * error.rowwise().sum();
  return update;
}

AutoEncoderUpdate auto_delta(const AutoEncoderPathway& ae, const Eigen::Ref<const Matrix>& inputs,
                             LearningRate eta, bool update_encode_bias) {
  if (inputs.cols() == 0) throw UsageError("auto update needs at least one sample");
  const Matrix hidden = encode_batch(ae, inputs);
  const Matrix reconstruction = decode_batch(ae, hidden);
  const Matrix error = reconstruction - inputs;
  const Matrix centered_hidden = hidden.colwise() - ae.hidden_offsets;
  const double scale = -eta.value() / static_cast<double>(inputs.cols());
  AutoEncoderUpdate update;
  update.weights.noalias() = scale * (error * centered_hidden.transpose());
  update.decode_bias = scale * error.rowwise().sum();
  if (update_encode_bias) {
    update.encode_bias =
        scale * (hidden.colwise() - ae.target_hidden_activity).rowwise().sum();
  }
  return update;
}

void apply(Pathway& pathway, const PathwayUpdate& update) {
  pathway.weights += update.weights;
  pathway.bias += update.bias;
  ++pathway.update_count;
}

void apply(AutoEncoderPathway& ae, const AutoEncoderUpdate& update) {
  ae.weights += update.weights;
  ae.decode_bias += update.decode_bias;
  if (update.encode_bias.size() != 0) ae.encode_bias += update.encode_bias;
  ++ae.update_count;
}

namespace {

// In-place hetero step: W += scale * (X - mu)(H - T)^T, b += scale * sum(H - T).
void accumulate_hetero(Pathway& pathway, const Eigen::Ref<const Matrix>& inputs,
                       const Eigen::Ref<const Matrix>& targets, LearningRate eta) {
  if (inputs.cols() == 0) throw UsageError("mini-batch must not be empty");
  if (targets.rows() != pathway.output_dim() || targets.cols() != inputs.cols()) {
    throw ConfigError("hetero update: target shape does not match output dimension " +
                      std::to_string(pathway.output_dim()));
  }
  const Matrix error = forward_batch(pathway, inputs) - targets;
  const Matrix centered = inputs.colwise() - pathway.offsets;
  const double scale = -eta.value() / static_cast<double>(inputs.cols());
  pathway.weights.noalias() += scale * (centered * error.transpose());
  pathway.bias += scale * error.rowwise().sum();
  ++pathway.update_count;
}

void accumulate_auto(AutoEncoderPathway& ae, const Eigen::Ref<const Matrix>& inputs,
                     LearningRate eta, bool update_encode_bias) {
  if (inputs.cols() == 0) throw UsageError("mini-batch must not be empty");
  const Matrix hidden = encode_batch(ae, inputs);
  const Matrix error = decode_batch(ae, hidden) - inputs;
  const Matrix centered_hidden = hidden.colwise() - ae.hidden_offsets;
  const double scale = -eta.value() / static_cast<double>(inputs.cols());
  ae.weights.noalias() += scale * (error * centered_hidden.transpose());
  ae.decode_bias += scale * error.rowwise().sum();
  if (update_encode_bias) {
    ae.encode_bias += scale * (hidden.colwise() - ae.target_hidden_activity).rowwise().sum();
  }
  ++ae.update_count;
}

}  // namespace

void hetero_update(Pathway& pathway, const Eigen::Ref<const Vector>& input,
                   const Eigen::Ref<const Vector>& target, LearningRate eta) {
  if (input.size() != pathway.input_dim()) {
    throw ConfigError("hetero update: input dimension " + std::to_string(input.size()) +
                      " does not match " + std::to_string(pathway.input_dim()));
  }
  accumulate_hetero(pathway, input, target, eta);
}

void auto_update(AutoEncoderPathway& ae, const Eigen::Ref<const Vector>& input, LearningRate eta,
                 bool update_encode_bias) {
  accumulate_auto(ae, input, eta, update_encode_bias);
}

template <typename Update>
Momentum<Update>::Momentum(double momentum) : momentum_(momentum) {
  if (!(momentum >= 0.0 && momentum < 1.0)) throw UsageError("momentum must lie in [0, 1)");
}

template <typename Update>
const Update& Momentum<Update>::step(Update update) {
  if (velocity_ && momentum_ > 0.0) {
    *velocity_ *= momentum_;
    update += *velocity_;
  }
  velocity_ = std::move(update);
  return *velocity_;
}

template class Momentum<PathwayUpdate>;
template class Momentum<AutoEncoderUpdate>;

void minibatch_update(Pathway& pathway, const Eigen::Ref<const Matrix>& inputs,
                      const Eigen::Ref<const Matrix>& targets, LearningRate eta,
                      Momentum<PathwayUpdate>& momentum) {
  if (inputs.cols() == 0) throw UsageError("mini-batch must not be empty");
  if (momentum.coefficient() == 0.0) {
    accumulate_hetero(pathway, inputs, targets, eta);
    return;
  }
  apply(pathway, momentum.step(hetero_delta(pathway, inputs, targets, eta)));
}

void minibatch_update(AutoEncoderPathway& ae, const Eigen::Ref<const Matrix>& inputs,
                      LearningRate eta, bool update_encode_bias,
                      Momentum<AutoEncoderUpdate>& momentum) {
  if (inputs.cols() == 0) throw UsageError("mini-batch must not be empty");
  if (momentum.coefficient() == 0.0) {
    accumulate_auto(ae, inputs, eta, update_encode_bias);
    return;
  }
  apply(ae, momentum.step(auto_delta(ae, inputs, eta, update_encode_bias)));
}

}  // namespace crisp
