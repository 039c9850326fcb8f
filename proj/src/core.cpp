#include "crisp/core.hpp"

#include "crisp/errors.hpp"

#include <cmath>
#include <string>

namespace crisp {

namespace {

void require_dim(Index got, Index expected, const char* what) {
  if (got != expected) {
    throw ConfigError(std::string(what) + ": expected dimension " + std::to_string(expected) +
                      ", got " + std::to_string(got));
  }
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.allFinite();
}

}  // namespace

std::string_view to_string(Activation kind) {
  switch (kind) {
    case Activation::Sigmoid:
      return "sigmoid";
    case Activation::Step:
      return "step";
  }
  return "unknown";
}

Activation activation_from_string(std::string_view name) {
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "step") return Activation::Step;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

double activation(Activation kind, double a) {
  switch (kind) {
    case Activation::Sigmoid:
      return 1.0 / (1.0 + std::exp(-a));
    case Activation::Step:
      return a > 0.0 ? 1.0 : 0.0;
  }
  return 0.0;
}

void activate_inplace(Activation kind, Matrix& potentials) {
  if (kind == Activation::Sigmoid) {
    potentials = (1.0 + (-potentials.array()).exp()).inverse().matrix();
  } else {
    potentials = (potentials.array() > 0.0).cast<double>().matrix();
  }
}

void activate_inplace(Activation kind, Vector& potentials) {
  if (kind == Activation::Sigmoid) {
    potentials = (1.0 + (-potentials.array()).exp()).inverse().matrix();
  } else {
    potentials = (potentials.array() > 0.0).cast<double>().matrix();
  }
}

bool is_binary(const Eigen::Ref<const Matrix>& patterns) {
  return ((patterns.array() == 0.0) || (patterns.array() == 1.0)).all();
}

Pathway::Pathway(Index input_dim, Index output_dim, double offset_value, Activation kind)
    : weights(Matrix::Zero(input_dim, output_dim)),
      bias(Vector::Zero(output_dim)),
      offsets(Vector::Constant(input_dim, offset_value)),
      activation(kind) {
  if (input_dim <= 0 || output_dim <= 0) throw ConfigError("pathway dimensions must be positive");
}

void Pathway::validate() const {
  require_dim(bias.size(), weights.cols(), "pathway bias");
  require_dim(offsets.size(), weights.rows(), "pathway offsets");
  if (!all_finite(weights) || !all_finite(bias) || !all_finite(offsets)) {
    throw ConfigError("pathway contains non-finite parameters");
  }
}

AutoEncoderPathway::AutoEncoderPathway(Index visible_dim, Index hidden_dim, double visible_offset,
                                       double hidden_offset, double target_hidden,
                                       Activation encode_kind, Activation decode_kind)
    : weights(Matrix::Zero(visible_dim, hidden_dim)),
      encode_bias(Vector::Zero(hidden_dim)),
      decode_bias(Vector::Zero(visible_dim)),
      visible_offsets(Vector::Constant(visible_dim, visible_offset)),
      hidden_offsets(Vector::Constant(hidden_dim, hidden_offset)),
      target_hidden_activity(Vector::Constant(hidden_dim, target_hidden)),
      encode_activation(encode_kind),
      decode_activation(decode_kind) {
  if (visible_dim <= 0 || hidden_dim <= 0) {
    throw ConfigError("auto encoder dimensions must be positive");
  }
}

void AutoEncoderPathway::validate() const {
  require_dim(encode_bias.size(), weights.cols(), "auto encoder encode bias");
  require_dim(hidden_offsets.size(), weights.cols(), "auto encoder hidden offsets");
  require_dim(target_hidden_activity.size(), weights.cols(), "auto encoder target activity");
  require_dim(decode_bias.size(), weights.rows(), "auto encoder decode bias");
  require_dim(visible_offsets.size(), weights.rows(), "auto encoder visible offsets");
  if (!all_finite(weights) || !all_finite(encode_bias) || !all_finite(decode_bias) ||
      !all_finite(visible_offsets) || !all_finite(hidden_offsets)) {
    throw ConfigError("auto encoder contains non-finite parameters");
  }
}

Pattern forward(const Pathway& pathway, const Eigen::Ref<const Vector>& input) {
  require_dim(input.size(), pathway.input_dim(), "forward input");
  const Vector centered = input - pathway.offsets;
  Vector potential = pathway.weights.transpose() * centered + pathway.bias;
  activate_inplace(pathway.activation, potential);
  return potential;
}

Matrix forward_batch(const Pathway& pathway, const Eigen::Ref<const Matrix>& inputs) {
  require_dim(inputs.rows(), pathway.input_dim(), "forward input");
  const Matrix centered = inputs.colwise() - pathway.offsets;
  Matrix potential = pathway.weights.transpose() * centered;
  potential.colwise() += pathway.bias;
  activate_inplace(pathway.activation, potential);
  return potential;
}

Pattern encode(const AutoEncoderPathway& ae, const Eigen::Ref<const Vector>& visible) {
  require_dim(visible.size(), ae.visible_dim(), "encode input");
  const Vector centered = visible - ae.visible_offsets;
  Vector potential = ae.weights.transpose() * centered + ae.encode_bias;
  activate_inplace(ae.encode_activation, potential);
  return potential;
}

Matrix encode_batch(const AutoEncoderPathway& ae, const Eigen::Ref<const Matrix>& visible) {
  require_dim(visible.rows(), ae.visible_dim(), "encode input");
  const Matrix centered = visible.colwise() - ae.visible_offsets;
  Matrix potential = ae.weights.transpose() * centered;
  potential.colwise() += ae.encode_bias;
  activate_inplace(ae.encode_activation, potential);
  return potential;
}

Pattern decode(const AutoEncoderPathway& ae, const Eigen::Ref<const Vector>& hidden) {
  require_dim(hidden.size(), ae.hidden_dim(), "decode input");
  const Vector centered = hidden - ae.hidden_offsets;
  Vector potential = ae.weights * centered + ae.decode_bias;
  activate_inplace(ae.decode_activation, potential);
  return potential;
}

Matrix decode_batch(const AutoEncoderPathway& ae, const Eigen::Ref<const Matrix>& hidden) {
  require_dim(hidden.rows(), ae.hidden_dim(), "decode input");
  const Matrix centered = hidden.colwise() - ae.hidden_offsets;
  Matrix potential = ae.weights * centered;
  potential.colwise() += ae.decode_bias;
  activate_inplace(ae.decode_activation, potential);
  return potential;
}

}  // namespace crisp
