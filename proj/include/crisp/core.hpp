#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string_view>

namespace crisp {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Activity vector of one subregion at one timestep. Batches of patterns are
/// stored as the columns of a Matrix.
using Pattern = Vector;

enum class Activation : std::uint8_t { Sigmoid = 0, Step = 1 };

std::string_view to_string(Activation kind);
Activation activation_from_string(std::string_view name);

/// Sigmoid: 1/(1+e^-a). Step: 1 if a > 0, else 0 (the tie at zero maps to 0).
double activation(Activation kind, double a);

/// Elementwise activation applied in place.
void activate_inplace(Activation kind, Matrix& potentials);
void activate_inplace(Activation kind, Vector& potentials);

/// True if every entry is exactly 0 or 1. Vectors bind as one-column matrices.
bool is_binary(const Eigen::Ref<const Matrix>& patterns);

/// Directed projection between two subregions. `weights` is D_in x D_out and
/// the output of a centered neuron is phi(W^T (x - offsets) + bias).
struct Pathway {
  Matrix weights;
  Vector bias;
  Vector offsets;
  Activation activation = Activation::Sigmoid;
  /// Number of learning steps applied so far (one per hetero/auto update).
  std::uint64_t update_count = 0;

  Pathway() = default;
  Pathway(Index input_dim, Index output_dim, double offset_value, Activation kind);

  Index input_dim() const { return weights.rows(); }
  Index output_dim() const { return weights.cols(); }

  /// Throws ConfigError if the shapes disagree or any entry is not finite.
  void validate() const;
};

/// Tied-weight auto encoder. The encoder computes
///   h = phi_enc(W^T (x - visible_offsets) + encode_bias)
/// and the decoder reconstructs
///   z = phi_dec(W (h - hidden_offsets) + decode_bias).
struct AutoEncoderPathway {
  Matrix weights;  // D_vis x D_hid
  Vector encode_bias;
  Vector decode_bias;
  Vector visible_offsets;
  Vector hidden_offsets;
  Vector target_hidden_activity;
  Activation encode_activation = Activation::Sigmoid;
  Activation decode_activation = Activation::Sigmoid;
  std::uint64_t update_count = 0;

  AutoEncoderPathway() = default;
  AutoEncoderPathway(Index visible_dim, Index hidden_dim, double visible_offset,
                     double hidden_offset, double target_hidden, Activation encode_kind,
                     Activation decode_kind);

  Index visible_dim() const { return weights.rows(); }
  Index hidden_dim() const { return weights.cols(); }

  void validate() const;
};

Pattern forward(const Pathway& pathway, const Eigen::Ref<const Vector>& input);
/// Column-wise forward pass; `inputs` is D_in x B.
Matrix forward_batch(const Pathway& pathway, const Eigen::Ref<const Matrix>& inputs);

Pattern encode(const AutoEncoderPathway& ae, const Eigen::Ref<const Vector>& visible);
Matrix encode_batch(const AutoEncoderPathway& ae, const Eigen::Ref<const Matrix>& visible);

Pattern decode(const AutoEncoderPathway& ae, const Eigen::Ref<const Vector>& hidden);
Matrix decode_batch(const AutoEncoderPathway& ae, const Eigen::Ref<const Matrix>& hidden);

}  // namespace crisp
