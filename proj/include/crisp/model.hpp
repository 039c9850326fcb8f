#pragma once

#include "crisp/core.hpp"
#include "crisp/plasticity.hpp"
#include "crisp/pretrain.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace crisp {

enum class Variant : std::uint8_t { ModelA = 0, ModelB = 1, StandardFramework = 2 };

std::string_view to_string(Variant variant);
Variant variant_from_string(std::string_view name);

/// Scale and activity parameters. Region sizes follow the scale N:
/// EC = 1.1 N, CA3 = 2.5 N, DG = 12 N.
struct ModelConfig {
  int n = 200;
  Variant variant = Variant::ModelA;
  double ca3_activity = 0.2;
  double dg_activity = 0.03;
  double ec_activity = 0.35;
  /// Online learning rate; 20/N when unset.
  std::optional<double> eta;
  /// Length of the intrinsic CA3 cycle; N when zero.
  Index intrinsic_length = 0;
  /// Std of the Gaussian initialization of the plastic pathways.
  double init_std = 0.01;

  Index ec_dim() const;
  Index ca3_dim() const;
  Index dg_dim() const;
  Index cycle_length() const;
  LearningRate learning_rate() const;

  /// Throws ConfigError on N < 20, non-positive sizes or activities outside (0,1).
  void validate() const;
};

/// Ground truth of a stored sequence.
struct SequenceStore {
  /// EC patterns in storage order (empty for the standard framework).
  Matrix ec;
  /// The full cyclic CA3 sequence the input was associated with.
  Matrix intrinsic;
  /// Intrinsic index of the first stored pattern.
  Index start = 0;
  /// Number of stored timesteps.
  Index length = 0;

  Index size() const { return length; }
  Index cycle() const { return intrinsic.cols(); }
  Index position(Index t) const { return (start + t) % cycle(); }
  /// CA3 ground truth aligned with the stored timesteps (ca3_dim x length).
  Matrix ca3_aligned() const;
};

enum class Relaxation : std::uint8_t { Correct, ShiftedPosition, Spurious, Unlabeled };

std::string_view to_string(Relaxation relaxation);

struct RecallStep {
  Pattern ca3;
  Pattern ec;
  std::optional<Pattern> si;
};

struct RecallTrace {
  /// Stored timestep the cue was taken from, or -1 for a novel cue.
  Index cue_index = -1;
  Index transitions = 0;
  /// transitions + 1 entries; entry 0 is the encoded cue.
  std::vector<RecallStep> steps;
  Relaxation relaxation = Relaxation::Unlabeled;
};

enum class DreamOrder : std::uint8_t { Sequential, Random };

/// The hippocampal loop: EC -> (DG) -> CA3 -> EC with a recurrent CA3.
///
/// Model-A and Model-B keep the recurrent pathway frozen and learn only the
/// encoder (EC->CA3 or DG->CA3) and the decoder (CA3->EC). The standard
/// framework instead stores CA3 sequences in a plastic recurrent pathway.
///
/// store/dream mutate the model and must be serialized; the const members are
/// safe to call concurrently.
class HippocampusModel {
 public:
  /// Model-A/B around pre-trained scaffolding. `dentate` is required for
  /// Model-B. Plastic pathways start with N(0, init_std^2) weights and zero
  /// bias; their offsets are the source region's target activity.
  HippocampusModel(ModelConfig config, Ca3Scaffold ca3,
                   std::optional<AutoEncoderPathway> dentate = std::nullopt,
                   std::optional<AutoEncoderPathway> si_codec = std::nullopt,
                   std::uint64_t init_seed = 0);

  /// Standard-framework baseline with a freshly initialized plastic CA3.
  static HippocampusModel standard_framework(ModelConfig config, std::uint64_t init_seed = 0);

  const ModelConfig& config() const { return config_; }
  Variant variant() const { return config_.variant; }
  Index stored_count() const { return stored_count_; }
  Index start_index() const { return start_index_; }
  const IntrinsicSequence& intrinsic() const { return intrinsic_; }
  const Pathway& encoder() const { return encoder_; }
  const Pathway& decoder() const { return decoder_; }
  const Pathway& recurrent() const { return recurrent_; }
  const std::optional<AutoEncoderPathway>& dentate() const { return dentate_; }
  const std::optional<AutoEncoderPathway>& si_codec() const { return si_codec_; }

  /// One-shot storage: for each EC pattern, one hetero update of the encoder
  /// towards the current intrinsic pattern and one of the decoder back to EC.
  /// The intrinsic index advances by ground-truth lookup. The first call picks
  /// the start index; later calls must continue where the previous one ended.
  SequenceStore store_sequence(const Eigen::Ref<const Matrix>& ec_sequence, Index start_index);

  /// Standard framework: hetero-associates each CA3 pattern with its successor
  /// in the recurrent pathway, including the closing pair last -> first.
  SequenceStore store_standard(const Eigen::Ref<const Matrix>& ca3_sequence,
                               std::optional<LearningRate> eta = std::nullopt);

  /// Input to the plastic encoder: EC itself (Model-A) or its DG code (Model-B).
  Matrix encoder_input(const Eigen::Ref<const Matrix>& ec) const;

  Pattern encode(const Eigen::Ref<const Vector>& ec) const;
  Matrix encode_batch(const Eigen::Ref<const Matrix>& ec) const;

  Pattern transition(const Eigen::Ref<const Vector>& ca3, Index steps) const;
  Matrix transition_batch(const Eigen::Ref<const Matrix>& ca3, Index steps) const;

  Pattern decode(const Eigen::Ref<const Vector>& ca3) const;
  Matrix decode_batch(const Eigen::Ref<const Matrix>& ca3) const;

  /// Sensory input -> binary EC code. Requires the SI codec.
  Matrix si_to_ec(const Eigen::Ref<const Matrix>& si) const;
  /// EC -> sensory domain reconstruction. Requires the SI codec.
  Matrix ec_to_si(const Eigen::Ref<const Matrix>& ec) const;

  /// Encodes the cue, then replays `transitions` recurrent steps with the
  /// encoder suppressed, decoding every CA3 state to EC (and SI if requested).
  RecallTrace recall(const Eigen::Ref<const Vector>& cue_ec, Index transitions, bool emit_si,
                     Index cue_index = -1) const;

  /// Input-free re-training of the encoder: each visited stored position t
  /// reconstructs EC via the decoder from the intrinsic pattern and
  /// hetero-associates that reconstruction with the intrinsic pattern.
  void dream(int loops, DreamOrder order, std::optional<LearningRate> eta = std::nullopt,
             std::uint64_t seed = 0);

  /// Reassembles a model from its parts (used by snapshot loading).
  static HippocampusModel from_parts(ModelConfig config, IntrinsicSequence intrinsic,
                                     Pathway recurrent, Pathway encoder, Pathway decoder,
                                     std::optional<AutoEncoderPathway> dentate,
                                     std::optional<AutoEncoderPathway> si_codec,
                                     Index stored_count, Index start_index);

 private:
  HippocampusModel() = default;

  ModelConfig config_;
  IntrinsicSequence intrinsic_;
  Pathway recurrent_;
  Pathway encoder_;
  Pathway decoder_;
  std::optional<AutoEncoderPathway> dentate_;
  std::optional<AutoEncoderPathway> si_codec_;
  Index stored_count_ = 0;
  Index start_index_ = 0;
};

/// Labels a trace by its late CA3 states (the last `window` steps): Correct if
/// they follow the intrinsic sequence from the cue's own position with mean
/// correlation >= threshold, ShiftedPosition if they follow it from another
/// position, Spurious otherwise.
Relaxation classify_relaxation(const RecallTrace& trace, const SequenceStore& store,
                               double threshold = 0.5, Index window = 5);

}  // namespace crisp
