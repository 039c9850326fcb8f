#include "crisp/model.hpp"

#include "crisp/errors.hpp"
#include "crisp/eval.hpp"
#include "crisp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace crisp {

namespace {

Pathway make_plastic(Index in, Index out, double offset, double init_std, std::uint64_t seed) {
  Pathway p(in, out, offset, Activation::Sigmoid);
  init_gaussian(p.weights, init_std, seed);
  return p;
}

// Correlation of every column of `a` with every column of `b`; constant
// columns correlate 0 with everything.
Matrix correlation_table(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b) {
  auto standardize = [](const Eigen::Ref<const Matrix>& m) {
    Matrix z = m.rowwise() - m.colwise().mean();
    for (Index j = 0; j < z.cols(); ++j) {
      const bool constant = (m.col(j).array() == m(0, j)).all();
      const double norm = z.col(j).norm();
      if (constant || norm == 0.0) {
        z.col(j).setZero();
      } else {
        z.col(j) /= norm;
      }
    }
    return z;
  };
  return standardize(a).transpose() * standardize(b);
}

}  // namespace

std::string_view to_string(Variant variant) {
  switch (variant) {
    case Variant::ModelA:
      return "model-a";
    case Variant::ModelB:
      return "model-b";
    case Variant::StandardFramework:
      return "standard";
  }
  return "unknown";
}

Variant variant_from_string(std::string_view name) {
  if (name == "model-a") return Variant::ModelA;
  if (name == "model-b") return Variant::ModelB;
  if (name == "standard") return Variant::StandardFramework;
  throw ConfigError("unknown model variant '" + std::string(name) +
                    "' (expected model-a, model-b or standard)");
}

std::string_view to_string(Relaxation relaxation) {
  switch (relaxation) {
    case Relaxation::Correct:
      return "correct";
    case Relaxation::ShiftedPosition:
      return "shifted";
    case Relaxation::Spurious:
      return "spurious";
    case Relaxation::Unlabeled:
      return "unlabeled";
  }
  return "unknown";
}

Index ModelConfig::ec_dim() const { return static_cast<Index>(std::llround(1.1 * n)); }
Index ModelConfig::ca3_dim() const { return static_cast<Index>(std::llround(2.5 * n)); }
Index ModelConfig::dg_dim() const { return Index{12} * n; }
Index ModelConfig::cycle_length() const { return intrinsic_length > 0 ? intrinsic_length : n; }

LearningRate ModelConfig::learning_rate() const {
  return eta ? LearningRate(*eta) : online_learning_rate(n);
}

void ModelConfig::validate() const {
  if (n < 20) {
    throw ConfigError("N = " + std::to_string(n) + " is below the supported range (N >= 20)");
  }
  auto check = [](double a, const char* name) {
    if (!(a > 0.0 && a < 1.0)) throw ConfigError(std::string(name) + " must lie in (0, 1)");
  };
  check(ca3_activity, "ca3_activity");
  check(dg_activity, "dg_activity");
  check(ec_activity, "ec_activity");
  if (intrinsic_length < 0) throw ConfigError("intrinsic_length must be non-negative");
  if (eta && !(*eta > 0.0)) throw ConfigError("eta must be positive");
  if (init_std < 0.0) throw ConfigError("init_std must be non-negative");
}

Matrix SequenceStore::ca3_aligned() const {
  Matrix out(intrinsic.rows(), length);
  for (Index t = 0; t < length; ++t) out.col(t) = intrinsic.col(position(t));
  return out;
}

HippocampusModel::HippocampusModel(ModelConfig config, Ca3Scaffold ca3,
                                   std::optional<AutoEncoderPathway> dentate,
                                   std::optional<AutoEncoderPathway> si_codec,
                                   std::uint64_t init_seed)
    : config_(std::move(config)),
      intrinsic_(std::move(ca3.sequence)),
      recurrent_(std::move(ca3.recurrent)),
      dentate_(std::move(dentate)),
      si_codec_(std::move(si_codec)) {
  config_.validate();
  if (config_.variant == Variant::StandardFramework) {
    throw ConfigError("use HippocampusModel::standard_framework for the standard framework");
  }
  const Index ec = config_.ec_dim();
  const Index ca3_dim = config_.ca3_dim();
  if (intrinsic_.dim() != ca3_dim || recurrent_.input_dim() != ca3_dim ||
      recurrent_.output_dim() != ca3_dim) {
    throw ConfigError("CA3 scaffold dimension does not match 2.5N = " + std::to_string(ca3_dim));
  }
  recurrent_.validate();
  if (config_.variant == Variant::ModelB) {
    if (!dentate_) throw ConfigError("Model-B requires a pre-trained DG auto encoder");
    if (dentate_->visible_dim() != ec) throw ConfigError("DG visible dimension must equal EC");
    dentate_->validate();
    encoder_ = make_plastic(dentate_->hidden_dim(), ca3_dim, config_.dg_activity, config_.init_std,
                            derive_seed(init_seed, "encoder"));
  } else {
    encoder_ = make_plastic(ec, ca3_dim, config_.ec_activity, config_.init_std,
                            derive_seed(init_seed, "encoder"));
  }
  decoder_ = make_plastic(ca3_dim, ec, intrinsic_.activity, config_.init_std,
                          derive_seed(init_seed, "decoder"));
  if (si_codec_) {
    if (si_codec_->hidden_dim() != ec) throw ConfigError("SI codec hidden dimension must equal EC");
    si_codec_->validate();
  }
}

HippocampusModel HippocampusModel::standard_framework(ModelConfig config, std::uint64_t init_seed) {
  config.variant = Variant::StandardFramework;
  config.validate();
  HippocampusModel model;
  model.config_ = config;
  const Index dim = config.ca3_dim();
  model.recurrent_ = make_plastic(dim, dim, config.ca3_activity, config.init_std,
                                  derive_seed(init_seed, "recurrent"));
  model.intrinsic_.activity = config.ca3_activity;
  model.intrinsic_.patterns.resize(dim, 0);
  return model;
}

HippocampusModel HippocampusModel::from_parts(ModelConfig config, IntrinsicSequence intrinsic,
                                              Pathway recurrent, Pathway encoder, Pathway decoder,
                                              std::optional<AutoEncoderPathway> dentate,
                                              std::optional<AutoEncoderPathway> si_codec,
                                              Index stored_count, Index start_index) {
  config.validate();
  HippocampusModel model;
  model.config_ = config;
  model.intrinsic_ = std::move(intrinsic);
  model.recurrent_ = std::move(recurrent);
  model.encoder_ = std::move(encoder);
  model.decoder_ = std::move(decoder);
  model.dentate_ = std::move(dentate);
  model.si_codec_ = std::move(si_codec);
  model.stored_count_ = stored_count;
  model.start_index_ = start_index;
  model.recurrent_.validate();
  if (config.variant != Variant::StandardFramework) {
    model.encoder_.validate();
    model.decoder_.validate();
  }
  return model;
}

SequenceStore HippocampusModel::store_sequence(const Eigen::Ref<const Matrix>& ec_sequence,
                                               Index start_index) {
  if (variant() == Variant::StandardFramework) {
    throw UsageError("store_sequence is not available for the standard framework");
  }
  const Index length = intrinsic_.length();
  if (ec_sequence.rows() != config_.ec_dim()) {
    throw ConfigError("EC patterns must have dimension " + std::to_string(config_.ec_dim()));
  }
  if (!is_binary(ec_sequence)) throw UsageError("EC patterns must be binary");
  if (stored_count_ + ec_sequence.cols() > length) {
    throw UsageError("sequence of " + std::to_string(ec_sequence.cols()) + " patterns exceeds the " +
                     "remaining intrinsic capacity of " + std::to_string(length - stored_count_));
  }
  if (start_index < 0 || start_index >= length) throw UsageError("start index out of range");
  if (stored_count_ == 0) {
    start_index_ = start_index;
  } else if (start_index != (start_index_ + stored_count_) % length) {
    throw UsageError("a continued store must start at intrinsic index " +
                     std::to_string((start_index_ + stored_count_) % length));
  }

  const LearningRate eta = config_.learning_rate();
  SequenceStore store;
  store.ec = ec_sequence;
  store.intrinsic = intrinsic_.patterns;
  store.start = start_index;
  store.length = ec_sequence.cols();

  Index position = start_index;
  for (Index t = 0; t < ec_sequence.cols(); ++t) {
    const auto target = intrinsic_.pattern(position);
    const Vector input = encoder_input(ec_sequence.col(t));
    hetero_update(encoder_, input, target, eta);
    hetero_update(decoder_, target, ec_sequence.col(t), eta);
    position = intrinsic_.successor(position);
  }
  stored_count_ += ec_sequence.cols();
  return store;
}

SequenceStore HippocampusModel::store_standard(const Eigen::Ref<const Matrix>& ca3_sequence,
                                               std::optional<LearningRate> eta) {
  if (variant() != Variant::StandardFramework) {
    throw UsageError("store_standard requires the standard-framework variant");
  }
  if (ca3_sequence.rows() != config_.ca3_dim()) {
    throw ConfigError("CA3 patterns must have dimension " + std::to_string(config_.ca3_dim()));
  }
  if (ca3_sequence.cols() < 2) throw UsageError("need at least two CA3 patterns");
  if (stored_count_ != 0) throw UsageError("the standard framework stores a single sequence");
  const LearningRate rate = eta.value_or(config_.learning_rate());
  const Index count = ca3_sequence.cols();
  for (Index t = 0; t < count; ++t) {
    hetero_update(recurrent_, ca3_sequence.col(t), ca3_sequence.col((t + 1) % count), rate);
  }
  intrinsic_.patterns = ca3_sequence;
  stored_count_ = count;
  start_index_ = 0;

  SequenceStore store;
  store.intrinsic = ca3_sequence;
  store.start = 0;
  store.length = count;
  return store;
}

Matrix HippocampusModel::encoder_input(const Eigen::Ref<const Matrix>& ec) const {
  if (dentate_ && variant() == Variant::ModelB) return crisp::encode_batch(*dentate_, ec);
  return ec;
}

Pattern HippocampusModel::encode(const Eigen::Ref<const Vector>& ec) const {
  return encode_batch(ec).col(0);
}

Matrix HippocampusModel::encode_batch(const Eigen::Ref<const Matrix>& ec) const {
  if (variant() == Variant::StandardFramework) {
    throw UsageError("the standard framework has no EC encoder");
  }
  if (ec.rows() != config_.ec_dim()) {
    throw ConfigError("EC patterns must have dimension " + std::to_string(config_.ec_dim()));
  }
  return forward_batch(encoder_, encoder_input(ec));
}

Pattern HippocampusModel::transition(const Eigen::Ref<const Vector>& ca3, Index steps) const {
  return transition_batch(ca3, steps).col(0);
}

Matrix HippocampusModel::transition_batch(const Eigen::Ref<const Matrix>& ca3, Index steps) const {
  if (steps < 0) throw UsageError("transition count must be non-negative");
  Matrix state = ca3;
  for (Index s = 0; s < steps; ++s) state = forward_batch(recurrent_, state);
  return state;
}

Pattern HippocampusModel::decode(const Eigen::Ref<const Vector>& ca3) const {
  return decode_batch(ca3).col(0);
}

Matrix HippocampusModel::decode_batch(const Eigen::Ref<const Matrix>& ca3) const {
  if (variant() == Variant::StandardFramework) {
    throw UsageError("the standard framework has no CA3 -> EC decoder");
  }
  return forward_batch(decoder_, ca3);
}

Matrix HippocampusModel::si_to_ec(const Eigen::Ref<const Matrix>& si) const {
  if (!si_codec_) throw UsageError("model has no SI codec");
  return crisp::encode_batch(*si_codec_, si);
}

Matrix HippocampusModel::ec_to_si(const Eigen::Ref<const Matrix>& ec) const {
  if (!si_codec_) throw UsageError("model has no SI codec");
  return crisp::decode_batch(*si_codec_, ec);
}

RecallTrace HippocampusModel::recall(const Eigen::Ref<const Vector>& cue_ec, Index transitions,
                                     bool emit_si, Index cue_index) const {
  if (transitions < 0) throw UsageError("transition count must be non-negative");
  if (emit_si && !si_codec_) throw UsageError("emit_si requested but the model has no SI codec");
  RecallTrace trace;
  trace.cue_index = cue_index;
  trace.transitions = transitions;
  trace.steps.reserve(static_cast<std::size_t>(transitions + 1));

  Vector state;
  if (variant() == Variant::StandardFramework) {
    if (cue_ec.size() != config_.ca3_dim()) {
      throw ConfigError("standard-framework cues are CA3 patterns");
    }
    state = cue_ec;
  } else {
    state = encode(cue_ec);
  }
  for (Index s = 0; s <= transitions; ++s) {
    if (s > 0) state = forward(recurrent_, state);
    RecallStep step;
    step.ca3 = state;
    if (variant() != Variant::StandardFramework) {
      step.ec = decode(state);
      if (emit_si) step.si = ec_to_si(step.ec).col(0);
    }
    trace.steps.push_back(std::move(step));
  }
  return trace;
}

void HippocampusModel::dream(int loops, DreamOrder order, std::optional<LearningRate> eta,
                             std::uint64_t seed) {
  if (variant() == Variant::StandardFramework) {
    throw UsageError("dreaming needs the hetero-associative encoder of Model-A or Model-B");
  }
  if (loops < 0) throw UsageError("dreaming loop count must be non-negative");
  if (loops == 0) return;
  if (stored_count_ == 0) throw UsageError("dreaming requires a populated decoder");
  const LearningRate rate = eta.value_or(config_.learning_rate());
  Rng rng(seed);
  const Index length = intrinsic_.length();
  const auto visit = [&](Index offset) {
    const Index position = (start_index_ + offset) % length;
    const auto target = intrinsic_.pattern(position);
    const Vector reconstructed = decode(target);
    hetero_update(encoder_, encoder_input(reconstructed), target, rate);
  };
  const auto stored = static_cast<std::uint64_t>(stored_count_);
  if (order == DreamOrder::Sequential) {
    const auto first = static_cast<Index>(rng.below(stored));
    for (int loop = 0; loop < loops; ++loop) {
      for (Index i = 0; i < stored_count_; ++i) visit((first + i) % stored_count_);
    }
  } else {
    const Index draws = Index{loops} * stored_count_;
    for (Index i = 0; i < draws; ++i) visit(static_cast<Index>(rng.below(stored)));
  }
}

Relaxation classify_relaxation(const RecallTrace& trace, const SequenceStore& store,
                               double threshold, Index window) {
  if (trace.steps.empty()) throw UsageError("cannot classify an empty recall trace");
  if (store.cycle() == 0) throw UsageError("sequence store has no intrinsic sequence");
  const Index steps = static_cast<Index>(trace.steps.size());
  const Index tail = std::min(std::max<Index>(window, 1), steps);
  Matrix states(store.intrinsic.rows(), tail);
  for (Index i = 0; i < tail; ++i) {
    states.col(i) = trace.steps[static_cast<std::size_t>(steps - tail + i)].ca3;
  }
  const Matrix table = correlation_table(states, store.intrinsic);
  const Index cycle = store.cycle();

  // score(s): mean correlation when the cue sits at intrinsic position s.
  auto score = [&](Index s) {
    double total = 0.0;
    for (Index i = 0; i < tail; ++i) total += table(i, (s + steps - tail + i) % cycle);
    return total / static_cast<double>(tail);
  };
  if (trace.cue_index >= 0 && score(store.position(trace.cue_index)) >= threshold) {
    return Relaxation::Correct;
  }
  for (Index s = 0; s < cycle; ++s) {
    if (score(s) >= threshold) return Relaxation::ShiftedPosition;
  }
  return Relaxation::Spurious;
}

}  // namespace crisp
