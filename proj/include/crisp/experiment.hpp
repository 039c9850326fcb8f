#pragma once

#include "crisp/data.hpp"
#include "crisp/eval.hpp"
#include "crisp/model.hpp"
#include "crisp/pretrain.hpp"
#include "crisp/report.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace crisp {

struct DataSpec {
  DatasetKind kind = DatasetKind::Rand;
  /// EC activity of generated patterns.
  double activity = 0.35;
  /// Bits flipped between successive RAND-CORR patterns.
  double corr_flip = 0.10;
  /// Patterns generated or loaded before the sequence is selected; 0 means the
  /// stored length.
  Index pool = 0;
  std::filesystem::path images;
  std::filesystem::path labels;
  std::vector<std::filesystem::path> batches;
};

struct DreamSpec {
  int loops = 10;
  DreamOrder order = DreamOrder::Sequential;
};

/// One experiment, parsed from an INI file. Every key has a default equal to
/// the reference setup, so an empty file runs Model-A on RAND with N = 200.
struct ExperimentSpec {
  std::string name = "experiment";
  std::uint64_t seed = 1;
  std::filesystem::path out = "crisp-out";

  ModelConfig model;
  DataSpec data;
  /// Number of stored patterns; 0 means N.
  Index length = 0;
  Index start_index = 0;
  /// Learning rate of the standard framework.
  double standard_eta = 0.01;

  Ca3PretrainConfig ca3;
  DgPretrainConfig dg;
  SiCodecConfig si;

  std::vector<CurveMode> curves;
  std::vector<double> noise_levels;
  Index relaxation_transitions = 15;
  Index relaxation_window = 5;
  double relaxation_threshold = 0.5;

  std::optional<DreamSpec> dream;
  bool images = true;

  Index stored_length() const { return length > 0 ? length : model.n; }
  /// Copies the model-derived sizes into the pre-training configs.
  void resolve();
  /// Throws ConfigError naming the offending field, e.g. "model.n".
  void validate() const;
};

/// Parses INI text. Unknown sections or keys are rejected with their path.
ExperimentSpec parse_spec(const std::string& text);
ExperimentSpec load_spec(const std::filesystem::path& path);
/// Resolved configuration as INI text; parse_spec(render_spec(s)) == s.
std::string render_spec(const ExperimentSpec& spec);
/// Flat key/value view of render_spec, used for the manifest.
std::map<std::string, std::string> spec_entries(const ExperimentSpec& spec);

struct Preset {
  std::string name;
  std::string description;
  std::string ini;
};

const std::vector<Preset>& presets();
ExperimentSpec preset_spec(const std::string& name);

struct RunOptions {
  /// Pre-trained pathways are cached here when set.
  std::optional<std::filesystem::path> cache_dir;
  std::ostream* log = nullptr;
  bool write_files = true;
};

/// Scaffolding shared by every run with the same pre-training key.
struct Pretrained {
  std::optional<Ca3Scaffold> ca3;
  std::optional<AutoEncoderPathway> dentate;
  std::optional<AutoEncoderPathway> si_codec;
  std::map<std::string, std::string> hashes;
};

/// Seeds of the named stages derived from the master seed.
std::map<std::string, std::uint64_t> stage_seeds(std::uint64_t master);

/// Cache key of one pre-training stage ("ca3", "dg" or "si").
std::string pretrain_key(const ExperimentSpec& spec, const std::string& stage,
                         const std::string& data_fingerprint = {});

/// Loads the SI-domain data (MNIST/CIFAR) or nothing for synthetic data.
std::optional<Dataset> load_sensory_data(const ExperimentSpec& spec);

/// Runs or loads from cache every pre-training stage the spec needs.
Pretrained cache_pretrained(const ExperimentSpec& spec, const RunOptions& options,
                            const std::optional<Dataset>& sensory = std::nullopt);

/// Full pipeline: data, pre-training, storage, curves, noise and dreaming
/// analyses. Writes the report to spec.out when options.write_files is set.
Report run_experiment(const ExperimentSpec& spec, const RunOptions& options = {});

/// Fractions of Correct, ShiftedPosition and Spurious relaxations when every
/// stored pattern, corrupted by `noise`, is used as a cue.
struct RelaxationCounts {
  Index correct = 0;
  Index shifted = 0;
  Index spurious = 0;

  Index total() const { return correct + shifted + spurious; }
  double fraction(Relaxation r) const;
};

RelaxationCounts relaxation_counts(const HippocampusModel& model, const SequenceStore& store,
                                   double noise, std::uint64_t seed, Index transitions,
                                   Index window, double threshold);

}  // namespace crisp
