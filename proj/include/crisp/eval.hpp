#pragma once

#include "crisp/core.hpp"
#include "crisp/data.hpp"

#include <optional>
#include <string>
#include <vector>

namespace crisp {

class HippocampusModel;
struct SequenceStore;

/// Pearson correlation over the elements of two equally long vectors.
/// Throws UndefinedCorrelation if either vector is constant.
double pearson(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

/// Same as pearson() but returns `fallback` for constant inputs.
double pearson_or(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b,
                  double fallback);

/// Mean over t of pearson(retrieved_t, mean of ground_truth). Columns are timesteps.
double baseline_correlation(const Eigen::Ref<const Matrix>& retrieved,
                            const Eigen::Ref<const Matrix>& ground_truth);

/// For each column, the largest correlation with any other column.
std::vector<double> max_correlation_profile(const Eigen::Ref<const Matrix>& sequence);

struct Trend {
  double slope = 0.0;
  double intercept = 0.0;

  double at(double x) const { return slope * x + intercept; }
};

/// Ordinary least squares fit of y on x. Needs at least two points.
Trend trendline(const std::vector<double>& x, const std::vector<double>& y);

struct CurveMode {
  enum class Kind {
    Encoder,             // EC(t) -> CA3, compared in CA3
    Decoder,             // ground-truth CA3(t) -> EC
    EncodeDecode,        // EC(t) -> CA3 -> EC
    RecallK,             // EC(t-k) -> CA3 -> k transitions -> EC, compared with EC(t)
    FullRecall,          // EC(t) -> CA3 -> L transitions -> EC
    EncoderTransitionK,  // EC(t-k) -> CA3 -> k transitions, compared in CA3
  };

  Kind kind = Kind::Decoder;
  Index transitions = 0;

  static CurveMode encoder() { return {Kind::Encoder, 0}; }
  static CurveMode decoder() { return {Kind::Decoder, 0}; }
  static CurveMode encode_decode() { return {Kind::EncodeDecode, 0}; }
  static CurveMode recall(Index k) { return {Kind::RecallK, k}; }
  static CurveMode full_recall() { return {Kind::FullRecall, 0}; }
  static CurveMode encoder_transition(Index k) { return {Kind::EncoderTransitionK, k}; }

  /// File-name friendly label, e.g. "recall_k5".
  std::string name() const;
  static CurveMode parse(const std::string& name);
};

struct ForgettingCurve {
  std::string name;
  std::vector<Index> pattern_index;
  std::vector<double> correlation;
  /// Correlation of each retrieved pattern with the mean ground-truth pattern.
  std::vector<double> baseline_per_index;
  std::vector<double> abs_error;
  std::vector<double> squared_error;
  double baseline = 0.0;
  Trend trend;
  /// Retrieved patterns that were constant; their correlation is recorded as 0.
  Index undefined = 0;

  Index size() const { return static_cast<Index>(correlation.size()); }
  double mean() const;
  /// Mean over the newest `fraction` of entries (highest pattern indices).
  double mean_newest(double fraction) const;
  /// Mean over the oldest `fraction` of entries.
  double mean_oldest(double fraction) const;
  /// Mean without the oldest `fraction` of entries (early-pattern outliers).
  double mean_excluding_early(double fraction = 0.05) const;
};

/// Optional corruption applied to every cue before encoding.
struct CueNoise {
  double flip_fraction = 0.0;
  std::uint64_t seed = 0;
};

/// Runs the pipeline selected by `mode` for every stored index and records the
/// correlation against ground truth in the corresponding subregion. RecallK
/// wraps around the sequence only when it spans the full intrinsic cycle;
/// otherwise indices without a cue k steps earlier are skipped.
ForgettingCurve forgetting_curve(const HippocampusModel& model, const SequenceStore& store,
                                 CurveMode mode, std::optional<CueNoise> noise = std::nullopt);

}  // namespace crisp
