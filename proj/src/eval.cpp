#include "crisp/eval.hpp"

#include "crisp/errors.hpp"
#include "crisp/model.hpp"
#include "crisp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace crisp {

namespace {

bool is_constant(const Eigen::Ref<const Vector>& v) {
  return v.size() == 0 || (v.array() == v(0)).all();
}

double pearson_unchecked(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  const Vector da = a.array() - a.mean();
  const Vector db = b.array() - b.mean();
  const double denom = std::sqrt(da.squaredNorm() * db.squaredNorm());
  if (!(denom > 0.0)) throw UndefinedCorrelation("correlation of a constant pattern");
  return std::clamp(da.dot(db) / denom, -1.0, 1.0);
}

constexpr Index kChunk = 256;

}  // namespace

double pearson(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  if (a.size() != b.size()) {
    throw UsageError("pearson: length mismatch (" + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()) + ")");
  }
  if (a.size() < 2) throw UsageError("pearson needs at least two elements");
  if (is_constant(a) || is_constant(b)) {
    throw UndefinedCorrelation("correlation of a constant pattern");
  }
  return pearson_unchecked(a, b);
}

double pearson_or(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b,
                  double fallback) {
  try {
    return pearson(a, b);
  } catch (const UndefinedCorrelation&) {
    return fallback;
  }
}

double baseline_correlation(const Eigen::Ref<const Matrix>& retrieved,
                            const Eigen::Ref<const Matrix>& ground_truth) {
  if (retrieved.cols() == 0 || ground_truth.cols() == 0) {
    throw UsageError("baseline needs at least one pattern");
  }
  const Vector mean = ground_truth.rowwise().mean();
  double total = 0.0;
  for (Index t = 0; t < retrieved.cols(); ++t) total += pearson(retrieved.col(t), mean);
  return total / static_cast<double>(retrieved.cols());
}

std::vector<double> max_correlation_profile(const Eigen::Ref<const Matrix>& sequence) {
  const Index count = sequence.cols();
  if (count < 2) throw UsageError("max correlation profile needs at least two patterns");
  Matrix z = sequence.rowwise() - sequence.colwise().mean();
  for (Index j = 0; j < count; ++j) {
    if (is_constant(sequence.col(j))) {
      throw UndefinedCorrelation("pattern " + std::to_string(j) + " is constant");
    }
    z.col(j).normalize();
  }
  Matrix table = z.transpose() * z;
  std::vector<double> profile(static_cast<std::size_t>(count));
  for (Index j = 0; j < count; ++j) {
    table(j, j) = -2.0;
    profile[static_cast<std::size_t>(j)] = std::min(1.0, table.col(j).maxCoeff());
  }
  return profile;
}

Trend trendline(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw UsageError("trendline: x and y differ in length");
  if (x.size() < 2) throw UsageError("trendline needs at least two points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  Trend trend;
  trend.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  trend.intercept = my - trend.slope * mx;
  return trend;
}

std::string CurveMode::name() const {
  switch (kind) {
    case Kind::Encoder:
      return "encoder";
    case Kind::Decoder:
      return "decoder";
    case Kind::EncodeDecode:
      return "encode_decode";
    case Kind::RecallK:
      return "recall_k" + std::to_string(transitions);
    case Kind::FullRecall:
      return "full_recall";
    case Kind::EncoderTransitionK:
      return "encoder_transition_k" + std::to_string(transitions);
  }
  return "unknown";
}

CurveMode CurveMode::parse(const std::string& name) {
  auto with_k = [&](const std::string& prefix, Kind kind) -> std::optional<CurveMode> {
    if (name.rfind(prefix, 0) != 0) return std::nullopt;
    const std::string digits = name.substr(prefix.size());
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit)) {
      throw ConfigError("bad transition count in curve mode '" + name + "'");
    }
    const auto k = static_cast<Index>(std::stoll(digits));
    if (k < 1) throw ConfigError("curve mode '" + name + "' needs at least one transition");
    return CurveMode{kind, k};
  };
  if (name == "encoder") return encoder();
  if (name == "decoder") return decoder();
  if (name == "encode_decode") return encode_decode();
  if (name == "full_recall") return full_recall();
  if (auto m = with_k("encoder_transition_k", Kind::EncoderTransitionK)) return *m;
  if (auto m = with_k("recall_k", Kind::RecallK)) return *m;
  throw ConfigError("unknown curve mode '" + name + "'");
}

double ForgettingCurve::mean() const {
  if (correlation.empty()) return 0.0;
  return std::accumulate(correlation.begin(), correlation.end(), 0.0) /
         static_cast<double>(correlation.size());
}

namespace {

std::size_t fraction_count(std::size_t n, double fraction) {
  const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  return std::clamp<std::size_t>(count, n == 0 ? 0 : 1, n);
}

double range_mean(const std::vector<double>& v, std::size_t first, std::size_t last) {
  if (last <= first) return 0.0;
  return std::accumulate(v.begin() + static_cast<std::ptrdiff_t>(first),
                         v.begin() + static_cast<std::ptrdiff_t>(last), 0.0) /
         static_cast<double>(last - first);
}

}  // namespace

double ForgettingCurve::mean_newest(double fraction) const {
  const std::size_t n = correlation.size();
  return range_mean(correlation, n - fraction_count(n, fraction), n);
}

double ForgettingCurve::mean_oldest(double fraction) const {
  return range_mean(correlation, 0, fraction_count(correlation.size(), fraction));
}

double ForgettingCurve::mean_excluding_early(double fraction) const {
  const std::size_t n = correlation.size();
  const auto skip = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  return range_mean(correlation, std::min(skip, n), n);
}

ForgettingCurve forgetting_curve(const HippocampusModel& model, const SequenceStore& store,
                                 CurveMode mode, std::optional<CueNoise> noise) {
  using Kind = CurveMode::Kind;
  const bool standard = model.variant() == Variant::StandardFramework;
  const Index count = store.size();
  const Index cycle = store.cycle();
  if (count < 2) throw UsageError("forgetting curve needs at least two stored patterns");
  if (mode.transitions < 0) throw UsageError("transition count must be non-negative");
  if (standard && mode.kind != Kind::RecallK && mode.kind != Kind::FullRecall &&
      mode.kind != Kind::EncoderTransitionK) {
    throw UsageError("the standard framework only supports transition curves");
  }
  if (noise && mode.kind == Kind::Decoder) {
    throw UsageError("cue noise does not apply to the decoder curve");
  }

  Index transitions = 0;
  switch (mode.kind) {
    case Kind::RecallK:
    case Kind::EncoderTransitionK:
      transitions = mode.transitions;
      break;
    case Kind::FullRecall:
      transitions = cycle;
      break;
    default:
      break;
  }

  const bool compare_ca3 = standard || mode.kind == Kind::Encoder ||
                           mode.kind == Kind::EncoderTransitionK;
  const Matrix truth = compare_ca3 ? store.ca3_aligned() : store.ec;
  const Matrix cue_source = standard ? truth : store.ec;
  const Index shift = (mode.kind == Kind::RecallK || mode.kind == Kind::EncoderTransitionK)
                          ? transitions
                          : 0;
  const bool wraps = count == cycle;

  std::vector<Index> targets;
  std::vector<Index> cues;
  for (Index t = 0; t < count; ++t) {
    Index cue = t - shift;
    if (cue < 0) {
      if (!wraps) continue;
      cue = ((cue % count) + count) % count;
    }
    targets.push_back(t);
    cues.push_back(cue);
  }

  ForgettingCurve curve;
  curve.name = mode.name();
  const std::size_t n = targets.size();
  curve.pattern_index = targets;
  curve.correlation.resize(n);
  curve.baseline_per_index.resize(n);
  curve.abs_error.resize(n);
  curve.squared_error.resize(n);
  const Vector mean_truth = truth.rowwise().mean();
  if (is_constant(mean_truth)) {
    throw UndefinedCorrelation("mean ground-truth pattern is constant; baseline undefined");
  }
  const Matrix ca3_truth = mode.kind == Kind::Decoder ? store.ca3_aligned() : Matrix();

  for (std::size_t begin = 0; begin < n; begin += kChunk) {
    const std::size_t end = std::min(n, begin + static_cast<std::size_t>(kChunk));
    const auto width = static_cast<Index>(end - begin);
    Matrix input(mode.kind == Kind::Decoder ? ca3_truth.rows() : cue_source.rows(), width);
    for (Index j = 0; j < width; ++j) {
      const auto i = begin + static_cast<std::size_t>(j);
      if (mode.kind == Kind::Decoder) {
        input.col(j) = ca3_truth.col(targets[i]);
      } else if (noise && noise->flip_fraction > 0.0) {
        input.col(j) = corrupt(cue_source.col(cues[i]),
                               NoiseSpec{noise->flip_fraction,
                                         derive_seed(noise->seed, "cue." + std::to_string(cues[i]))});
      } else {
        input.col(j) = cue_source.col(cues[i]);
      }
    }

    Matrix retrieved;
    if (mode.kind == Kind::Decoder) {
      retrieved = model.decode_batch(input);
    } else {
      Matrix state = standard ? input : model.encode_batch(input);
      state = model.transition_batch(state, transitions);
      retrieved = compare_ca3 ? std::move(state) : model.decode_batch(state);
    }

    for (Index j = 0; j < width; ++j) {
      const auto i = begin + static_cast<std::size_t>(j);
      const auto got = retrieved.col(j);
      const auto want = truth.col(targets[i]);
      if (is_constant(got)) {
        curve.correlation[i] = 0.0;
        curve.baseline_per_index[i] = 0.0;
        ++curve.undefined;
      } else {
        curve.correlation[i] = pearson(got, want);
        curve.baseline_per_index[i] = pearson(got, mean_truth);
      }
      const Vector diff = got - want;
      curve.abs_error[i] = diff.cwiseAbs().mean();
      curve.squared_error[i] = diff.squaredNorm() / static_cast<double>(diff.size());
    }
  }

  curve.baseline = n == 0 ? 0.0
                          : std::accumulate(curve.baseline_per_index.begin(),
                                            curve.baseline_per_index.end(), 0.0) /
                                static_cast<double>(n);
  if (n >= 2) {
    std::vector<double> x(targets.begin(), targets.end());
    curve.trend = trendline(x, curve.correlation);
  }
  return curve;
}

}  // namespace crisp
