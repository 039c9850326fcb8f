#pragma once

#include "crisp/core.hpp"
#include "crisp/eval.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace crisp {

/// A sequence of images laid out left to right, top to bottom.
struct ImageGrid {
  std::string name;
  Matrix images;  // rows*cols pixels x count
  int rows = 0;
  int cols = 0;
  int grid_cols = 20;
  /// Map [min, max] of the whole grid to [0, 255] instead of clamping [0, 1].
  bool rescale = false;
};

struct Report {
  std::string experiment;
  /// Resolved configuration, written verbatim into the manifest.
  std::map<std::string, std::string> config;
  std::map<std::string, std::uint64_t> seeds;
  /// Content hashes of the pre-trained pathways.
  std::map<std::string, std::string> hashes;
  std::map<std::string, double> metrics;
  std::vector<ForgettingCurve> curves;
  std::vector<ImageGrid> images;
};

/// Writes <dir>/manifest.json, one <curve name>.csv per curve and one PGM per
/// image grid. Output is byte-identical for identical reports.
void emit_report(const Report& report, const std::filesystem::path& dir);

/// CSV with columns pattern_index, correlation, baseline, trend_fit,
/// abs_error, squared_error.
void write_curve_csv(const std::filesystem::path& path, const ForgettingCurve& curve);

/// Binary PGM (P5) of the grid with a one pixel gap between tiles.
void write_pgm_grid(const std::filesystem::path& path, const ImageGrid& grid);

}  // namespace crisp
