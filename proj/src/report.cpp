#include "crisp/report.hpp"

#include "crisp/errors.hpp"
#include "text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace crisp {

namespace {

std::ofstream open_for_writing(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

void write_curve_csv(const std::filesystem::path& path, const ForgettingCurve& curve) {
  auto out = open_for_writing(path, std::ios::out);
  out << "pattern_index,correlation,baseline,trend_fit,abs_error,squared_error\n";
  for (std::size_t i = 0; i < curve.correlation.size(); ++i) {
    const double x = static_cast<double>(curve.pattern_index[i]);
    out << curve.pattern_index[i] << ',' << detail::format_double(curve.correlation[i]) << ','
        << detail::format_double(curve.baseline_per_index[i]) << ','
        << detail::format_double(curve.trend.at(x)) << ','
        << detail::format_double(curve.abs_error[i]) << ','
        << detail::format_double(curve.squared_error[i]) << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void write_pgm_grid(const std::filesystem::path& path, const ImageGrid& grid) {
  const Index count = grid.images.cols();
  if (grid.rows <= 0 || grid.cols <= 0 || grid.grid_cols <= 0) {
    throw UsageError("image grid needs positive tile and grid sizes");
  }
  if (grid.images.rows() != Index{grid.rows} * grid.cols) {
    throw UsageError("image grid: pixel count does not match rows*cols");
  }
  const Index across = std::min<Index>(grid.grid_cols, std::max<Index>(count, 1));
  const Index down = (count + across - 1) / across;
  const Index width = across * (grid.cols + 1) - 1;
  const Index height = std::max<Index>(down * (grid.rows + 1) - 1, 1);
  double lo = 0.0;
  double hi = 1.0;
  if (grid.rescale && count > 0) {
    lo = grid.images.minCoeff();
    hi = grid.images.maxCoeff();
    if (hi <= lo) hi = lo + 1.0;
  }
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(width * height), 255);
  for (Index k = 0; k < count; ++k) {
    const Index top = (k / across) * (grid.rows + 1);
    const Index left = (k % across) * (grid.cols + 1);
    for (int r = 0; r < grid.rows; ++r) {
      for (int c = 0; c < grid.cols; ++c) {
        const double v = (grid.images(Index{r} * grid.cols + c, k) - lo) / (hi - lo);
        const auto byte = static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
        pixels[static_cast<std::size_t>((top + r) * width + left + c)] = byte;
      }
    }
  }
  auto out = open_for_writing(path, std::ios::binary);
  out << "P5\n" << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(pixels.data()),
            static_cast<std::streamsize>(pixels.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

void emit_report(const Report& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  nlohmann::ordered_json manifest;
  manifest["experiment"] = report.experiment;
  manifest["config"] = report.config;
  manifest["seeds"] = report.seeds;
  manifest["pretrained_hashes"] = report.hashes;
  manifest["metrics"] = nlohmann::ordered_json::object();
  for (const auto& [key, value] : report.metrics) manifest["metrics"][key] = value;
  manifest["curves"] = nlohmann::ordered_json::array();
  for (const auto& curve : report.curves) {
    const std::string file = curve.name + ".csv";
    write_curve_csv(dir / file, curve);
    manifest["curves"].push_back({{"name", curve.name},
                                  {"file", file},
                                  {"points", curve.size()},
                                  {"mean", curve.mean()},
                                  {"mean_excluding_early", curve.mean_excluding_early()},
                                  {"mean_newest_half", curve.mean_newest(0.5)},
                                  {"baseline", curve.baseline},
                                  {"trend_slope", curve.trend.slope},
                                  {"trend_intercept", curve.trend.intercept},
                                  {"undefined", curve.undefined}});
  }
  manifest["images"] = nlohmann::ordered_json::array();
  for (const auto& grid : report.images) {
    const std::string file = grid.name + ".pgm";
    write_pgm_grid(dir / file, grid);
    manifest["images"].push_back(file);
  }
  const auto path = dir / "manifest.json";
  auto out = open_for_writing(path, std::ios::out);
  out << manifest.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace crisp
