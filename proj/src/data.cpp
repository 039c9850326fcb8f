#include "crisp/data.hpp"

#include "crisp/errors.hpp"
#include "crisp/rng.hpp"
#include "text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

namespace crisp {

namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;
constexpr std::size_t kCifarRecord = 3073;
constexpr Index kCifarPixels = 1024;

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t offset,
                        const std::filesystem::path& path) {
  if (offset + 4 > bytes.size()) {
    throw ParseError(path.string() + ": truncated IDX header", bytes.size());
  }
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void put_be32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                     static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(b, 4);
}

std::ofstream open_output(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void check_activity(double activity) {
  if (!(activity > 0.0 && activity < 1.0)) throw UsageError("activity must lie in (0, 1)");
}

void place_ones(Rng& rng, Eigen::Ref<Vector> column, Index ones) {
  column.setZero();
  for (const auto idx : rng.sample_without_replacement(column.size(), ones)) column(idx) = 1.0;
}

}  // namespace

std::string_view to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::Rand:
      return "rand";
    case DatasetKind::RandCorr:
      return "rand-corr";
    case DatasetKind::Mnist:
      return "mnist";
    case DatasetKind::Cifar:
      return "cifar";
  }
  return "unknown";
}

DatasetKind dataset_kind_from_string(std::string_view name) {
  if (name == "rand") return DatasetKind::Rand;
  if (name == "rand-corr") return DatasetKind::RandCorr;
  if (name == "mnist") return DatasetKind::Mnist;
  if (name == "cifar") return DatasetKind::Cifar;
  throw ConfigError("unknown dataset kind '" + std::string(name) + "'");
}

Index active_count(double activity, Index dim) {
  return static_cast<Index>(std::llround(activity * static_cast<double>(dim)));
}

Dataset gen_rand(Index count, Index dim, double activity, std::uint64_t seed) {
  check_activity(activity);
  if (count < 0 || dim <= 0) throw UsageError("gen_rand: invalid shape");
  const Index ones = active_count(activity, dim);
  if (ones == 0 || ones == dim) {
    throw UsageError("gen_rand: activity " + std::to_string(activity) + " yields " +
                     std::to_string(ones) + " ones out of " + std::to_string(dim));
  }
  Rng rng(seed);
  Dataset data;
  data.kind = DatasetKind::Rand;
  data.patterns = Matrix::Zero(dim, count);
  for (Index t = 0; t < count; ++t) place_ones(rng, data.patterns.col(t), ones);
  return data;
}

Dataset gen_rand_corr(Index count, Index dim, double activity, double flip_fraction,
                      std::uint64_t seed) {
  check_activity(activity);
  if (count < 0 || dim <= 0) throw UsageError("gen_rand_corr: invalid shape");
  const Index ones = active_count(activity, dim);
  const Index flips = static_cast<Index>(std::llround(flip_fraction * static_cast<double>(dim)));
  if (ones == 0 || ones == dim) throw UsageError("gen_rand_corr: degenerate activity");
  if (flips < 2 || flips % 2 != 0) {
    throw UsageError("gen_rand_corr: flip count " + std::to_string(flips) +
                     " must be even and at least 2");
  }
  const Index half = flips / 2;
  if (ones < half || dim - ones < half) {
    throw UsageError("gen_rand_corr: not enough ones/zeros to flip " + std::to_string(flips));
  }

  Rng rng(seed);
  Dataset data;
  data.kind = DatasetKind::RandCorr;
  data.patterns = Matrix::Zero(dim, count);
  if (count == 0) return data;
  place_ones(rng, data.patterns.col(0), ones);

  std::vector<Index> on, off;
  on.reserve(static_cast<std::size_t>(ones));
  off.reserve(static_cast<std::size_t>(dim - ones));
  for (Index t = 1; t < count; ++t) {
    data.patterns.col(t) = data.patterns.col(t - 1);
    on.clear();
    off.clear();
    for (Index i = 0; i < dim; ++i) (data.patterns(i, t) == 1.0 ? on : off).push_back(i);
    for (const auto k : rng.sample_without_replacement(static_cast<std::int64_t>(on.size()), half)) {
      data.patterns(on[static_cast<std::size_t>(k)], t) = 0.0;
    }
    for (const auto k :
         rng.sample_without_replacement(static_cast<std::int64_t>(off.size()), half)) {
      data.patterns(off[static_cast<std::size_t>(k)], t) = 1.0;
    }
  }
  return data;
}

Pattern corrupt(const Eigen::Ref<const Vector>& pattern, const NoiseSpec& spec) {
  if (!is_binary(pattern)) throw UsageError("corrupt expects a binary pattern");
  if (!(spec.flip_fraction >= 0.0 && spec.flip_fraction <= 1.0)) {
    throw UsageError("flip fraction must lie in [0, 1]");
  }
  const Index flips = static_cast<Index>(
      std::llround(spec.flip_fraction * static_cast<double>(pattern.size())));
  Pattern out = pattern;
  Rng rng(spec.seed);
  for (const auto idx : rng.sample_without_replacement(pattern.size(), flips)) {
    out(idx) = 1.0 - out(idx);
  }
  return out;
}

SequenceSelection make_sequence(const Dataset& dataset, Index length, std::uint64_t seed) {
  if (length < 0 || length > dataset.size()) {
    throw UsageError("sequence length " + std::to_string(length) + " exceeds dataset size " +
                     std::to_string(dataset.size()));
  }
  SequenceSelection selection;
  if (dataset.kind == DatasetKind::RandCorr) {
    for (Index i = 0; i < length; ++i) selection.indices.push_back(i);
  } else {
    Rng rng(seed);
    for (const auto i : rng.sample_without_replacement(dataset.size(), length)) {
      selection.indices.push_back(static_cast<Index>(i));
    }
  }
  selection.patterns.resize(dataset.dim(), length);
  for (Index t = 0; t < length; ++t) {
    selection.patterns.col(t) = dataset.patterns.col(selection.indices[static_cast<std::size_t>(t)]);
  }
  return selection;
}

Dataset load_mnist(const std::filesystem::path& images, const std::filesystem::path& labels) {
  const auto bytes = read_bytes(images);
  const auto magic = read_be32(bytes, 0, images);
  if (magic != kIdxImagesMagic) {
    std::ostringstream msg;
    msg << images.string() << ": bad IDX image magic 0x" << std::hex << magic;
    throw ParseError(msg.str(), 0);
  }
  const auto count = read_be32(bytes, 4, images);
  const auto rows = read_be32(bytes, 8, images);
  const auto cols = read_be32(bytes, 12, images);
  const std::size_t pixels = std::size_t{rows} * cols;
  const std::size_t needed = 16 + pixels * count;
  if (bytes.size() < needed) {
    throw ParseError(images.string() + ": truncated image data, expected " +
                         std::to_string(needed) + " bytes",
                     bytes.size());
  }

  Dataset data;
  data.kind = DatasetKind::Mnist;
  data.patterns.resize(static_cast<Index>(pixels), static_cast<Index>(count));
  for (std::size_t n = 0; n < count; ++n) {
    const unsigned char* src = bytes.data() + 16 + n * pixels;
    for (std::size_t p = 0; p < pixels; ++p) {
      data.patterns(static_cast<Index>(p), static_cast<Index>(n)) = src[p] / 255.0;
    }
  }

  if (!labels.empty()) {
    const auto lbytes = read_bytes(labels);
    const auto lmagic = read_be32(lbytes, 0, labels);
    if (lmagic != kIdxLabelsMagic) {
      std::ostringstream msg;
      msg << labels.string() << ": bad IDX label magic 0x" << std::hex << lmagic;
      throw ParseError(msg.str(), 0);
    }
    const auto lcount = read_be32(lbytes, 4, labels);
    if (lcount != count) {
      throw ParseError(labels.string() + ": label count " + std::to_string(lcount) +
                           " does not match image count " + std::to_string(count),
                       4);
    }
    if (lbytes.size() < 8 + std::size_t{lcount}) {
      throw ParseError(labels.string() + ": truncated label data", lbytes.size());
    }
    data.labels.assign(lbytes.begin() + 8, lbytes.begin() + 8 + lcount);
  }
  return data;
}

void write_idx_images(const std::filesystem::path& path, const Matrix& images, int rows, int cols) {
  if (images.rows() != Index{rows} * cols) throw UsageError("image size does not match rows*cols");
  auto out = open_output(path, std::ios::binary);
  put_be32(out, kIdxImagesMagic);
  put_be32(out, static_cast<std::uint32_t>(images.cols()));
  put_be32(out, static_cast<std::uint32_t>(rows));
  put_be32(out, static_cast<std::uint32_t>(cols));
  for (Index n = 0; n < images.cols(); ++n) {
    for (Index p = 0; p < images.rows(); ++p) {
      const double v = std::clamp(images(p, n), 0.0, 1.0);
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void write_idx_labels(const std::filesystem::path& path, const std::vector<std::uint8_t>& labels) {
  auto out = open_output(path, std::ios::binary);
  put_be32(out, kIdxLabelsMagic);
  put_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.write(reinterpret_cast<const char*>(labels.data()),
            static_cast<std::streamsize>(labels.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

Matrix load_cifar_gray(const std::vector<std::filesystem::path>& batches,
                       std::vector<std::uint8_t>* labels) {
  std::vector<std::vector<unsigned char>> contents;
  std::size_t records = 0;
  for (const auto& path : batches) {
    auto bytes = read_bytes(path);
    if (bytes.size() % kCifarRecord != 0) {
      throw ParseError(path.string() + ": length " + std::to_string(bytes.size()) +
                           " is not a multiple of " + std::to_string(kCifarRecord),
                       bytes.size() - bytes.size() % kCifarRecord);
    }
    records += bytes.size() / kCifarRecord;
    contents.push_back(std::move(bytes));
  }
  Matrix gray(kCifarPixels, static_cast<Index>(records));
  if (labels) labels->clear();
  Index column = 0;
  for (const auto& bytes : contents) {
    for (std::size_t r = 0; r < bytes.size() / kCifarRecord; ++r, ++column) {
      const unsigned char* rec = bytes.data() + r * kCifarRecord;
      if (labels) labels->push_back(rec[0]);
      const unsigned char* red = rec + 1;
      const unsigned char* green = red + kCifarPixels;
      const unsigned char* blue = green + kCifarPixels;
      for (Index p = 0; p < kCifarPixels; ++p) {
        gray(p, column) = (static_cast<double>(red[p]) + green[p] + blue[p]) / 3.0;
      }
    }
  }
  return gray;
}

void standardize_rows(Matrix& data) {
  if (data.cols() == 0) return;
  const double n = static_cast<double>(data.cols());
  for (Index r = 0; r < data.rows(); ++r) {
    auto row = data.row(r);
    const double mean = row.sum() / n;
    row.array() -= mean;
    const double variance = row.squaredNorm() / n;
    if (variance > 0.0) row /= std::sqrt(variance);
  }
}

Dataset load_cifar(const std::vector<std::filesystem::path>& batches) {
  Dataset data;
  data.kind = DatasetKind::Cifar;
  data.patterns = load_cifar_gray(batches, &data.labels);
  standardize_rows(data.patterns);
  return data;
}

void write_cifar_batch(const std::filesystem::path& path,
                       const Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>& rgb,
                       const std::vector<std::uint8_t>& labels) {
  if (rgb.rows() != 3 * kCifarPixels || static_cast<std::size_t>(rgb.cols()) != labels.size()) {
    throw UsageError("CIFAR records need 3072 bytes and one label per column");
  }
  auto out = open_output(path, std::ios::binary);
  for (Index n = 0; n < rgb.cols(); ++n) {
    out.put(static_cast<char>(labels[static_cast<std::size_t>(n)]));
    out.write(reinterpret_cast<const char*>(rgb.col(n).data()), 3 * kCifarPixels);
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void write_csv(const std::filesystem::path& path, const Matrix& patterns) {
  auto out = open_output(path, std::ios::out);
  for (Index t = 0; t < patterns.cols(); ++t) {
    for (Index i = 0; i < patterns.rows(); ++i) {
      if (i) out << ',';
      out << detail::format_double(patterns(i, t));
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

Matrix read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::uint64_t offset = 0;
  while (std::getline(in, line)) {
    if (!detail::trim(line).empty()) {
      std::vector<double> values;
      for (const auto field : detail::split(line, ',')) {
        const auto text = detail::trim(field);
        double v = 0.0;
        const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
        if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
          throw ParseError(path.string() + ": invalid number '" + std::string(text) + "'", offset);
        }
        values.push_back(v);
      }
      if (!rows.empty() && values.size() != rows.front().size()) {
        throw ParseError(path.string() + ": ragged row", offset);
      }
      rows.push_back(std::move(values));
    }
    offset += line.size() + 1;
  }
  Matrix out(rows.empty() ? 0 : static_cast<Index>(rows.front().size()),
             static_cast<Index>(rows.size()));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (std::size_t i = 0; i < rows[t].size(); ++i) {
      out(static_cast<Index>(i), static_cast<Index>(t)) = rows[t][i];
    }
  }
  return out;
}

}  // namespace crisp
