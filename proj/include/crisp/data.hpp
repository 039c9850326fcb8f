#pragma once

#include "crisp/core.hpp"

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

namespace crisp {

enum class DatasetKind : std::uint8_t { Rand, RandCorr, Mnist, Cifar };

std::string_view to_string(DatasetKind kind);
DatasetKind dataset_kind_from_string(std::string_view name);

/// Ordered collection of equally sized patterns, one per column.
struct Dataset {
  Matrix patterns;  // dim x count
  DatasetKind kind = DatasetKind::Rand;
  std::vector<std::uint8_t> labels;  // parsed for real data, unused by the model

  Index dim() const { return patterns.rows(); }
  Index size() const { return patterns.cols(); }
  auto pattern(Index t) const { return patterns.col(t); }
};

struct NoiseSpec {
  double flip_fraction = 0.0;
  std::uint64_t seed = 0;
};

/// Number of ones in a pattern of dimension `dim` at the given activity.
Index active_count(double activity, Index dim);

/// `count` binary patterns with exactly round(activity*dim) ones each.
Dataset gen_rand(Index count, Index dim, double activity, std::uint64_t seed);

/// Temporally correlated chain: each successor flips k/2 ones to zero and k/2
/// zeros to one of its predecessor, with k = round(flip_fraction*dim).
Dataset gen_rand_corr(Index count, Index dim, double activity, double flip_fraction,
                      std::uint64_t seed);

/// Flips exactly round(flip_fraction*dim) distinct bits of a binary pattern.
Pattern corrupt(const Eigen::Ref<const Vector>& pattern, const NoiseSpec& spec);

/// Input side of a stored sequence: which dataset rows were chosen and the
/// chosen patterns in order.
struct SequenceSelection {
  std::vector<Index> indices;
  Matrix patterns;
};

/// Chooses `length` patterns without replacement. RandCorr keeps the first
/// `length` patterns in chain order; the other kinds draw a random subset.
SequenceSelection make_sequence(const Dataset& dataset, Index length, std::uint64_t seed);

/// IDX image file (magic 0x00000803) plus optional label file (0x00000801).
/// Bytes are scaled to [0, 1].
Dataset load_mnist(const std::filesystem::path& images,
                   const std::filesystem::path& labels = {});

/// Writers used for fixtures and round-trip tests. `images` holds values in
/// [0, 1], one image per column, rows*cols entries each.
void write_idx_images(const std::filesystem::path& path, const Matrix& images, int rows, int cols);
void write_idx_labels(const std::filesystem::path& path, const std::vector<std::uint8_t>& labels);

/// CIFAR-10 binary batches: 3073-byte records (label, 1024 R, 1024 G, 1024 B).
/// Converted to gray (channel mean) and standardized per pixel position over
/// the whole loaded set.
Dataset load_cifar(const std::vector<std::filesystem::path>& batches);

/// Gray values in [0, 255] before standardization, one image per column.
Matrix load_cifar_gray(const std::vector<std::filesystem::path>& batches,
                       std::vector<std::uint8_t>* labels = nullptr);

/// Per-row standardization to zero mean and unit (population) variance.
/// Rows with zero variance are only centered.
void standardize_rows(Matrix& data);

/// Writes raw CIFAR records; `rgb` holds 3072 byte values per column.
void write_cifar_batch(const std::filesystem::path& path,
                       const Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>& rgb,
                       const std::vector<std::uint8_t>& labels);

/// One pattern per row, comma separated.
void write_csv(const std::filesystem::path& path, const Matrix& patterns);
Matrix read_csv(const std::filesystem::path& path);

}  // namespace crisp
