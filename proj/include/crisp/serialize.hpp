#pragma once

#include "crisp/core.hpp"
#include "crisp/model.hpp"
#include "crisp/pretrain.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace crisp {

/// Binary container, all integers and doubles little-endian:
///
///   offset  size  field
///   0       4     magic "CRSP"
///   4       4     format version (u32, currently 1)
///   8       4     record kind (u32, see RecordKind)
///   12      8     payload length in bytes (u64)
///   20      n     payload
///   20+n    20    SHA-1 over bytes [0, 20+n)
///
/// Matrices are stored as u64 rows, u64 cols, then column-major f64 values.
/// A Pathway payload is: u64 in, u64 out, u8 activation, u64 update count,
/// offsets, bias, weights. An auto encoder payload is: u64 visible, u64 hidden,
/// u8 encode activation, u8 decode activation, u64 update count, visible
/// offsets, hidden offsets, target hidden activity, encode bias, decode bias,
/// weights.
enum class RecordKind : std::uint32_t {
  Pathway = 1,
  AutoEncoder = 2,
  Intrinsic = 3,
  Ca3Scaffold = 4,
  Model = 5,
};

inline constexpr std::uint32_t kFormatVersion = 1;

using Bytes = std::vector<std::uint8_t>;

Bytes serialize(const Pathway& pathway);
Bytes serialize(const AutoEncoderPathway& ae);
Bytes serialize(const IntrinsicSequence& sequence);
Bytes serialize(const Ca3Scaffold& scaffold);
Bytes serialize(const HippocampusModel& model);

/// Each loader checks magic, version, kind, length and hash. Structural
/// problems raise ParseError with the byte offset; a hash mismatch raises
/// IntegrityError.
Pathway deserialize_pathway(const Bytes& bytes);
AutoEncoderPathway deserialize_autoencoder(const Bytes& bytes);
IntrinsicSequence deserialize_intrinsic(const Bytes& bytes);
Ca3Scaffold deserialize_ca3(const Bytes& bytes);
HippocampusModel deserialize_model(const Bytes& bytes);

void write_bytes(const std::filesystem::path& path, const Bytes& bytes);
Bytes read_bytes(const std::filesystem::path& path);

/// Lower-case hex SHA-1.
std::string sha1_hex(const Bytes& bytes);
/// Git blob id: SHA-1 of "blob <size>\0" followed by the content.
std::string content_hash(const Bytes& bytes);

/// Pathway as CSV: a `#` header line with dims, activation and offsets, then
/// one weight row per input unit, and a final `bias` row.
void write_pathway_csv(const std::filesystem::path& path, const Pathway& pathway);

}  // namespace crisp
