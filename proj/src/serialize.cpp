#include "crisp/serialize.hpp"

#include "crisp/errors.hpp"
#include "text.hpp"

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace crisp {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic = {'C', 'R', 'S', 'P'};
constexpr std::size_t kHeaderSize = 20;
constexpr std::size_t kDigestSize = 20;

std::array<std::uint8_t, kDigestSize> sha1(const std::uint8_t* data, std::size_t size) {
  std::array<std::uint8_t, kDigestSize> digest{};
  unsigned int length = 0;
  if (EVP_Digest(data, size, digest.data(), &length, EVP_sha1(), nullptr) != 1 ||
      length != kDigestSize) {
    throw Error("SHA-1 computation failed");
  }
  return digest;
}

class Writer {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void vector(const Vector& v) {
    u64(static_cast<std::uint64_t>(v.size()));
    for (Index i = 0; i < v.size(); ++i) f64(v(i));
  }
  void matrix(const Matrix& m) {
    u64(static_cast<std::uint64_t>(m.rows()));
    u64(static_cast<std::uint64_t>(m.cols()));
    bytes_.reserve(bytes_.size() + static_cast<std::size_t>(m.size()) * 8);
    const double* data = m.data();
    for (Index i = 0; i < m.size(); ++i) f64(data[i]);
  }
  Bytes take() { return std::move(bytes_); }

 private:
  Bytes bytes_;
};

class Reader {
 public:
  Reader(const Bytes& bytes, std::size_t begin, std::size_t end)
      : bytes_(bytes), pos_(begin), end_(end) {}

  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() { return std::bit_cast<double>(u64()); }
  Index count() {
    const std::size_t at = pos_;
    const std::uint64_t v = u64();
    if (v > (end_ - pos_) / 8 + 1) throw ParseError("implausible element count", at);
    return static_cast<Index>(v);
  }
  Vector vector() {
    const Index n = count();
    need(static_cast<std::size_t>(n) * 8);
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = f64();
    return v;
  }
  Matrix matrix() {
    const std::size_t at = pos_;
    const std::uint64_t rows = u64();
    const std::uint64_t cols = u64();
    if (rows != 0 && cols > (end_ - pos_) / 8 / rows) {
      throw ParseError("matrix of " + std::to_string(rows) + "x" + std::to_string(cols) +
                           " exceeds the payload",
                       at);
    }
    Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    double* data = m.data();
    for (Index i = 0; i < m.size(); ++i) data[i] = f64();
    return m;
  }
  Activation activation() {
    const std::size_t at = pos_;
    const std::uint8_t v = u8();
    if (v > static_cast<std::uint8_t>(Activation::Step)) {
      throw ParseError("unknown activation code " + std::to_string(v), at);
    }
    return static_cast<Activation>(v);
  }
  std::size_t position() const { return pos_; }
  void finish() const {
    if (pos_ != end_) throw ParseError("trailing bytes in payload", pos_);
  }

 private:
  void need(std::size_t n) const {
    if (end_ - pos_ < n) throw ParseError("unexpected end of payload", pos_);
  }

  const Bytes& bytes_;
  std::size_t pos_;
  std::size_t end_;
};

Bytes wrap(RecordKind kind, Bytes payload) {
  Writer header;
  for (auto c : kMagic) header.u8(c);
  header.u32(kFormatVersion);
  header.u32(static_cast<std::uint32_t>(kind));
  header.u64(payload.size());
  Bytes out = header.take();
  out.insert(out.end(), payload.begin(), payload.end());
  const auto digest = sha1(out.data(), out.size());
  out.insert(out.end(), digest.begin(), digest.end());
  return out;
}

// Validates the container and returns a reader over the payload.
Reader unwrap(const Bytes& bytes, RecordKind expected) {
  if (bytes.size() < kHeaderSize) throw ParseError("file too short for a CRSP header", bytes.size());
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw ParseError("bad magic, expected CRSP", 0);
  }
  Reader header(bytes, 4, kHeaderSize);
  const std::uint32_t version = header.u32();
  if (version != kFormatVersion) {
    throw ParseError("unsupported format version " + std::to_string(version), 4);
  }
  const std::uint32_t kind = header.u32();
  if (kind != static_cast<std::uint32_t>(expected)) {
    throw ParseError("record kind " + std::to_string(kind) + ", expected " +
                         std::to_string(static_cast<std::uint32_t>(expected)),
                     8);
  }
  const std::uint64_t length = header.u64();
  if (length > bytes.size() - kHeaderSize || bytes.size() - kHeaderSize - length != kDigestSize) {
    throw ParseError("payload length does not match file size", 12);
  }
  const std::size_t end = kHeaderSize + static_cast<std::size_t>(length);
  const auto digest = sha1(bytes.data(), end);
  if (!std::equal(digest.begin(), digest.end(), bytes.begin() + static_cast<std::ptrdiff_t>(end))) {
    throw IntegrityError("content hash mismatch");
  }
  return Reader(bytes, kHeaderSize, end);
}

void put(Writer& w, const Pathway& p) {
  w.u64(static_cast<std::uint64_t>(p.input_dim()));
  w.u64(static_cast<std::uint64_t>(p.output_dim()));
  w.u8(static_cast<std::uint8_t>(p.activation));
  w.u64(p.update_count);
  w.vector(p.offsets);
  w.vector(p.bias);
  w.matrix(p.weights);
}

Pathway get_pathway(Reader& r) {
  const std::size_t at = r.position();
  Pathway p;
  const auto in = r.u64();
  const auto out = r.u64();
  p.activation = r.activation();
  p.update_count = r.u64();
  p.offsets = r.vector();
  p.bias = r.vector();
  p.weights = r.matrix();
  if (static_cast<std::uint64_t>(p.input_dim()) != in ||
      static_cast<std::uint64_t>(p.output_dim()) != out) {
    throw ParseError("pathway header dims disagree with the weight matrix", at);
  }
  try {
    p.validate();
  } catch (const ConfigError& e) {
    throw ParseError(e.what(), at);
  }
  return p;
}

void put(Writer& w, const AutoEncoderPathway& ae) {
  w.u64(static_cast<std::uint64_t>(ae.visible_dim()));
  w.u64(static_cast<std::uint64_t>(ae.hidden_dim()));
  w.u8(static_cast<std::uint8_t>(ae.encode_activation));
  w.u8(static_cast<std::uint8_t>(ae.decode_activation));
  w.u64(ae.update_count);
  w.vector(ae.visible_offsets);
  w.vector(ae.hidden_offsets);
  w.vector(ae.target_hidden_activity);
  w.vector(ae.encode_bias);
  w.vector(ae.decode_bias);
  w.matrix(ae.weights);
}

AutoEncoderPathway get_autoencoder(Reader& r) {
  const std::size_t at = r.position();
  AutoEncoderPathway ae;
  const auto vis = r.u64();
  const auto hid = r.u64();
  ae.encode_activation = r.activation();
  ae.decode_activation = r.activation();
  ae.update_count = r.u64();
  ae.visible_offsets = r.vector();
  ae.hidden_offsets = r.vector();
  ae.target_hidden_activity = r.vector();
  ae.encode_bias = r.vector();
  ae.decode_bias = r.vector();
  ae.weights = r.matrix();
  if (static_cast<std::uint64_t>(ae.visible_dim()) != vis ||
      static_cast<std::uint64_t>(ae.hidden_dim()) != hid) {
    throw ParseError("auto encoder header dims disagree with the weight matrix", at);
  }
  try {
    ae.validate();
  } catch (const ConfigError& e) {
    throw ParseError(e.what(), at);
  }
  return ae;
}

void put(Writer& w, const IntrinsicSequence& s) {
  w.f64(s.activity);
  w.matrix(s.patterns);
}

IntrinsicSequence get_intrinsic(Reader& r) {
  IntrinsicSequence s;
  s.activity = r.f64();
  s.patterns = r.matrix();
  return s;
}

void put_optional(Writer& w, const std::optional<AutoEncoderPathway>& ae) {
  w.u8(ae ? 1 : 0);
  if (ae) put(w, *ae);
}

std::optional<AutoEncoderPathway> get_optional(Reader& r) {
  const std::size_t at = r.position();
  const std::uint8_t flag = r.u8();
  if (flag > 1) throw ParseError("bad presence flag", at);
  if (!flag) return std::nullopt;
  return get_autoencoder(r);
}

template <typename T>
Bytes single(RecordKind kind, const T& value) {
  Writer w;
  put(w, value);
  return wrap(kind, w.take());
}

}  // namespace

Bytes serialize(const Pathway& pathway) { return single(RecordKind::Pathway, pathway); }
Bytes serialize(const AutoEncoderPathway& ae) { return single(RecordKind::AutoEncoder, ae); }
Bytes serialize(const IntrinsicSequence& sequence) {
  return single(RecordKind::Intrinsic, sequence);
}

Bytes serialize(const Ca3Scaffold& scaffold) {
  Writer w;
  put(w, scaffold.sequence);
  put(w, scaffold.recurrent);
  return wrap(RecordKind::Ca3Scaffold, w.take());
}

Bytes serialize(const HippocampusModel& model) {
  const ModelConfig& c = model.config();
  Writer w;
  w.i64(c.n);
  w.u8(static_cast<std::uint8_t>(c.variant));
  w.f64(c.ca3_activity);
  w.f64(c.dg_activity);
  w.f64(c.ec_activity);
  w.u8(c.eta ? 1 : 0);
  w.f64(c.eta.value_or(0.0));
  w.i64(c.intrinsic_length);
  w.f64(c.init_std);
  w.i64(model.stored_count());
  w.i64(model.start_index());
  put(w, model.intrinsic());
  put(w, model.recurrent());
  put(w, model.encoder());
  put(w, model.decoder());
  put_optional(w, model.dentate());
  put_optional(w, model.si_codec());
  return wrap(RecordKind::Model, w.take());
}

Pathway deserialize_pathway(const Bytes& bytes) {
  Reader r = unwrap(bytes, RecordKind::Pathway);
  Pathway p = get_pathway(r);
  r.finish();
  return p;
}

AutoEncoderPathway deserialize_autoencoder(const Bytes& bytes) {
  Reader r = unwrap(bytes, RecordKind::AutoEncoder);
  AutoEncoderPathway ae = get_autoencoder(r);
  r.finish();
  return ae;
}

IntrinsicSequence deserialize_intrinsic(const Bytes& bytes) {
  Reader r = unwrap(bytes, RecordKind::Intrinsic);
  IntrinsicSequence s = get_intrinsic(r);
  r.finish();
  return s;
}

Ca3Scaffold deserialize_ca3(const Bytes& bytes) {
  Reader r = unwrap(bytes, RecordKind::Ca3Scaffold);
  Ca3Scaffold scaffold;
  scaffold.sequence = get_intrinsic(r);
  scaffold.recurrent = get_pathway(r);
  r.finish();
  return scaffold;
}

HippocampusModel deserialize_model(const Bytes& bytes) {
  Reader r = unwrap(bytes, RecordKind::Model);
  ModelConfig c;
  c.n = static_cast<int>(r.i64());
  const std::size_t variant_at = r.position();
  const std::uint8_t variant = r.u8();
  if (variant > static_cast<std::uint8_t>(Variant::StandardFramework)) {
    throw ParseError("unknown model variant code", variant_at);
  }
  c.variant = static_cast<Variant>(variant);
  c.ca3_activity = r.f64();
  c.dg_activity = r.f64();
  c.ec_activity = r.f64();
  const bool has_eta = r.u8() != 0;
  const double eta = r.f64();
  if (has_eta) c.eta = eta;
  c.intrinsic_length = r.i64();
  c.init_std = r.f64();
  const Index stored = r.i64();
  const Index start = r.i64();
  IntrinsicSequence intrinsic = get_intrinsic(r);
  Pathway recurrent = get_pathway(r);
  Pathway encoder = get_pathway(r);
  Pathway decoder = get_pathway(r);
  auto dentate = get_optional(r);
  auto si = get_optional(r);
  r.finish();
  try {
    return HippocampusModel::from_parts(c, std::move(intrinsic), std::move(recurrent),
                                        std::move(encoder), std::move(decoder), std::move(dentate),
                                        std::move(si), stored, start);
  } catch (const ConfigError& e) {
    throw ParseError(std::string("inconsistent model snapshot: ") + e.what(), kHeaderSize);
  }
}

void write_bytes(const std::filesystem::path& path, const Bytes& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

Bytes read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::string sha1_hex(const Bytes& bytes) {
  const auto digest = sha1(bytes.data(), bytes.size());
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (auto b : digest) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xF]);
  }
  return out;
}

std::string content_hash(const Bytes& bytes) {
  const std::string prefix = "blob " + std::to_string(bytes.size()) + '\0';
  Bytes blob(prefix.begin(), prefix.end());
  blob.insert(blob.end(), bytes.begin(), bytes.end());
  return sha1_hex(blob);
}

void write_pathway_csv(const std::filesystem::path& path, const Pathway& pathway) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "# in=" << pathway.input_dim() << " out=" << pathway.output_dim()
      << " activation=" << to_string(pathway.activation) << " offsets=";
  for (Index i = 0; i < pathway.offsets.size(); ++i) {
    if (i) out << ';';
    out << detail::format_double(pathway.offsets(i));
  }
  out << '\n';
  for (Index i = 0; i < pathway.input_dim(); ++i) {
    for (Index j = 0; j < pathway.output_dim(); ++j) {
      if (j) out << ',';
      out << detail::format_double(pathway.weights(i, j));
    }
    out << '\n';
  }
  out << "bias";
  for (Index j = 0; j < pathway.bias.size(); ++j) out << ',' << detail::format_double(pathway.bias(j));
  out << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace crisp
