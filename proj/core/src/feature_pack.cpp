#include "flats/feature_pack.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>
#include <unistd.h>

#include "flats/atomic_file.hpp"
#include "flats/error.hpp"

namespace flats {

namespace {

constexpr std::array<char, 4> kFeatureMagic{'F', 'L', 'T', 'S'};
constexpr std::array<char, 4> kLogitMagic{'F', 'L', 'T', 'G'};
constexpr std::array<char, 4> kLabelMagic{'F', 'L', 'T', 'L'};

constexpr std::uint8_t kDtypeFloat32 = 0;
constexpr std::uint8_t kDtypeInt32 = 1;

const std::array<char, 4>& magic_for(PackKind kind) {
  switch (kind) {
    case PackKind::Features: return kFeatureMagic;
    case PackKind::Logits: return kLogitMagic;
    case PackKind::Labels: return kLabelMagic;
  }
  return kFeatureMagic;
}

const char* kind_name(PackKind kind) {
  switch (kind) {
    case PackKind::Features: return "feature pack";
    case PackKind::Logits: return "logit pack";
    case PackKind::Labels: return "label pack";
  }
  return "pack";
}

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  static_assert(std::is_unsigned_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
  }
}

template <typename T>
T get_le(const std::uint8_t* p) {
  static_assert(std::is_unsigned_v<T>);
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(p[i]) << (8 * i);
  }
  return value;
}

std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw Error(ErrorCode::IoFailure, "read failed for " + path.string());
  }
  return bytes;
}

bool is_csv(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".csv";
}

std::vector<std::uint8_t> encode(PackKind kind, std::uint64_t rows, std::uint64_t dim, std::uint8_t dtype,
                                 std::span<const std::uint32_t> words) {
  std::vector<std::uint8_t> out;
  out.reserve(kPackHeaderBytes + words.size() * 4);
  const auto& magic = magic_for(kind);
  out.insert(out.end(), magic.begin(), magic.end());
  put_le<std::uint32_t>(out, kPackVersion);
  put_le<std::uint64_t>(out, rows);
  put_le<std::uint64_t>(out, dim);
  out.push_back(dtype);
  for (auto w : words) {
    put_le<std::uint32_t>(out, w);
  }
  return out;
}

std::vector<std::uint32_t> float_words(std::span<const float> values) {
  std::vector<std::uint32_t> words(values.size());
  std::transform(values.begin(), values.end(), words.begin(), [](float v) { return std::bit_cast<std::uint32_t>(v); });
  return words;
}

PackHeader parse_header(std::span<const std::uint8_t> bytes, PackKind expected, const std::filesystem::path& path) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), magic_for(expected).data(), 4) != 0) {
    std::string got = bytes.size() >= 4 ? std::string(reinterpret_cast<const char*>(bytes.data()), 4) : "<short>";
    throw Error(ErrorCode::BadMagic, path.string() + ": expected " + kind_name(expected) + " magic \"" +
                                         std::string(magic_for(expected).data(), 4) + "\" at offset 0, found \"" +
                                         got + "\"");
  }
  if (bytes.size() < kPackHeaderBytes) {
    throw Error(ErrorCode::SizeMismatch, path.string() + ": header truncated at offset " +
                                             std::to_string(bytes.size()) + " (need " +
                                             std::to_string(kPackHeaderBytes) + " bytes)");
  }
  PackHeader h;
  h.kind = expected;
  h.version = get_le<std::uint32_t>(bytes.data() + 4);
  h.rows = get_le<std::uint64_t>(bytes.data() + 8);
  h.dim = get_le<std::uint64_t>(bytes.data() + 16);
  h.dtype = bytes[24];
  if (h.version != kPackVersion) {
    throw Error(ErrorCode::UnsupportedVersion,
                path.string() + ": version " + std::to_string(h.version) + " at offset 4, expected 1");
  }
  const std::uint8_t want_dtype = expected == PackKind::Labels ? kDtypeInt32 : kDtypeFloat32;
  if (h.dtype != want_dtype) {
    throw Error(ErrorCode::BadMagic, path.string() + ": dtype tag " + std::to_string(h.dtype) +
                                         " at offset 24, expected " + std::to_string(want_dtype));
  }
  const std::uint64_t min_dim = expected == PackKind::Labels ? 1 : 2;
  if (h.rows < 1 || h.dim < min_dim || (expected == PackKind::Labels && h.dim != 1)) {
    throw Error(ErrorCode::SizeMismatch, path.string() + ": invalid shape " + std::to_string(h.rows) + "x" +
                                             std::to_string(h.dim) + " at offset 8");
  }
  return h;
}

void check_payload_size(const PackHeader& h, std::size_t file_size, const std::filesystem::path& path) {
  const auto max_elems = (std::numeric_limits<std::uint64_t>::max() - kPackHeaderBytes) / 4;
  if (h.dim != 0 && h.rows > max_elems / h.dim) {
    throw Error(ErrorCode::SizeMismatch, path.string() + ": header shape overflows");
  }
  const std::uint64_t expected = kPackHeaderBytes + h.rows * h.dim * 4;
  if (expected != file_size) {
    throw Error(ErrorCode::SizeMismatch,
                path.string() + ": header declares " + std::to_string(h.rows) + "x" + std::to_string(h.dim) +
                    " (" + std::to_string(expected) + " bytes) but file has " + std::to_string(file_size) +
                    " bytes; payload ends at offset " + std::to_string(file_size));
  }
}

std::vector<float> decode_floats(std::span<const std::uint8_t> bytes, const PackHeader& h,
                                 const std::filesystem::path& path) {
  std::vector<float> values(h.rows * h.dim);
  const std::uint8_t* p = bytes.data() + kPackHeaderBytes;
  for (std::size_t i = 0; i < values.size(); ++i, p += 4) {
    values[i] = std::bit_cast<float>(get_le<std::uint32_t>(p));
    if (!std::isfinite(values[i])) {
      throw Error(ErrorCode::NonFinite, path.string() + ": non-finite value at row " + std::to_string(i / h.dim) +
                                            ", column " + std::to_string(i % h.dim) + " (byte offset " +
                                            std::to_string(kPackHeaderBytes + 4 * i) + ")");
    }
  }
  return values;
}

struct CsvTable {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> values;
};

CsvTable parse_csv(const std::filesystem::path& path, bool header_only) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  }
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      auto first = cell.find_first_not_of(' ');
      cells.push_back(first == std::string::npos ? std::string() : cell.substr(first));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };

  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::BadCsv, path.string() + ": empty file");
  }
  const auto header = split(line);
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] != "f" + std::to_string(j)) {
      throw Error(ErrorCode::BadCsv, path.string() + ": header column " + std::to_string(j) + " is \"" + header[j] +
                                         "\", expected \"f" + std::to_string(j) + "\"");
    }
  }
  CsvTable table;
  table.cols = header.size();
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    if (table.rows + 1 >= kCsvMaxRows) {
      throw Error(ErrorCode::BadCsv, path.string() + ": CSV packs must have fewer than " +
                                         std::to_string(kCsvMaxRows) + " rows; use the binary format");
    }
    ++table.rows;
    if (header_only) continue;
    const auto cells = split(line);
    if (cells.size() != table.cols) {
      throw Error(ErrorCode::SizeMismatch, path.string() + ": line " + std::to_string(line_no) + " has " +
                                               std::to_string(cells.size()) + " fields, header has " +
                                               std::to_string(table.cols));
    }
    for (std::size_t j = 0; j < cells.size(); ++j) {
      float v = 0;
      const auto& c = cells[j];
      auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (ec != std::errc() || ptr != c.data() + c.size()) {
        throw Error(ErrorCode::BadCsv, path.string() + ": cannot parse \"" + c + "\" at line " +
                                           std::to_string(line_no) + ", column " + std::to_string(j));
      }
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::NonFinite, path.string() + ": non-finite value at row " +
                                              std::to_string(table.rows - 1) + ", column " + std::to_string(j));
      }
      table.values.push_back(v);
    }
  }
  if (table.rows < 1 || table.cols < 2) {
    throw Error(ErrorCode::SizeMismatch, path.string() + ": CSV pack has shape " + std::to_string(table.rows) +
                                             "x" + std::to_string(table.cols) + "; need at least 1x2");
  }
  return table;
}

void require_feature_shape(std::size_t rows, std::size_t dim, const char* what) {
  if (rows < 1 || dim < 2) {
    throw Error(ErrorCode::SizeMismatch, std::string(what) + " needs at least 1 row and 2 columns, got " +
                                             std::to_string(rows) + "x" + std::to_string(dim));
  }
}

}  // namespace

// ---- Float32Matrix ---------------------------------------------------------

template <typename Tag>
Float32Matrix<Tag>::Float32Matrix(std::size_t rows, std::size_t cols, std::vector<float> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (rows_ == 0 || cols_ == 0) {
    throw Error(ErrorCode::SizeMismatch, "matrix must have at least one row and one column");
  }
  if (values_.size() != rows_ * cols_) {
    throw Error(ErrorCode::SizeMismatch, "declared " + std::to_string(rows_) + "x" + std::to_string(cols_) +
                                             " but got " + std::to_string(values_.size()) + " values");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw Error(ErrorCode::NonFinite, "non-finite value at row " + std::to_string(i / cols_) + ", column " +
                                            std::to_string(i % cols_));
    }
  }
}

template <typename Tag>
Float32Matrix<Tag> Float32Matrix<Tag>::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) {
    throw Error(ErrorCode::SizeMismatch, "matrix must have at least one row");
  }
  const std::size_t cols = rows.front().size();
  std::vector<float> values;
  values.reserve(rows.size() * cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) {
      throw Error(ErrorCode::SizeMismatch, "row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                                               " values, expected " + std::to_string(cols));
    }
    for (double v : rows[i]) values.push_back(static_cast<float>(v));
  }
  return Float32Matrix(rows.size(), cols, std::move(values));
}

template <typename Tag>
Float32Matrix<Tag> Float32Matrix<Tag>::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  std::vector<std::vector<double>> copy;
  for (const auto& r : rows) copy.emplace_back(r);
  return from_rows(copy);
}

template <typename Tag>
Float32Matrix<Tag> Float32Matrix<Tag>::slice(std::size_t begin, std::size_t count) const {
  if (begin + count > rows_ || count == 0) {
    throw Error(ErrorCode::SizeMismatch, "slice [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                                             ") out of range for " + std::to_string(rows_) + " rows");
  }
  std::vector<float> out(values_.begin() + begin * cols_, values_.begin() + (begin + count) * cols_);
  return Float32Matrix(count, cols_, std::move(out));
}

template class Float32Matrix<FeatureTag>;
template class Float32Matrix<LogitTag>;

// ---- LabelPack -------------------------------------------------------------

LabelPack::LabelPack(std::vector<std::int32_t> labels, std::size_t n_classes) : labels_(std::move(labels)) {
  if (labels_.empty()) {
    throw Error(ErrorCode::SizeMismatch, "label pack must have at least one row");
  }
  std::int32_t max_label = 0;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] < 0) {
      throw Error(ErrorCode::InvalidLabel, "negative class id " + std::to_string(labels_[i]) + " at row " +
                                               std::to_string(i));
    }
    max_label = std::max(max_label, labels_[i]);
  }
  n_classes_ = n_classes == 0 ? static_cast<std::size_t>(max_label) + 1 : n_classes;
  std::vector<std::size_t> counts(n_classes_, 0);
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (static_cast<std::size_t>(labels_[i]) >= n_classes_) {
      throw Error(ErrorCode::InvalidLabel, "class id " + std::to_string(labels_[i]) + " at row " +
                                               std::to_string(i) + " is not below K=" + std::to_string(n_classes_));
    }
    ++counts[labels_[i]];
  }
  for (std::size_t c = 0; c < n_classes_; ++c) {
    if (counts[c] < 2) {
      throw Error(ErrorCode::ClassTooSmall, "class " + std::to_string(c) + " has " + std::to_string(counts[c]) +
                                                " samples; at least 2 required");
    }
  }
}

// ---- atomic writes ---------------------------------------------------------

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::IoFailure, "cannot open " + tmp.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw Error(ErrorCode::IoFailure, "write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::IoFailure, "cannot rename onto " + path.string());
  }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// ---- loading ---------------------------------------------------------------

PackHeader read_pack_header(const std::filesystem::path& path) {
  if (is_csv(path)) {
    auto table = parse_csv(path, true);
    PackHeader h;
    h.rows = table.rows;
    h.dim = table.cols;
    return h;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  }
  std::array<std::uint8_t, kPackHeaderBytes> head{};
  in.read(reinterpret_cast<char*>(head.data()), head.size());
  const auto got = static_cast<std::size_t>(in.gcount());
  std::span<const std::uint8_t> bytes(head.data(), got);

  PackKind kind = PackKind::Features;
  if (got >= 4) {
    if (std::memcmp(head.data(), kLogitMagic.data(), 4) == 0) kind = PackKind::Logits;
    if (std::memcmp(head.data(), kLabelMagic.data(), 4) == 0) kind = PackKind::Labels;
  }
  auto h = parse_header(bytes, kind, path);
  check_payload_size(h, std::filesystem::file_size(path), path);
  return h;
}

FeaturePack load_feature_pack(const std::filesystem::path& path) {
  if (is_csv(path)) {
    auto table = parse_csv(path, false);
    return FeaturePack(table.rows, table.cols, std::move(table.values));
  }
  const auto bytes = read_all(path);
  const auto h = parse_header(bytes, PackKind::Features, path);
  check_payload_size(h, bytes.size(), path);
  return FeaturePack(h.rows, h.dim, decode_floats(bytes, h, path));
}

LogitPack load_logit_pack(const std::filesystem::path& path) {
  const auto bytes = read_all(path);
  const auto h = parse_header(bytes, PackKind::Logits, path);
  check_payload_size(h, bytes.size(), path);
  return LogitPack(h.rows, h.dim, decode_floats(bytes, h, path));
}

LabelPack load_label_pack(const std::filesystem::path& path) {
  const auto bytes = read_all(path);
  const auto h = parse_header(bytes, PackKind::Labels, path);
  check_payload_size(h, bytes.size(), path);
  std::vector<std::int32_t> labels(h.rows);
  const std::uint8_t* p = bytes.data() + kPackHeaderBytes;
  for (auto& l : labels) {
    l = static_cast<std::int32_t>(get_le<std::uint32_t>(p));
    p += 4;
  }
  return LabelPack(std::move(labels));
}

// ---- writing ---------------------------------------------------------------

std::vector<std::uint8_t> encode_feature_pack(const FeaturePack& pack) {
  require_feature_shape(pack.rows(), pack.dim(), "feature pack");
  return encode(PackKind::Features, pack.rows(), pack.dim(), kDtypeFloat32, float_words(pack.values()));
}

void write_feature_pack(const FeaturePack& pack, const std::filesystem::path& path) {
  write_file_atomic(path, encode_feature_pack(pack));
}

void write_logit_pack(const LogitPack& pack, const std::filesystem::path& path) {
  require_feature_shape(pack.rows(), pack.n_classes(), "logit pack");
  write_file_atomic(path, encode(PackKind::Logits, pack.rows(), pack.n_classes(), kDtypeFloat32,
                                 float_words(pack.values())));
}

void write_label_pack(const LabelPack& pack, const std::filesystem::path& path) {
  std::vector<std::uint32_t> words(pack.rows());
  std::transform(pack.labels().begin(), pack.labels().end(), words.begin(),
                 [](std::int32_t l) { return static_cast<std::uint32_t>(l); });
  write_file_atomic(path, encode(PackKind::Labels, pack.rows(), 1, kDtypeInt32, words));
}

}  // namespace flats
