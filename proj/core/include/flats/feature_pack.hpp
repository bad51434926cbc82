#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <span>
#include <vector>

namespace flats {

/**
 * @file feature_pack.hpp
 *
 * @brief In-memory packs and the on-disk container shared by features,
 * logits and labels.
 *
 * Container layout (all integers little-endian):
 *
 *     offset  size  field
 *     0       4     magic: "FLTS" (features), "FLTG" (logits), "FLTL" (labels)
 *     4       4     version u32 = 1
 *     8       8     n_rows u64
 *     16      8     dim u64 (labels: 1)
 *     24      1     dtype u8: 0 = float32, 1 = int32 (labels only)
 *     25      ...   payload, row-major, n_rows * dim elements
 *
 * Feature packs with a `.csv` extension are parsed as text instead: a header
 * row `f0,f1,...,f{m-1}` followed by one sample per line, fewer than 10000
 * rows.
 */

inline constexpr std::uint32_t kPackVersion = 1;
inline constexpr std::size_t kPackHeaderBytes = 25;
inline constexpr std::size_t kCsvMaxRows = 10000;

enum class PackKind : std::uint8_t { Features, Logits, Labels };

/// Row-major float32 matrix with at least one row and one column and only
/// finite entries. The tag keeps features and logits from being mixed up.
template <typename Tag>
class Float32Matrix {
 public:
  Float32Matrix() = default;

  /// Validates shape and finiteness; throws SizeMismatch or NonFinite.
  Float32Matrix(std::size_t rows, std::size_t cols, std::vector<float> values);

  /// Convenience for fixtures: each inner list is one row.
  static Float32Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Float32Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0; }

  std::span<const float> row(std::size_t i) const noexcept {
    return {values_.data() + i * cols_, cols_};
  }
  std::span<const float> values() const noexcept { return values_; }

  /// Copy of rows [begin, begin + count).
  Float32Matrix slice(std::size_t begin, std::size_t count) const;

  friend bool operator==(const Float32Matrix&, const Float32Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> values_;
};

struct FeatureTag {};
struct LogitTag {};

/// Encoder features, rows = samples. `dim()` is the embedding width.
class FeaturePack : public Float32Matrix<FeatureTag> {
 public:
  using Float32Matrix<FeatureTag>::Float32Matrix;
  FeaturePack(Float32Matrix<FeatureTag> m) : Float32Matrix<FeatureTag>(std::move(m)) {}
  std::size_t dim() const noexcept { return cols(); }
};

/// Raw classifier outputs, rows = samples, cols = classes.
class LogitPack : public Float32Matrix<LogitTag> {
 public:
  using Float32Matrix<LogitTag>::Float32Matrix;
  LogitPack(Float32Matrix<LogitTag> m) : Float32Matrix<LogitTag>(std::move(m)) {}
  std::size_t n_classes() const noexcept { return cols(); }
};

/// Integer class ids in [0, n_classes). Every class 0..n_classes-1 appears
/// at least twice.
class LabelPack {
 public:
  LabelPack() = default;
  /// `n_classes` of 0 means "max label + 1".
  explicit LabelPack(std::vector<std::int32_t> labels, std::size_t n_classes = 0);

  std::size_t rows() const noexcept { return labels_.size(); }
  std::size_t n_classes() const noexcept { return n_classes_; }
  std::span<const std::int32_t> labels() const noexcept { return labels_; }
  std::int32_t operator[](std::size_t i) const noexcept { return labels_[i]; }

  friend bool operator==(const LabelPack&, const LabelPack&) = default;

 private:
  std::vector<std::int32_t> labels_;
  std::size_t n_classes_ = 0;
};

struct PackHeader {
  PackKind kind = PackKind::Features;
  std::uint32_t version = kPackVersion;
  std::uint64_t rows = 0;
  std::uint64_t dim = 0;
  std::uint8_t dtype = 0;
};

/// Reads and validates only the header (and, for CSV, the shape).
PackHeader read_pack_header(const std::filesystem::path& path);

FeaturePack load_feature_pack(const std::filesystem::path& path);
LogitPack load_logit_pack(const std::filesystem::path& path);
LabelPack load_label_pack(const std::filesystem::path& path);

/// Writes are atomic (temporary file, then rename) and byte-stable.
void write_feature_pack(const FeaturePack& pack, const std::filesystem::path& path);
void write_logit_pack(const LogitPack& pack, const std::filesystem::path& path);
void write_label_pack(const LabelPack& pack, const std::filesystem::path& path);

/// Serialized container bytes, as written to disk.
std::vector<std::uint8_t> encode_feature_pack(const FeaturePack& pack);

}  // namespace flats
