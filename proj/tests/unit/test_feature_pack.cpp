#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "doctest.h"
#include "flats/error.hpp"
#include "flats/feature_pack.hpp"
#include "flats/random.hpp"
#include "test_support.hpp"

using namespace flats;
using flats::test::error_code_of;
using flats::test::TempDir;

namespace {

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("feature pack round-trips a 2x3 matrix") {
  TempDir dir;
  const auto pack = FeaturePack::from_rows({{1.0, 2.0, 3.0}, {-4.5, 0.25, 1e-7}});
  write_feature_pack(pack, dir / "a.flts");
  const auto back = load_feature_pack(dir / "a.flts");
  CHECK(back.rows() == 2);
  CHECK(back.dim() == 3);
  CHECK(back == pack);
}

TEST_CASE("1x2 matrix [[1, 2]] round-trips and writes are byte-stable") {
  TempDir dir;
  const auto pack = FeaturePack::from_rows({{1.0, 2.0}});
  write_feature_pack(pack, dir / "a.flts");
  write_feature_pack(pack, dir / "b.flts");
  const auto back = load_feature_pack(dir / "a.flts");
  CHECK(back.row(0)[0] == 1.0f);
  CHECK(back.row(0)[1] == 2.0f);
  CHECK(read_bytes(dir / "a.flts") == read_bytes(dir / "b.flts"));
}

TEST_CASE("header layout is magic, version, rows, dim, dtype, little-endian payload") {
  const auto bytes = encode_feature_pack(FeaturePack::from_rows({{1.0, -2.0}}));
  REQUIRE(bytes.size() == kPackHeaderBytes + 8);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "FLTS");
  CHECK(bytes[4] == 1);
  CHECK(bytes[8] == 1);   // n_rows
  CHECK(bytes[16] == 2);  // dim
  CHECK(bytes[24] == 0);  // float32
  // 1.0f = 0x3f800000, little-endian
  CHECK(bytes[25] == 0x00);
  CHECK(bytes[28] == 0x3f);
  CHECK(bytes[32] == 0xc0);  // -2.0f = 0xc0000000
}

TEST_CASE("round-trip identity holds bitwise for random matrices") {
  TempDir dir;
  Rng rng(2024);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t rows = 1 + rng.below(40);
    const std::size_t dim = 2 + rng.below(20);
    std::vector<float> values(rows * dim);
    for (auto& v : values) {
      // Mix ordinary, tiny, huge and negative-zero values.
      switch (rng.below(4)) {
        case 0: v = static_cast<float>(rng.normal()); break;
        case 1: v = static_cast<float>(rng.normal() * 1e-38); break;
        case 2: v = static_cast<float>(rng.normal() * 1e37); break;
        default: v = -0.0f; break;
      }
    }
    const FeaturePack pack(rows, dim, values);
    const auto p = dir / ("r" + std::to_string(trial) + ".flts");
    write_feature_pack(pack, p);
    const auto back = load_feature_pack(p);
    REQUIRE(back.rows() == rows);
    REQUIRE(back.dim() == dim);
    CHECK(std::memcmp(back.values().data(), values.data(), values.size() * sizeof(float)) == 0);
  }
}

TEST_CASE("malformed files map to named errors") {
  TempDir dir;
  const auto good = encode_feature_pack(FeaturePack::from_rows({{1, 2}, {3, 4}, {5, 6}, {7, 8}}));

  SUBCASE("bad magic") {
    auto bytes = good;
    std::copy_n("XXXX", 4, bytes.begin());
    write_bytes(dir / "x.flts", bytes);
    CHECK(error_code_of([&] { load_feature_pack(dir / "x.flts"); }) == ErrorCode::BadMagic);
  }
  SUBCASE("header says 4 rows, payload holds 3") {
    auto bytes = good;
    bytes.resize(bytes.size() - 8);
    write_bytes(dir / "x.flts", bytes);
    CHECK(error_code_of([&] { load_feature_pack(dir / "x.flts"); }) == ErrorCode::SizeMismatch);
  }
  SUBCASE("trailing bytes") {
    auto bytes = good;
    bytes.push_back(0);
    write_bytes(dir / "x.flts", bytes);
    CHECK(error_code_of([&] { load_feature_pack(dir / "x.flts"); }) == ErrorCode::SizeMismatch);
  }
  SUBCASE("NaN in payload names its row") {
    auto bytes = good;
    const float nan = std::numeric_limits<float>::quiet_NaN();
    std::memcpy(bytes.data() + kPackHeaderBytes + 4 * 5, &nan, 4);
    write_bytes(dir / "x.flts", bytes);
    try {
      load_feature_pack(dir / "x.flts");
      FAIL("expected NonFinite");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NonFinite);
      CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    }
  }
  SUBCASE("unsupported version") {
    auto bytes = good;
    bytes[4] = 2;
    write_bytes(dir / "x.flts", bytes);
    CHECK(error_code_of([&] { load_feature_pack(dir / "x.flts"); }) == ErrorCode::UnsupportedVersion);
  }
  SUBCASE("dim below 2") {
    auto bytes = encode_feature_pack(FeaturePack::from_rows({{1, 2}}));
    bytes[16] = 1;
    bytes.resize(bytes.size() - 4);
    write_bytes(dir / "x.flts", bytes);
    CHECK(error_code_of([&] { load_feature_pack(dir / "x.flts"); }) == ErrorCode::SizeMismatch);
  }
  SUBCASE("truncated header") {
    write_bytes(dir / "x.flts", {'F', 'L', 'T', 'S', 1});
    CHECK(error_code_of([&] { load_feature_pack(dir / "x.flts"); }) == ErrorCode::SizeMismatch);
  }
  SUBCASE("logit pack is not a feature pack") {
    write_logit_pack(LogitPack::from_rows({{1, 2}}), dir / "x.fltg");
    CHECK(error_code_of([&] { load_feature_pack(dir / "x.fltg"); }) == ErrorCode::BadMagic);
  }
  SUBCASE("missing file") {
    CHECK(error_code_of([&] { load_feature_pack(dir / "nope.flts"); }) == ErrorCode::IoFailure);
  }
}

TEST_CASE("packs cannot hold non-finite values, so NaN is rejected before any write") {
  const float nan = std::numeric_limits<float>::quiet_NaN();
  CHECK(error_code_of([&] { FeaturePack(1, 2, {1.0f, nan}); }) == ErrorCode::NonFinite);
  CHECK(error_code_of([&] { FeaturePack(1, 2, {INFINITY, 0.0f}); }) == ErrorCode::NonFinite);
  CHECK(error_code_of([&] { FeaturePack(2, 2, {1.0f, 2.0f, 3.0f}); }) == ErrorCode::SizeMismatch);
}

TEST_CASE("writing a one-column pack is refused") {
  TempDir dir;
  const FeaturePack narrow(3, 1, {1.0f, 2.0f, 3.0f});
  CHECK(error_code_of([&] { write_feature_pack(narrow, dir / "n.flts"); }) == ErrorCode::SizeMismatch);
  CHECK_FALSE(std::filesystem::exists(dir / "n.flts"));
}

TEST_CASE("write to an unwritable location is IoFailure") {
  const auto pack = FeaturePack::from_rows({{1, 2}});
  CHECK(error_code_of([&] { write_feature_pack(pack, "/nonexistent-dir/x.flts"); }) == ErrorCode::IoFailure);
}

TEST_CASE("CSV fallback") {
  TempDir dir;
  SUBCASE("header row and values are parsed") {
    std::ofstream(dir / "a.csv") << "f0,f1,f2\n1,2,3\n-0.5, 4e-3 ,7\n";
    const auto pack = load_feature_pack(dir / "a.csv");
    CHECK(pack == FeaturePack::from_rows({{1, 2, 3}, {-0.5, 4e-3, 7}}));
    const auto h = read_pack_header(dir / "a.csv");
    CHECK(h.rows == 2);
    CHECK(h.dim == 3);
  }
  SUBCASE("wrong header") {
    std::ofstream(dir / "a.csv") << "x,y\n1,2\n";
    CHECK(error_code_of([&] { load_feature_pack(dir / "a.csv"); }) == ErrorCode::BadCsv);
  }
  SUBCASE("ragged row") {
    std::ofstream(dir / "a.csv") << "f0,f1\n1,2\n3\n";
    CHECK(error_code_of([&] { load_feature_pack(dir / "a.csv"); }) == ErrorCode::SizeMismatch);
  }
  SUBCASE("unparseable value") {
    std::ofstream(dir / "a.csv") << "f0,f1\n1,abc\n";
    CHECK(error_code_of([&] { load_feature_pack(dir / "a.csv"); }) == ErrorCode::BadCsv);
  }
  SUBCASE("nan value") {
    std::ofstream(dir / "a.csv") << "f0,f1\n1,nan\n";
    CHECK(error_code_of([&] { load_feature_pack(dir / "a.csv"); }) == ErrorCode::NonFinite);
  }
  SUBCASE("10k rows or more must use the binary format") {
    std::ofstream out(dir / "big.csv");
    out << "f0,f1\n";
    for (std::size_t i = 0; i < kCsvMaxRows; ++i) out << "1,2\n";
    out.close();
    CHECK(error_code_of([&] { load_feature_pack(dir / "big.csv"); }) == ErrorCode::BadCsv);
  }
}

TEST_CASE("logit and label packs use their own magic") {
  TempDir dir;
  const auto logits = LogitPack::from_rows({{0.5, -1.0, 2.0}, {3.0, 3.0, 3.0}});
  write_logit_pack(logits, dir / "l.fltg");
  CHECK(load_logit_pack(dir / "l.fltg") == logits);
  CHECK(read_pack_header(dir / "l.fltg").kind == PackKind::Logits);

  const LabelPack labels({0, 1, 1, 0, 2, 2});
  write_label_pack(labels, dir / "y.fltl");
  const auto back = load_label_pack(dir / "y.fltl");
  CHECK(back == labels);
  CHECK(back.n_classes() == 3);
  const auto h = read_pack_header(dir / "y.fltl");
  CHECK(h.kind == PackKind::Labels);
  CHECK(h.dtype == 1);
  CHECK(h.dim == 1);

  CHECK(error_code_of([&] { load_label_pack(dir / "l.fltg"); }) == ErrorCode::BadMagic);
}

TEST_CASE("label invariants") {
  CHECK(error_code_of([] { LabelPack({0, 0, 1}); }) == ErrorCode::ClassTooSmall);
  CHECK(error_code_of([] { LabelPack({0, 0, 2, 2}); }) == ErrorCode::ClassTooSmall);  // class 1 absent
  CHECK(error_code_of([] { LabelPack({0, -1, 0}); }) == ErrorCode::InvalidLabel);
  CHECK(error_code_of([] { LabelPack({0, 0, 3, 3}, 3); }) == ErrorCode::InvalidLabel);
  CHECK(LabelPack({1, 0, 1, 0}).n_classes() == 2);
}
