#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flats {

/// Dataset roles a manifest can bind to files.
enum class Role {
  IndTrain,
  IndTest,
  OodTest,
  AuxOod,
  LogitsIndTest,
  LogitsOodTest,
  LabelsTrain,
};

std::string_view role_name(Role role) noexcept;
std::optional<Role> role_from_name(std::string_view name) noexcept;

inline constexpr std::size_t kDefaultK = 10;
inline constexpr double kDefaultAlpha = 0.5;

/// A resolved manifest: every path exists, is absolute (or relative to the
/// working directory), and every feature pack shares `dim`.
struct Manifest {
  std::filesystem::path source;
  std::map<Role, std::filesystem::path> paths;
  std::size_t dim = 0;
  std::size_t k = kDefaultK;
  double alpha = kDefaultAlpha;
  /// Unknown keys and other non-fatal findings.
  std::vector<std::string> warnings;

  bool has(Role role) const { return paths.contains(role); }
  /// Throws MissingRole naming the role.
  const std::filesystem::path& path(Role role) const;
};

/**
 * Parses a flat JSON object such as
 *
 *     {"ind_train": "train.flts", "ind_test": "test.flts",
 *      "ood_test": "ood.flts", "aux_ood": "wiki.flts",
 *      "dim": 8, "k": 10, "alpha": 0.5}
 *
 * Relative paths resolve against the manifest's directory. `dim` is optional
 * and defaults to the width of `ind_train`.
 *
 * Errors: BadManifest (unparseable, wrong value types), MissingRole,
 * IoFailure (referenced file missing), DimConflict (lists both paths and
 * dims), SizeMismatch (label/logit row counts disagree with their feature
 * pack), plus any pack header error.
 */
Manifest load_manifest(const std::filesystem::path& path);

}  // namespace flats
