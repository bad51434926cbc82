#include "flats/manifest.hpp"

#include <array>
#include <fstream>
#include <utility>

#include "flats/error.hpp"
#include "flats/feature_pack.hpp"
#include "json.hpp"

namespace flats {

namespace {

constexpr std::array<std::pair<Role, std::string_view>, 7> kRoleNames{{
    {Role::IndTrain, "ind_train"},
    {Role::IndTest, "ind_test"},
    {Role::OodTest, "ood_test"},
    {Role::AuxOod, "aux_ood"},
    {Role::LogitsIndTest, "logits_ind_test"},
    {Role::LogitsOodTest, "logits_ood_test"},
    {Role::LabelsTrain, "labels_train"},
}};

constexpr std::array<Role, 3> kRequired{Role::IndTrain, Role::IndTest, Role::OodTest};
constexpr std::array<Role, 4> kFeatureRoles{Role::IndTrain, Role::IndTest, Role::OodTest, Role::AuxOod};

}  // namespace

std::string_view role_name(Role role) noexcept {
  for (const auto& [r, name] : kRoleNames) {
    if (r == role) return name;
  }
  return "unknown";
}

std::optional<Role> role_from_name(std::string_view name) noexcept {
  for (const auto& [r, n] : kRoleNames) {
    if (n == name) return r;
  }
  return std::nullopt;
}

const std::filesystem::path& Manifest::path(Role role) const {
  auto it = paths.find(role);
  if (it == paths.end()) {
    throw Error(ErrorCode::MissingRole, std::string(role_name(role)) + " required but not in manifest " +
                                            source.string());
  }
  return it->second;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoFailure, "cannot open manifest " + path.string());
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::BadManifest, path.string() + ": " + e.what());
  }
  if (!doc.is_object()) {
    throw Error(ErrorCode::BadManifest, path.string() + ": manifest must be a JSON object");
  }

  Manifest m;
  m.source = path;
  const auto base = path.parent_path();
  std::optional<std::size_t> declared_dim;

  for (const auto& [key, value] : doc.items()) {
    if (auto role = role_from_name(key)) {
      if (!value.is_string()) {
        throw Error(ErrorCode::BadManifest, path.string() + ": \"" + key + "\" must be a path string");
      }
      std::filesystem::path p = value.get<std::string>();
      m.paths[*role] = p.is_absolute() ? p : base / p;
    } else if (key == "dim" || key == "k") {
      if (!value.is_number_unsigned() || value.get<std::size_t>() == 0) {
        throw Error(ErrorCode::BadManifest, path.string() + ": \"" + key + "\" must be a positive integer");
      }
      if (key == "dim") {
        declared_dim = value.get<std::size_t>();
      } else {
        m.k = value.get<std::size_t>();
      }
    } else if (key == "alpha") {
      if (!value.is_number() || value.get<double>() < 0.0) {
        throw Error(ErrorCode::BadManifest, path.string() + ": \"alpha\" must be a non-negative number");
      }
      m.alpha = value.get<double>();
    } else {
      m.warnings.push_back("ignoring unknown manifest key \"" + key + "\"");
    }
  }

  for (Role r : kRequired) {
    if (!m.has(r)) {
      throw Error(ErrorCode::MissingRole, std::string(role_name(r)) + " missing from manifest " + path.string());
    }
  }
  for (const auto& [role, p] : m.paths) {
    if (!std::filesystem::exists(p)) {
      throw Error(ErrorCode::IoFailure,
                  std::string(role_name(role)) + ": referenced file " + p.string() + " does not exist");
    }
  }

  std::map<Role, PackHeader> headers;
  for (const auto& [role, p] : m.paths) {
    headers[role] = read_pack_header(p);
  }

  // First feature pack seen fixes the reference dim unless one was declared.
  std::optional<std::pair<std::string, std::size_t>> reference;
  if (declared_dim) reference = {"manifest \"dim\"", *declared_dim};
  for (Role r : kFeatureRoles) {
    if (!m.has(r)) continue;
    const auto& h = headers[r];
    if (h.kind != PackKind::Features) {
      throw Error(ErrorCode::BadMagic, std::string(role_name(r)) + ": " + m.paths[r].string() +
                                           " is not a feature pack");
    }
    const std::string here = std::string(role_name(r)) + " (" + m.paths[r].string() + ")";
    if (!reference) {
      reference = {here, h.dim};
    } else if (reference->second != h.dim) {
      throw Error(ErrorCode::DimConflict, here + " has dim " + std::to_string(h.dim) + " but " + reference->first +
                                              " has dim " + std::to_string(reference->second));
    }
  }
  m.dim = reference->second;

  auto expect_rows = [&](Role aux, Role feat, PackKind kind) {
    if (!m.has(aux)) return;
    const auto& h = headers[aux];
    if (h.kind != kind) {
      throw Error(ErrorCode::BadMagic, std::string(role_name(aux)) + ": " + m.paths[aux].string() +
                                           " has the wrong pack type");
    }
    if (h.rows != headers[feat].rows) {
      throw Error(ErrorCode::SizeMismatch, std::string(role_name(aux)) + " has " + std::to_string(h.rows) +
                                               " rows but " + std::string(role_name(feat)) + " has " +
                                               std::to_string(headers[feat].rows));
    }
  };
  expect_rows(Role::LabelsTrain, Role::IndTrain, PackKind::Labels);
  expect_rows(Role::LogitsIndTest, Role::IndTest, PackKind::Logits);
  expect_rows(Role::LogitsOodTest, Role::OodTest, PackKind::Logits);
  if (m.has(Role::LogitsIndTest) && m.has(Role::LogitsOodTest) &&
      headers[Role::LogitsIndTest].dim != headers[Role::LogitsOodTest].dim) {
    throw Error(ErrorCode::DimConflict, "logits_ind_test has " + std::to_string(headers[Role::LogitsIndTest].dim) +
                                            " classes but logits_ood_test has " +
                                            std::to_string(headers[Role::LogitsOodTest].dim));
  }
  return m;
}

}  // namespace flats
