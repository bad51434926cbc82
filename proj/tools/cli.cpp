#include "cli.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include "CLI11.hpp"
#include "json.hpp"

#include "flats/atomic_file.hpp"
#include "flats/confidence.hpp"
#include "flats/error.hpp"
#include "flats/feature_pack.hpp"
#include "flats/gaussian.hpp"
#include "flats/knn.hpp"
#include "flats/lof.hpp"
#include "flats/manifest.hpp"
#include "flats/metrics.hpp"
#include "flats/random.hpp"
#include "flats/ratio.hpp"
#include "flats/synth.hpp"

namespace flats::cli {

namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

/// A problem with flags or manifest contents (exit 2), as opposed to bad
/// data on disk (exit 3).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr std::array<std::string_view, 9> kScoreNames{"msp", "energy", "odin", "d2u", "mls",
                                                      "lof", "maha", "knn",  "flats"};

struct RunConfig {
  fs::path manifest;
  std::string score;
  std::optional<std::size_t> k;
  std::optional<double> alpha;
  std::optional<double> temperature;
  double ridge = kDefaultRidge;
  fs::path out_dir = ".";
  std::uint64_t seed = 0;
  std::size_t aux_rows = 0;
  bool pretty = false;
};

struct Resolved {
  Manifest manifest;
  std::size_t k = kDefaultK;
  double alpha = kDefaultAlpha;
};

Resolved resolve(const RunConfig& cfg, std::ostream& err) {
  Resolved r{load_manifest(cfg.manifest)};
  for (const auto& w : r.manifest.warnings) err << "warning: " << w << "\n";
  r.k = cfg.k.value_or(r.manifest.k);
  r.alpha = cfg.alpha.value_or(r.manifest.alpha);
  if (r.k == 0) throw ConfigError("--k must be >= 1");
  if (!std::isfinite(r.alpha) || r.alpha < 0.0) throw ConfigError("--alpha must be finite and >= 0");
  return r;
}

void require(const Manifest& m, Role role, std::string_view why) {
  if (!m.has(role)) {
    throw ConfigError(std::string(role_name(role)) + " required for " + std::string(why) + " (manifest " +
                      m.source.string() + ")");
  }
}

/// Row subsample without replacement, original order kept.
FeaturePack subsample(const FeaturePack& pack, std::size_t rows, std::uint64_t seed) {
  if (rows == 0 || rows >= pack.rows()) return pack;
  std::vector<std::size_t> order(pack.rows());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  for (std::size_t i = 0; i < rows; ++i) {
    std::swap(order[i], order[i + rng.below(order.size() - i)]);
  }
  order.resize(rows);
  std::sort(order.begin(), order.end());
  std::vector<float> values;
  values.reserve(rows * pack.dim());
  for (auto i : order) values.insert(values.end(), pack.row(i).begin(), pack.row(i).end());
  return FeaturePack(rows, pack.dim(), std::move(values));
}

/// Loads a pack and tags any failure with the manifest role at fault.
template <typename F>
auto load_role(const Manifest& m, Role role, F loader) {
  try {
    return loader(m.path(role));
  } catch (const Error& e) {
    throw Error(e.code(), std::string(role_name(role)) + ": " + e.what());
  }
}

FeaturePack features(const Manifest& m, Role role) {
  return load_role(m, role, [](const fs::path& p) { return load_feature_pack(p); });
}
LogitPack logits(const Manifest& m, Role role) {
  return load_role(m, role, [](const fs::path& p) { return load_logit_pack(p); });
}
LabelPack labels(const Manifest& m, Role role) {
  return load_role(m, role, [](const fs::path& p) { return load_label_pack(p); });
}

std::optional<ConfidenceScore> confidence_kind(std::string_view name) {
  if (name == "msp") return ConfidenceScore::Msp;
  if (name == "energy") return ConfidenceScore::Energy;
  if (name == "odin") return ConfidenceScore::Odin;
  if (name == "d2u") return ConfidenceScore::D2u;
  if (name == "mls") return ConfidenceScore::Mls;
  return std::nullopt;
}

double temperature_for(ConfidenceScore kind, const RunConfig& cfg) {
  if (cfg.temperature) return *cfg.temperature;
  return kind == ConfidenceScore::Odin ? TemperatureConfig::kOdinDefault : TemperatureConfig::kEnergyDefault;
}

struct ScorePair {
  ScoreSeries ind;
  ScoreSeries ood;
};

FeaturePack load_aux(const Manifest& m, const RunConfig& cfg) {
  return subsample(features(m, Role::AuxOod), cfg.aux_rows, cfg.seed);
}

ScorePair compute_scores(const std::string& name, const Resolved& r, const RunConfig& cfg) {
  const auto& m = r.manifest;
  if (name == "flats") require(m, Role::AuxOod, name);
  if (auto kind = confidence_kind(name)) {
    require(m, Role::LogitsIndTest, name);
    require(m, Role::LogitsOodTest, name);
    const double t = temperature_for(*kind, cfg);
    return {confidence_scores(logits(m, Role::LogitsIndTest), *kind, t),
            confidence_scores(logits(m, Role::LogitsOodTest), *kind, t)};
  }
  const auto ind_test = features(m, Role::IndTest);
  const auto ood_test = features(m, Role::OodTest);
  if (name == "maha") {
    require(m, Role::LabelsTrain, name);
    const auto model = fit_gaussian(features(m, Role::IndTrain), labels(m, Role::LabelsTrain), cfg.ridge);
    return {maha_scores(model, ind_test), maha_scores(model, ood_test)};
  }
  if (name == "knn") {
    const KnnIndex index(features(m, Role::IndTrain), r.k);
    return {knn_scores(index, ind_test), knn_scores(index, ood_test)};
  }
  if (name == "lof") {
    const LofModel model(KnnIndex(features(m, Role::IndTrain), r.k));
    return {lof_scores(model, ind_test), lof_scores(model, ood_test)};
  }
  if (name == "flats") {
    const KnnIndex ind(features(m, Role::IndTrain), r.k);
    const KnnIndex aux(load_aux(m, cfg), r.k);
    return {flats_scores(ind, aux, ind_test, r.alpha), flats_scores(ind, aux, ood_test, r.alpha)};
  }
  throw ConfigError("unknown score \"" + name + "\"");
}

Json report_json(const EvalReport& rep) {
  Json j;
  j["auroc"] = rep.auroc;
  j["fpr95"] = rep.fpr95;
  j["n_ind"] = rep.n_ind;
  j["n_ood"] = rep.n_ood;
  j["threshold"] = rep.threshold;
  return j;
}

Json config_json(const RunConfig& cfg, const Resolved& r) {
  Json c;
  c["manifest"] = cfg.manifest.string();
  c["k"] = r.k;
  c["alpha"] = r.alpha;
  if (cfg.temperature) {
    c["temperature"] = *cfg.temperature;
  } else {
    c["temperature"] = nullptr;
  }
  c["ridge"] = cfg.ridge;
  c["seed"] = cfg.seed;
  c["aux_rows"] = cfg.aux_rows;
  return c;
}

std::string format_scores(const ScoreSeries& s) {
  std::string out;
  char buf[64];
  for (double v : s) {
    std::snprintf(buf, sizeof buf, "%.17g\n", v);
    out += buf;
  }
  return out;
}

void write_json(const fs::path& path, const Json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create output directory " + dir.string());
}

std::string fixed(double v, int precision = 4) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(precision) << v;
  return ss.str();
}

// ---- subcommands -----------------------------------------------------------

int cmd_score(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto r = resolve(cfg, err);
  const auto scores = compute_scores(cfg.score, r, cfg);
  const auto rep = evaluate(scores.ind, scores.ood);

  Json j;
  j["command"] = "score";
  j["score"] = cfg.score;
  const Json metrics = report_json(rep);
  for (const auto& [key, value] : metrics.items()) j[key] = value;
  j["config"] = config_json(cfg, r);

  ensure_dir(cfg.out_dir);
  write_file_atomic(cfg.out_dir / "ind_test.scores", format_scores(scores.ind));
  write_file_atomic(cfg.out_dir / "ood_test.scores", format_scores(scores.ood));
  write_json(cfg.out_dir / "report.json", j);

  if (cfg.pretty) {
    out << cfg.score << "  AUROC " << fixed(100 * rep.auroc, 2) << "  FPR@95 " << fixed(100 * rep.fpr95, 2)
        << "  (n_ind " << rep.n_ind << ", n_ood " << rep.n_ood << ")\n";
  } else {
    out << j.dump(2) << "\n";
  }
  return kExitOk;
}

int cmd_ablate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto r = resolve(cfg, err);
  const auto& m = r.manifest;
  require(m, Role::AuxOod, "ablate");
  require(m, Role::LabelsTrain, "ablate");

  const auto ind_train = features(m, Role::IndTrain);
  const auto train_labels = labels(m, Role::LabelsTrain);
  const auto aux = load_aux(m, cfg);
  const auto ind_test = features(m, Role::IndTest);
  const auto ood_test = features(m, Role::OodTest);
  const bool have_logits = m.has(Role::LogitsIndTest) && m.has(Role::LogitsOodTest);
  if (!have_logits) {
    err << "warning: no logit packs in manifest; Setting 1 covers feature-based baselines only\n";
  }

  const Setting2Estimators est(ind_train, train_labels, aux, r.k, cfg.ridge);
  const auto grid_ind = est.score(ind_test, r.alpha);
  const auto grid_ood = est.score(ood_test, r.alpha);

  // E_out for Setting 1 is always the k-NN distance to the auxiliary corpus.
  const auto aux_ind = est.ood(EstimatorKind::Knn).score(ind_test);
  const auto aux_ood = est.ood(EstimatorKind::Knn).score(ood_test);

  Json setting1 = Json::array();
  std::vector<std::string> names;
  if (have_logits) names = {"msp", "energy", "odin", "d2u", "mls"};
  names.insert(names.end(), {"lof", "maha", "knn"});
  for (const auto& name : names) {
    ScorePair base = [&]() -> ScorePair {
      if (name == "maha") return {est.ind(EstimatorKind::Maha).score(ind_test), est.ind(EstimatorKind::Maha).score(ood_test)};
      if (name == "knn") return {est.ind(EstimatorKind::Knn).score(ind_test), est.ind(EstimatorKind::Knn).score(ood_test)};
      return compute_scores(name, r, cfg);
    }();
    const auto without = evaluate(base.ind, base.ood);
    const auto with = evaluate(setting1_enhance(base.ind, aux_ind, r.alpha), setting1_enhance(base.ood, aux_ood, r.alpha));
    Json row;
    row["baseline"] = name;
    row["without"] = report_json(without);
    row["with"] = report_json(with);
    setting1.push_back(row);
  }

  Json cells = Json::array();
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t o = 0; o < 3; ++o) {
      Json cell;
      cell["e_in"] = estimator_name(kEstimatorKinds[i]);
      cell["e_out"] = estimator_name(kEstimatorKinds[o]);
      const Json metrics = report_json(evaluate(grid_ind[i][o], grid_ood[i][o]));
      for (const auto& [key, value] : metrics.items()) cell[key] = value;
      cells.push_back(cell);
    }
  }

  Json j;
  j["command"] = "ablate";
  j["setting1"] = setting1;
  j["setting2"] = cells;
  j["config"] = config_json(cfg, r);
  ensure_dir(cfg.out_dir);
  write_json(cfg.out_dir / "ablate.json", j);

  if (cfg.pretty) {
    out << "Setting 1 (AUROC / FPR@95, without -> with aux term)\n";
    for (const auto& row : setting1) {
      out << "  " << std::left << std::setw(8) << row["baseline"].get<std::string>()
          << fixed(100 * row["without"]["auroc"].get<double>(), 2) << " / "
          << fixed(100 * row["without"]["fpr95"].get<double>(), 2) << "  ->  "
          << fixed(100 * row["with"]["auroc"].get<double>(), 2) << " / "
          << fixed(100 * row["with"]["fpr95"].get<double>(), 2) << "\n";
    }
    out << "Setting 2 (AUROC, rows E_in, cols E_out: uniform maha knn)\n";
    for (std::size_t i = 0; i < 3; ++i) {
      out << "  " << std::left << std::setw(8) << estimator_name(kEstimatorKinds[i]);
      for (std::size_t o = 0; o < 3; ++o) out << fixed(100 * cells[3 * i + o]["auroc"].get<double>(), 2) << "  ";
      out << "\n";
    }
  } else {
    out << j.dump(2) << "\n";
  }
  return kExitOk;
}

struct SynthOptions {
  std::uint64_t seed = 7;
  std::size_t n_per_side = 10000;
  std::size_t pairs = 20;
  std::size_t density_queries = 2000;
  std::optional<fs::path> out;
  std::optional<fs::path> write_benchmark;
  bool pretty = false;
};

constexpr double kDominanceEpsilon = 0.01;

void write_benchmark(const fs::path& dir, std::uint64_t seed) {
  ensure_dir(dir);
  const auto b = nested_circle_benchmark(seed);
  write_feature_pack(b.ind_train, dir / "ind_train.flts");
  write_label_pack(b.labels_train, dir / "labels_train.fltl");
  write_feature_pack(b.aux, dir / "aux_ood.flts");
  write_feature_pack(b.ind_test, dir / "ind_test.flts");
  write_feature_pack(b.ood_test, dir / "ood_test.flts");
  write_logit_pack(b.logits_ind_test, dir / "logits_ind_test.fltg");
  write_logit_pack(b.logits_ood_test, dir / "logits_ood_test.fltg");
  Json m;
  m["ind_train"] = "ind_train.flts";
  m["labels_train"] = "labels_train.fltl";
  m["aux_ood"] = "aux_ood.flts";
  m["ind_test"] = "ind_test.flts";
  m["ood_test"] = "ood_test.flts";
  m["logits_ind_test"] = "logits_ind_test.fltg";
  m["logits_ood_test"] = "logits_ood_test.fltg";
  m["dim"] = 2;
  m["k"] = kDefaultK;
  m["alpha"] = kDefaultAlpha;
  write_json(dir / "manifest.json", m);
}

int cmd_synth(const SynthOptions& opt, std::ostream& out) {
  SynthRun run;
  run.seed = opt.seed;
  run.n_per_side = opt.n_per_side;
  try {
    run.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }

  const auto in = run.in_spec;
  const auto outs = run.out_spec;
  const std::array<double, 1> zero{0.0};
  const std::array<double, 1> one{1.0};
  const double lr0 = analytic_lr_score(in, outs, zero);
  const double lr1 = analytic_lr_score(in, outs, one);

  Json toy;
  toy["in_spec"] = {{"mean", 0.0}, {"stddev", 1.0}};
  toy["out_spec"] = {{"mean", 0.0}, {"stddev", 0.1}};
  toy["lr_at_0"] = lr0;
  toy["lr_at_1"] = lr1;
  toy["expected_lr_at_0"] = std::log(10.0);
  toy["expected_lr_at_1"] = std::log(10.0) - 49.5;
  toy["difference"] = lr0 - lr1;

  const auto ump = ump_auroc_check(run, [in](std::span<const double> x) { return -in.log_density(x); });
  Json ump_j;
  ump_j["candidate"] = "neg_ind_density";
  ump_j["auroc_candidate"] = ump.auroc_candidate;
  ump_j["auroc_lr"] = ump.auroc_lr;
  ump_j["gap"] = ump.auroc_lr - ump.auroc_candidate;

  const auto cases = ump_dominance_suite(run.seed, opt.pairs, run.n_per_side);
  Json cases_j = Json::array();
  bool dominated = true;
  for (const auto& c : cases) {
    const bool ok = c.auroc_lr >= c.auroc_candidate - kDominanceEpsilon;
    dominated = dominated && ok;
    cases_j.push_back({{"pair", c.pair},
                       {"candidate", c.candidate},
                       {"auroc_candidate", c.auroc_candidate},
                       {"auroc_lr", c.auroc_lr},
                       {"dominated", ok}});
  }

  const std::array<std::size_t, 3> ns{500, 2000, 8000};
  const auto density = knn_density_consistency(run.seed, kDefaultK, ns, opt.density_queries);
  Json points = Json::array();
  for (const auto& p : density) {
    points.push_back({{"n", p.n}, {"mean_estimate", p.mean_estimate}, {"relative_error", p.relative_error}});
  }

  Json j;
  j["command"] = "synth";
  j["seed"] = run.seed;
  j["n_per_side"] = run.n_per_side;
  j["toy_ratio"] = toy;
  j["ump_check"] = ump_j;
  j["dominance"] = {{"epsilon", kDominanceEpsilon}, {"pairs", opt.pairs}, {"all_dominated", dominated},
                    {"cases", cases_j}};
  j["knn_density"] = {{"k", kDefaultK}, {"truth", 1.0 / (2.0 * std::numbers::pi)},
                      {"queries", opt.density_queries}, {"points", points}};

  if (opt.write_benchmark) {
    write_benchmark(*opt.write_benchmark, run.seed);
    j["benchmark_dir"] = opt.write_benchmark->string();
  }
  if (opt.out) write_json(*opt.out, j);

  if (opt.pretty) {
    out << "toy ratio: lr(0) = " << fixed(lr0, 6) << ", lr(1) = " << fixed(lr1, 6) << "\n"
        << "UMP check: AUROC(LR) " << fixed(ump.auroc_lr) << " vs AUROC(-p_in) " << fixed(ump.auroc_candidate)
        << "\n"
        << "dominance over " << opt.pairs << " pairs: " << (dominated ? "ok" : "VIOLATED") << "\n";
    for (const auto& p : density) {
      out << "k-NN density n=" << p.n << ": mean " << fixed(p.mean_estimate, 5) << ", rel. error "
          << fixed(p.relative_error) << "\n";
    }
  } else if (!opt.out) {
    out << j.dump(2) << "\n";
  }
  return kExitOk;
}

int cmd_info(const fs::path& path, std::ostream& out, std::ostream& err) {
  Json j;
  j["command"] = "info";
  j["path"] = path.string();
  if (path.extension() == ".json") {
    const auto m = load_manifest(path);
    for (const auto& w : m.warnings) err << "warning: " << w << "\n";
    j["type"] = "manifest";
    j["dim"] = m.dim;
    j["k"] = m.k;
    j["alpha"] = m.alpha;
    Json roles = Json::object();
    for (const auto& [role, p] : m.paths) {
      const auto h = read_pack_header(p);
      roles[std::string(role_name(role))] = {{"path", p.string()}, {"rows", h.rows}, {"dim", h.dim}};
    }
    j["roles"] = roles;
    j["warnings"] = m.warnings;
  } else {
    const auto h = read_pack_header(path);
    const char* kind = h.kind == PackKind::Features ? "features" : h.kind == PackKind::Logits ? "logits" : "labels";
    j["type"] = kind;
    j["version"] = h.version;
    j["rows"] = h.rows;
    j["dim"] = h.dim;
    j["dtype"] = h.dtype == 0 ? "float32" : "int32";
  }
  out << j.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Feature-space OOD detection: likelihood-ratio and baseline scores"};
  app.name("flats");
  app.require_subcommand(1);

  RunConfig score_cfg;
  auto add_run_flags = [](CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--manifest", cfg.manifest, "Dataset manifest (JSON)")->required();
    sub->add_option("--k", cfg.k, "Neighbour count for k-NN based scores (default: manifest or 10)");
    sub->add_option("--alpha", cfg.alpha, "Weight of the auxiliary-corpus term (default: manifest or 0.5)");
    sub->add_option("--temperature", cfg.temperature, "Softmax temperature (default 1 for energy, 1000 for odin)");
    sub->add_option("--ridge", cfg.ridge, "Covariance ridge, as a multiple of trace/m")->capture_default_str();
    sub->add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();
    sub->add_option("--seed", cfg.seed, "Seed for auxiliary-corpus subsampling")->capture_default_str();
    sub->add_option("--aux-rows", cfg.aux_rows, "Subsample the auxiliary corpus to this many rows (0 = all)")
        ->capture_default_str();
    sub->add_flag("--pretty", cfg.pretty, "Print a human-readable table instead of JSON");
  };

  auto* score = app.add_subcommand("score", "Score IND and OOD test sets and evaluate");
  add_run_flags(score, score_cfg);
  std::vector<std::string> choices(kScoreNames.begin(), kScoreNames.end());
  score->add_option("--score", score_cfg.score, "Score to compute")->required()->check(CLI::IsMember(choices));

  RunConfig ablate_cfg;
  auto* ablate = app.add_subcommand("ablate", "Run the Setting-1 and Setting-2 ablation tables");
  add_run_flags(ablate, ablate_cfg);

  SynthOptions synth_opt;
  auto* synth = app.add_subcommand("synth", "Run the synthetic likelihood-ratio checks");
  synth->add_option("--seed", synth_opt.seed, "Seed")->capture_default_str();
  synth->add_option("--n-per-side", synth_opt.n_per_side, "Samples per side")->capture_default_str();
  synth->add_option("--pairs", synth_opt.pairs, "Random Gaussian pairs in the dominance suite")->capture_default_str();
  synth->add_option("--density-queries", synth_opt.density_queries, "Queries per k-NN density estimate")
      ->capture_default_str();
  synth->add_option("--out", synth_opt.out, "Write the report here instead of stdout");
  synth->add_option("--write-benchmark", synth_opt.write_benchmark,
                    "Also write the nested-circle benchmark packs and manifest to this directory");
  synth->add_flag("--pretty", synth_opt.pretty, "Print a human-readable summary");

  fs::path info_path;
  auto* info = app.add_subcommand("info", "Inspect a pack or manifest");
  info->add_option("path", info_path, "Pack or manifest file")->required();

  std::vector<std::string> argv_storage{"flats"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (*score) return cmd_score(score_cfg, out, err);
    if (*ablate) return cmd_ablate(ablate_cfg, out, err);
    if (*synth) return cmd_synth(synth_opt, out);
    if (*info) return cmd_info(info_path, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_data_error(e.code()) ? kExitData : kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitConfig;
}

}  // namespace flats::cli
