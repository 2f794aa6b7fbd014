// tacoma: command-line driver for texture-based image scoring.
//
// Exit codes: 0 success, 2 usage or input error, 3 numeric failure.
// Every command prints its results as key=value lines on stdout.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tacoma/tacoma.hpp"

namespace fs = std::filesystem;
using namespace tacoma;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

void emit(const std::string& key, const std::string& value) { std::cout << key << '=' << value << '\n'; }
void emit(const std::string& key, double value) { emit(key, format_number(value)); }
void emit(const std::string& key, std::size_t value) { emit(key, std::to_string(value)); }
void emit(const std::string& key, int value) { emit(key, std::to_string(value)); }

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  for (auto f : split_fields(s)) out.emplace_back(f);
  return out;
}

std::vector<fs::path> pgm_files(const std::string& dir) {
  if (!fs::is_directory(dir)) throw ArgumentError("not a directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".pgm") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

FeatureFile load_features(const std::string& path) { return parse_features(read_text_file(path)); }

ForestParams forest_params(int trees, const std::string& mtry, std::size_t p, std::uint64_t seed) {
  return {trees, resolve_mtry(mtry, p), seed};
}

// ---- mask -------------------------------------------------------------------

struct MaskArgs {
  std::string patches, rel, out;
  int levels = 51;
  std::uint64_t seed = 0;
};

int run_mask(const MaskArgs& a) {
  const auto rel = SpatialRelationship::parse(a.rel);
  const auto files = pgm_files(a.patches);
  if (files.empty()) throw ArgumentError("no .pgm patches in " + a.patches);
  std::vector<QuantizedImage> patches;
  for (const auto& f : files) patches.push_back(quantize(load_pgm(f.string()), a.levels));
  const auto mask = build_mask(patches, rel);
  write_text_file(a.out, mask_to_text(mask));
  emit("relationship", rel.name());
  emit("levels", a.levels);
  emit("patch_count", mask.patch_count);
  emit("mask_size", mask.size());
  emit("mask_id", mask_identity(mask));
  return kExitOk;
}

// ---- extract ----------------------------------------------------------------

struct ExtractArgs {
  std::string manifest, masks, rels, out;
  int levels = 51;
  bool normalize = false;
  std::uint64_t seed = 0;
};

int run_extract(const ExtractArgs& a) {
  const auto mask_paths = split_list(a.masks);
  const auto rels = parse_relationships(a.rels);
  if (mask_paths.size() != rels.size()) throw ArgumentError("one mask file is needed per relationship");
  std::vector<FeatureMask> masks;
  for (std::size_t i = 0; i < rels.size(); ++i) {
    auto m = mask_from_text(read_text_file(mask_paths[i]));
    if (m.levels != a.levels) {
      throw ArgumentError("mask " + mask_paths[i] + " has " + std::to_string(m.levels) + " levels, --levels is " +
                          std::to_string(a.levels));
    }
    if (!(m.relationship == rels[i])) {
      throw ArgumentError("mask " + mask_paths[i] + " was built for " + m.relationship.name() + ", not " + rels[i].name());
    }
    masks.push_back(std::move(m));
  }
  const auto manifest = load_manifest(a.manifest);
  FeatureFile f;
  f.blocks = block_layout(masks);
  f.features.cols = f.blocks.empty() ? 0 : f.blocks.back().end;
  for (const auto& row : manifest.rows) {
    f.features.push_row(extract_features(quantize(load_pgm(row.path), a.levels), masks, a.normalize));
    f.labels.push_back(row.label);
  }
  write_text_file(a.out, features_to_text(f));
  emit("rows", f.features.rows);
  emit("width", f.features.cols);
  for (const auto& b : f.blocks) emit("block." + b.relationship, std::to_string(b.begin) + ":" + std::to_string(b.end));
  return kExitOk;
}

// ---- train / score / oob ----------------------------------------------------

struct TrainArgs {
  std::string features, out, mtry = "sqrt";
  int trees = 500;
  int workers = 1;
  int classes = 0;
  std::uint64_t seed = 0;
};

int run_train(const TrainArgs& a) {
  const auto ff = load_features(a.features);
  const auto data = ff.labeled(a.classes);
  const auto params = forest_params(a.trees, a.mtry, data.dimension(), a.seed);
  const auto forest = train_forest(data, params, a.workers);
  write_text_file(a.out, forest_to_text(forest));
  const auto oob = oob_error(forest, data);
  emit("examples", data.size());
  emit("features", data.dimension());
  emit("classes", data.classes);
  emit("trees", forest.params.n_trees);
  emit("mtry", forest.params.mtry);
  emit("oob_error", oob.error);
  emit("train_error", error_rate(forest, data));
  return kExitOk;
}

struct ScoreArgs {
  std::string model, features, out;
  std::uint64_t seed = 0;
};

int run_score(const ScoreArgs& a) {
  const auto forest = forest_from_text(read_text_file(a.model));
  const auto ff = load_features(a.features);
  std::ostringstream preds;
  preds << "row,label,predicted,margin\n";
  std::size_t labeled = 0, correct = 0;
  for (std::size_t i = 0; i < ff.features.rows; ++i) {
    const auto tally = predict_votes(forest, ff.features.row(i));
    const int y = predict_class(tally);
    preds << i << ',' << format_label(ff.labels[i]) << ',' << y << ',' << margin(tally) << '\n';
    if (ff.labels[i] != kUnlabeled) {
      ++labeled;
      if (ff.labels[i] == y) ++correct;
    }
  }
  if (!a.out.empty()) write_text_file(a.out, preds.str());
  emit("rows", ff.features.rows);
  emit("labeled", labeled);
  emit("accuracy", labeled ? static_cast<double>(correct) / static_cast<double>(labeled) : 0.0);
  return kExitOk;
}

struct OobArgs {
  std::string model, features;
  int classes = 0;
  std::uint64_t seed = 0;
};

int run_oob(const OobArgs& a) {
  const auto forest = forest_from_text(read_text_file(a.model));
  const auto data = load_features(a.features).labeled(a.classes > 0 ? a.classes : forest.classes);
  const auto rep = oob_error(forest, data);
  emit("oob_error", rep.error);
  emit("evaluated", rep.evaluated);
  emit("skipped", rep.skipped);
  return kExitOk;
}

// ---- salient ----------------------------------------------------------------

struct SalientArgs {
  std::string model, mask, image, out, coords;
  int levels = 51;
  std::size_t k = 20;
  std::size_t offset = 0;
  std::uint64_t seed = 0;
};

int run_salient(const SalientArgs& a) {
  const auto forest = forest_from_text(read_text_file(a.model));
  const auto mask = mask_from_text(read_text_file(a.mask));
  if (mask.levels != a.levels) throw ArgumentError("mask levels do not match --levels");
  const auto gray = load_pgm(a.image);
  const auto map = top_salient(quantize(gray, a.levels), mask.relationship, forest, mask, a.k, a.offset);
  save_pgm(a.out, render_overlay(gray, map));
  if (!a.coords.empty()) write_text_file(a.coords, coordinates_text(map));
  emit("k_requested", map.requested);
  emit("k_used", map.source_features.size());
  emit("clamped", map.source_features.size() < map.requested ? "true" : "false");
  emit("flagged_pixels", map.count());
  std::string feats;
  for (const auto& [x, y] : map.source_features) feats += (feats.empty() ? "" : ";") + std::to_string(x) + ":" + std::to_string(y);
  emit("features", feats);
  return kExitOk;
}

// ---- cotrain / selftrain ----------------------------------------------------

struct SemiArgs {
  std::string features, test, out, log, split = "natural", mtry = "sqrt";
  int trees = 50;
  std::size_t parts = 2;
  std::size_t m1 = 2, m2 = 2, m = 2;
  std::optional<std::size_t> labeled;
  int classes = 0;
  std::uint64_t seed = 0;
};

struct SemiInputs {
  Dataset labeled;
  FeatureTable unlabeled;
  std::vector<std::size_t> unlabeled_rows;  // file rows behind `unlabeled`
  FeatureFile file;
};

SemiInputs semi_inputs(const SemiArgs& a) {
  SemiInputs in;
  in.file = load_features(a.features);
  const int classes = a.classes > 0 ? a.classes : in.file.classes();
  auto known = in.file.labeled_rows();
  std::vector<std::size_t> keep = known;
  if (a.labeled) {
    keep = sample_covering(in.file.labels, known, *a.labeled, derive_seed(a.seed, 0x1abe1));
  }
  in.unlabeled_rows = in.file.unlabeled_rows();
  for (auto i : known) {
    if (!std::binary_search(keep.begin(), keep.end(), i)) in.unlabeled_rows.push_back(i);
  }
  std::sort(in.unlabeled_rows.begin(), in.unlabeled_rows.end());
  in.labeled.features = in.file.features.select_rows(keep);
  for (auto i : keep) in.labeled.labels.push_back(in.file.labels[i]);
  in.labeled.classes = classes;
  in.unlabeled = in.file.features.select_rows(in.unlabeled_rows);
  return in;
}

void write_semi_outputs(const SemiArgs& a, const SemiInputs& in, const CotrainResult& r) {
  if (!a.out.empty()) {
    std::ostringstream os;
    os << "row,inferred\n";
    for (std::size_t k = 0; k < in.unlabeled_rows.size(); ++k) os << in.unlabeled_rows[k] << ',' << r.inferred[k] << '\n';
    write_text_file(a.out, os.str());
  }
  if (!a.log.empty()) {
    std::ostringstream os;
    os << "round,unlabeled_before,classifier,row,label,margin,transferred\n";
    for (const auto& entry : r.log) {
      for (const auto& p : entry.picks) {
        const bool moved = std::any_of(entry.transferred.begin(), entry.transferred.end(), [&](const Pick& q) {
          return q.row == p.row && q.classifier == p.classifier;
        });
        os << entry.round << ',' << entry.unlabeled_before << ',' << p.classifier << ',' << in.unlabeled_rows[p.row] << ','
           << p.label << ',' << p.margin << ',' << (moved ? 1 : 0) << '\n';
      }
    }
    write_text_file(a.log, os.str());
  }
  emit("labeled_initial", in.labeled.size());
  emit("unlabeled", in.unlabeled.rows);
  emit("rounds", r.log.size());
  emit("labeled_final", in.labeled.size() + in.unlabeled.rows);
}

// Held-out error of the semi-supervised classifier and of the paired
// supervised forest trained on the initial labeled rows only.
void report_test(const SemiArgs& a, const SemiInputs& in, const CotrainResult& r, const ForestParams& params) {
  if (a.test.empty()) return;
  const auto test = load_features(a.test).labeled(in.labeled.classes);
  if (test.dimension() != in.labeled.dimension()) throw ArgumentError("test features have a different width");
  const auto supervised = train_forest(in.labeled, params);
  emit("test_error", r.classifier.error(test));
  emit("supervised_error", error_rate(supervised, test));
}

int run_cotrain(const SemiArgs& a) {
  auto in = semi_inputs(a);
  const std::size_t p = in.labeled.dimension();
  FeatureSplit split;
  if (a.split == "natural") {
    split = natural_split(feature_blocks(in.file));
  } else if (a.split == "thin") {
    split = thin_split(p, a.parts, derive_seed(a.seed, 0x5917));
  } else {
    throw ArgumentError("--split must be natural or thin");
  }
  const auto [i1, i2] = pick_two(split.parts(), derive_seed(a.seed, 0x2));
  FeatureSplit pair;
  pair.scheme = split.scheme;
  pair.subsets = {split.subsets[i1], split.subsets[i2]};
  const auto f1_width = pair.subsets[0].size();
  const auto params = forest_params(a.trees, a.mtry, f1_width, a.seed);
  const auto r = cotrain(in.labeled, in.unlabeled, pair, params, a.m1, a.m2, a.seed);
  emit("split", a.split);
  emit("f1_features", pair.subsets[0].size());
  emit("f2_features", pair.subsets[1].size());
  write_semi_outputs(a, in, r);
  report_test(a, in, r, forest_params(a.trees, a.mtry, p, a.seed));
  return kExitOk;
}

int run_selftrain(const SemiArgs& a) {
  auto in = semi_inputs(a);
  const auto params = forest_params(a.trees, a.mtry, in.labeled.dimension(), a.seed);
  const auto r = self_train(in.labeled, in.unlabeled, params, a.m, a.seed);
  write_semi_outputs(a, in, r);
  report_test(a, in, r, params);
  return kExitOk;
}

// ---- simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::string cov = "tridiag:0.6", u = "ones", subset = "first:50", out;
  std::size_t p = 100;
  std::size_t trials = 200;
  double epsilon = 0.05;
  std::optional<std::uint64_t> seed;
};

std::vector<double> parse_center(const std::string& spec, std::size_t p) {
  if (spec == "ones") return std::vector<double>(p, 1.0);
  if (spec.rfind("const:", 0) == 0) return std::vector<double>(p, parse_number(spec.substr(6), 0));
  throw ArgumentError("--u must be 'ones' or 'const:<v>'");
}

int run_simulate(const SimulateArgs& a) {
  MixtureSpec spec;
  spec.u = parse_center(a.u, a.p);
  spec.sigma = make_cov(CovarianceSpec::parse(a.cov), a.p);
  const auto colon = a.subset.find(':');
  const std::string kind = a.subset.substr(0, colon);
  const std::size_t arg = colon == std::string::npos ? 0 : static_cast<std::size_t>(parse_number(a.subset.substr(colon + 1), 0));
  if (kind == "first" && (arg < 1 || arg > a.p)) throw ArgumentError("first:<k> needs 1 <= k <= p");
  if (kind == "thin" && !a.seed) throw ArgumentError("--seed is required for thin:<J>");
  if (kind != "first" && kind != "thin") throw ArgumentError("--subset must be first:<k> or thin:<J>");
  std::ostringstream report;
  auto put = [&](const std::string& k, const std::string& v) {
    emit(k, v);
    report << k << '=' << v << '\n';
  };
  put("format", "tacoma-separation-v1");
  put("cov", a.cov);
  put("p", std::to_string(a.p));
  if (kind == "first") {
    std::vector<std::size_t> idx(arg);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const auto r = ratio_of_separation(spec.u, spec.sigma, idx);
    put("positive_definite", r.positive_definite ? "true" : "false");
    put("subset_size", std::to_string(r.subset_size));
    put("S_full", format_number(r.s_full));
    put("S_subset", format_number(r.s_subset));
    put("gamma", format_number(r.gamma));
    put("bayes_full", format_number(r.bayes_full));
    put("bayes_subset", format_number(r.bayes_subset));
    put("lambda_min_inv", format_number(r.lambda_min_inv));
  } else {
    const auto study = mc_gamma(spec, arg, a.trials, *a.seed, a.epsilon);
    put("S_full", format_number(separation(spec.u, spec.sigma)));
    put("parts", std::to_string(arg));
    put("trials", std::to_string(a.trials));
    put("gamma_min", format_number(study.min));
    put("gamma_median", format_number(study.median));
    put("threshold", format_number(study.threshold));
    put("fraction_below", format_number(study.fraction_below));
    std::string samples;
    for (double g : study.samples) samples += (samples.empty() ? "" : ",") + format_number(g);
    report << "gamma_samples=" << samples << '\n';
  }
  if (!a.out.empty()) write_text_file(a.out, report.str());
  return kExitOk;
}

// ---- synth ------------------------------------------------------------------

struct SynthArgs {
  std::string out;
  int per_class = 50;
  int size = 128;
  std::size_t patches = 4;
  std::uint64_t seed = 0;
};

int run_synth(const SynthArgs& a) {
  auto config = SynthConfig::with_counts(a.per_class, a.seed);
  config.width = config.height = a.size;
  const auto corpus = synth_corpus(config);
  const fs::path root(a.out);
  fs::create_directories(root / "images");
  fs::create_directories(root / "blobs");
  fs::create_directories(root / "patches");
  Manifest manifest;
  for (std::size_t i = 0; i < corpus.images.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "img_%04zu", i);
    save_pgm((root / "images" / (std::string(name) + ".pgm")).string(), corpus.images[i]);
    save_pgm((root / "blobs" / (std::string(name) + "_blobs.pgm")).string(), corpus.blob_masks[i]);
    manifest.rows.push_back({"images/" + std::string(name) + ".pgm", corpus.labels[i]});
  }
  write_text_file((root / "manifest.csv").string(), manifest_to_text(manifest));
  const auto patches = representative_patches(corpus, a.patches);
  for (std::size_t i = 0; i < patches.size(); ++i) {
    save_pgm((root / "patches" / ("patch_" + std::to_string(i) + ".pgm")).string(), patches[i]);
  }
  emit("images", corpus.images.size());
  emit("classes", config.classes());
  emit("patches", patches.size());
  emit("manifest", (root / "manifest.csv").string());
  return kExitOk;
}

// ---- learning curve ---------------------------------------------------------

struct CurveArgs {
  std::string features, test, sizes = "10,30,100,160", mtry = "sqrt";
  int trees = 200;
  std::size_t repeats = 20;
  double holdout = 0.2;
  int classes = 0;
  std::uint64_t seed = 0;
};

int run_learning_curve(const CurveArgs& a) {
  const auto ff = load_features(a.features);
  Dataset train, test;
  if (a.test.empty()) {
    const auto all = ff.labeled(a.classes);
    const auto h = stratified_holdout(all.labels, a.holdout, derive_seed(a.seed, 0x401d));
    train = all.select_rows(h.train);
    test = all.select_rows(h.test);
  } else {
    train = ff.labeled(a.classes);
    test = load_features(a.test).labeled(train.classes);
  }
  std::vector<std::size_t> sizes;
  for (const auto& s : split_list(a.sizes)) sizes.push_back(static_cast<std::size_t>(parse_number(s, 0)));
  const auto params = forest_params(a.trees, a.mtry, train.dimension(), a.seed);
  const auto curve = learning_curve(train, test, sizes, a.repeats, params, a.seed);
  emit("train_pool", train.size());
  emit("test_size", test.size());
  bool monotone = true;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    std::string errs;
    for (double e : curve[i].errors) errs += (errs.empty() ? "" : ",") + format_number(e);
    std::cout << "size=" << curve[i].size << " median_error=" << format_number(curve[i].median) << " errors=" << errs << '\n';
    if (i > 0 && curve[i].median > curve[i - 1].median) monotone = false;
  }
  emit("monotone_non_increasing", monotone ? "true" : "false");
  return kExitOk;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const NumericError& e) {
    std::cerr << "tacoma: numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "tacoma: " << e.what() << '\n';
    return kExitInput;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Texture-feature image scoring with random forests and co-training"};
  app.require_subcommand(1);
  int status = kExitOk;

  const std::vector<int> tree_grid = {50, 100, 200, 500};
  auto mtry_check = CLI::Validator(
      [](std::string& s) -> std::string {
        try {
          resolve_mtry(s, 1);
        } catch (const std::exception&) {
          return "mtry must be 0.5sqrt, sqrt, 2sqrt or a positive integer";
        }
        return {};
      },
      "MTRY");

  MaskArgs mask;
  auto* c_mask = app.add_subcommand("mask", "Build a feature mask from representative patches");
  c_mask->add_option("--patches", mask.patches, "Directory of .pgm patches")->required();
  c_mask->add_option("--rel", mask.rel, "Spatial relationship, e.g. ne3")->required();
  c_mask->add_option("--levels", mask.levels, "Gray levels after quantization")->check(CLI::Range(2, 256));
  c_mask->add_option("--out", mask.out, "Mask file to write")->required();
  c_mask->add_option("--seed", mask.seed, "Accepted for uniformity; unused");
  c_mask->callback([&] { status = guarded([&] { return run_mask(mask); }); });

  ExtractArgs ex;
  auto* c_ex = app.add_subcommand("extract", "Compute masked GLCM feature rows for a manifest");
  c_ex->add_option("--manifest", ex.manifest, "CSV with header path,label")->required();
  c_ex->add_option("--mask", ex.masks, "Mask file(s), comma separated, one per relationship")->required();
  c_ex->add_option("--rel", ex.rels, "Relationship(s), comma separated")->required();
  c_ex->add_option("--levels", ex.levels)->check(CLI::Range(2, 256));
  c_ex->add_option("--out", ex.out, "Feature table to write")->required();
  c_ex->add_flag("--normalize", ex.normalize, "Divide counts by the number of pixel pairs");
  c_ex->add_option("--seed", ex.seed, "Accepted for uniformity; unused");
  c_ex->callback([&] { status = guarded([&] { return run_extract(ex); }); });

  TrainArgs tr;
  auto* c_tr = app.add_subcommand("train", "Train a random forest on a feature table");
  c_tr->add_option("--features", tr.features)->required();
  c_tr->add_option("--trees", tr.trees, "Number of trees")->check(CLI::IsMember(tree_grid))->capture_default_str();
  c_tr->add_option("--mtry", tr.mtry, "Features tried per split")->check(mtry_check)->capture_default_str();
  c_tr->add_option("--seed", tr.seed)->required();
  c_tr->add_option("--out", tr.out, "Model file to write")->required();
  c_tr->add_option("--workers", tr.workers, "Training threads")->check(CLI::PositiveNumber);
  c_tr->add_option("--classes", tr.classes, "Class count (default: inferred from labels)");
  c_tr->callback([&] { status = guarded([&] { return run_train(tr); }); });

  ScoreArgs sc;
  auto* c_sc = app.add_subcommand("score", "Score a feature table with a trained model");
  c_sc->add_option("--model", sc.model)->required();
  c_sc->add_option("--features", sc.features)->required();
  c_sc->add_option("--out", sc.out, "Predictions CSV");
  c_sc->add_option("--seed", sc.seed, "Accepted for uniformity; unused");
  c_sc->callback([&] { status = guarded([&] { return run_score(sc); }); });

  OobArgs oob;
  auto* c_oob = app.add_subcommand("oob", "Out-of-bag error of a model on its training table");
  c_oob->add_option("--model", oob.model)->required();
  c_oob->add_option("--features", oob.features)->required();
  c_oob->add_option("--classes", oob.classes);
  c_oob->add_option("--seed", oob.seed, "Accepted for uniformity; unused");
  c_oob->callback([&] { status = guarded([&] { return run_oob(oob); }); });

  SalientArgs sal;
  auto* c_sal = app.add_subcommand("salient", "Highlight pixels behind the most important features");
  c_sal->add_option("--model", sal.model)->required();
  c_sal->add_option("--mask", sal.mask)->required();
  c_sal->add_option("--image", sal.image)->required();
  c_sal->add_option("--levels", sal.levels)->check(CLI::Range(2, 256));
  c_sal->add_option("--k", sal.k, "Number of top features")->check(CLI::PositiveNumber)->capture_default_str();
  c_sal->add_option("--offset", sal.offset, "First model column of the mask's block");
  c_sal->add_option("--out", sal.out, "Overlay PGM")->required();
  c_sal->add_option("--coords", sal.coords, "Flagged coordinates, one 'x y' per line");
  c_sal->add_option("--seed", sal.seed, "Accepted for uniformity; unused");
  c_sal->callback([&] { status = guarded([&] { return run_salient(sal); }); });

  SemiArgs co;
  auto* c_co = app.add_subcommand("cotrain", "Margin-based co-training");
  c_co->add_option("--features", co.features, "Table; '?' labels are unlabeled")->required();
  c_co->add_option("--labeled", co.labeled, "Keep this many labels (class-covering sample), hide the rest");
  c_co->add_option("--split", co.split, "natural or thin")->check(CLI::IsMember({"natural", "thin"}));
  c_co->add_option("--parts", co.parts, "Thinning slice count J");
  c_co->add_option("--m1", co.m1)->check(CLI::PositiveNumber);
  c_co->add_option("--m2", co.m2)->check(CLI::PositiveNumber);
  c_co->add_option("--trees", co.trees)->check(CLI::IsMember(tree_grid));
  c_co->add_option("--mtry", co.mtry)->check(mtry_check);
  c_co->add_option("--classes", co.classes);
  c_co->add_option("--test", co.test, "Held-out labeled table");
  c_co->add_option("--out", co.out, "Inferred labels CSV");
  c_co->add_option("--log", co.log, "Per-round pick log CSV");
  c_co->add_option("--seed", co.seed)->required();
  c_co->callback([&] { status = guarded([&] { return run_cotrain(co); }); });

  SemiArgs st;
  auto* c_st = app.add_subcommand("selftrain", "Single-classifier self-training");
  c_st->add_option("--features", st.features)->required();
  c_st->add_option("--labeled", st.labeled);
  c_st->add_option("--m", st.m)->check(CLI::PositiveNumber);
  c_st->add_option("--trees", st.trees)->check(CLI::IsMember(tree_grid));
  c_st->add_option("--mtry", st.mtry)->check(mtry_check);
  c_st->add_option("--classes", st.classes);
  c_st->add_option("--test", st.test);
  c_st->add_option("--out", st.out);
  c_st->add_option("--log", st.log);
  c_st->add_option("--seed", st.seed)->required();
  c_st->callback([&] { status = guarded([&] { return run_selftrain(st); }); });

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Separation and ratio of separation for a Gaussian mixture");
  c_sim->add_option("--cov", sim.cov, "identity, tridiag:<rho> or ar1:<rho>")->capture_default_str();
  c_sim->add_option("--p", sim.p, "Dimension")->check(CLI::PositiveNumber)->capture_default_str();
  c_sim->add_option("--u", sim.u, "Centre difference: ones or const:<v>")->capture_default_str();
  c_sim->add_option("--subset", sim.subset, "first:<k> or thin:<J>")->capture_default_str();
  c_sim->add_option("--trials", sim.trials, "Random thinnings for thin:<J>")->check(CLI::PositiveNumber);
  c_sim->add_option("--epsilon", sim.epsilon, "Report fraction of gamma below 1/J - epsilon");
  c_sim->add_option("--out", sim.out, "Report file");
  c_sim->add_option("--seed", sim.seed, "Required for thin:<J>");
  c_sim->callback([&] { status = guarded([&] { return run_simulate(sim); }); });

  SynthArgs sy;
  auto* c_sy = app.add_subcommand("synth", "Write a synthetic stained-texture corpus");
  c_sy->add_option("--out", sy.out, "Output directory")->required();
  c_sy->add_option("--per-class", sy.per_class)->check(CLI::PositiveNumber);
  c_sy->add_option("--size", sy.size, "Image side in pixels")->check(CLI::PositiveNumber);
  c_sy->add_option("--patches", sy.patches, "Representative patches to write");
  c_sy->add_option("--seed", sy.seed)->required();
  c_sy->callback([&] { status = guarded([&] { return run_synth(sy); }); });

  CurveArgs lc;
  auto* c_lc = app.add_subcommand("learning-curve", "Test error against training-set size");
  c_lc->add_option("--features", lc.features)->required();
  c_lc->add_option("--test", lc.test, "Held-out table (default: stratified holdout)");
  c_lc->add_option("--holdout", lc.holdout, "Test fraction when --test is absent")->capture_default_str();
  c_lc->add_option("--sizes", lc.sizes)->capture_default_str();
  c_lc->add_option("--repeats", lc.repeats)->check(CLI::PositiveNumber);
  c_lc->add_option("--trees", lc.trees)->check(CLI::IsMember(tree_grid));
  c_lc->add_option("--mtry", lc.mtry)->check(mtry_check);
  c_lc->add_option("--classes", lc.classes);
  c_lc->add_option("--seed", lc.seed)->required();
  c_lc->callback([&] { status = guarded([&] { return run_learning_curve(lc); }); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }
  return status;
}
