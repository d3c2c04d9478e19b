#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "daa/assoc.hpp"
#include "daa/classify.hpp"
#include "daa/ingest.hpp"
#include "daa/io_util.hpp"
#include "daa/maxent.hpp"
#include "daa/network.hpp"
#include "daa/robustness.hpp"
#include "daa/synth.hpp"
#include "daa/transform.hpp"
#include "daa/types.hpp"

namespace {

using namespace daa;

struct CommonOpts {
  std::string counts_path, labels_path, out_dir = ".";
  std::string norm = "tss";
  double pseudocount = 1.0;
  double css_quantile = 0.5;
  double prevalence = 0.0;  // 0 disables the filter
  double lambda_min = 0.01;
  int n_perm = 10000;
  double fdr = 0.05;
  std::uint64_t seed = 0;
  bool unsmoothed = false;
};

void add_common_flags(CLI::App* cmd, CommonOpts& o, bool needs_counts, bool needs_labels) {
  auto* c = cmd->add_option("--counts", o.counts_path, "count table (TSV, taxa x samples)");
  if (needs_counts) c->required();
  auto* lab = cmd->add_option("--labels", o.labels_path, "sample labels (TSV: sample, case/control)");
  if (needs_labels) lab->required();
  cmd->add_option("--norm", o.norm, "normalization: tss, clr, css, none")->default_val("tss");
  cmd->add_option("--pseudocount", o.pseudocount, "pseudocount added to counts")->default_val(1.0);
  cmd->add_option("--css-quantile", o.css_quantile, "quantile for css scaling")->default_val(0.5);
  cmd->add_option("--prevalence", o.prevalence, "min group prevalence (0 = keep all taxa)")->default_val(0.0);
  cmd->add_option("--lambda-min", o.lambda_min, "eigenvalue cutoff for the inverse")->default_val(0.01);
  cmd->add_option("--permutations", o.n_perm, "label permutations per test")->default_val(10000);
  cmd->add_option("--fdr", o.fdr, "BH false-discovery threshold")->default_val(0.05);
  cmd->add_option("--seed", o.seed, "RNG seed")->default_val(0);
  cmd->add_flag("--unsmoothed", o.unsmoothed, "use raw permutation p-values (no add-one smoothing)");
  cmd->add_option("--out", o.out_dir, "output directory")->default_val(".");
}

void echo_common(Manifest& m, const CommonOpts& o) {
  m.add("norm", o.norm);
  m.add("pseudocount", fmt_g17(o.pseudocount));
  m.add("css_quantile", fmt_g17(o.css_quantile));
  m.add("prevalence", fmt_g17(o.prevalence));
  m.add("lambda_min", fmt_g17(o.lambda_min));
  m.add("permutations", std::to_string(o.n_perm));
  m.add("fdr", fmt_g17(o.fdr));
  m.add("unsmoothed", o.unsmoothed ? "true" : "false");
}

struct LoadedData {
  CountMatrix counts;
  Labels labels;
  LogAbundanceMatrix log;
  bool have_labels = false;
};

LoadedData load_data(const CommonOpts& o, Manifest& m, bool want_labels) {
  LoadedData d;
  d.counts = parse_count_table(o.counts_path);
  m.add_input(o.counts_path);
  if (!o.labels_path.empty()) {
    d.labels = parse_labels(o.labels_path);
    m.add_input(o.labels_path);
    d.have_labels = true;
  } else if (want_labels) {
    throw Error("this command needs --labels");
  }
  if (o.prevalence > 0.0) {
    if (!d.have_labels) throw Error("--prevalence filtering needs --labels");
    d.counts = filter_prevalence(d.counts, d.labels, o.prevalence);
  }
  d.log = log_transform(d.counts, scheme_from_string(o.norm), o.pseudocount, o.css_quantile);
  return d;
}

std::filesystem::path out_path(const CommonOpts& o, const std::string& name) {
  std::filesystem::create_directories(o.out_dir);
  return std::filesystem::path(o.out_dir) / name;
}

void emit(const CommonOpts& o, Manifest& m, const std::string& name, const std::string& content) {
  write_file(out_path(o, name).string(), content);
  m.outputs.push_back(name);
}

void finish(const CommonOpts& o, Manifest& m) {
  write_file(out_path(o, "manifest.json").string(), m.to_json());
}

std::vector<int> parse_int_list(const std::string& s, const char* what) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    try {
      std::size_t pos = 0;
      const int v = std::stoi(tok, &pos);
      if (pos != tok.size()) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::exception&) {
      throw Error(std::string("bad ") + what + " entry: '" + tok + "'");
    }
  }
  if (out.empty()) throw Error(std::string("empty ") + what + " list");
  return out;
}

AssocOptions make_assoc_options(const CommonOpts& o) {
  AssocOptions a;
  a.n_perm = o.n_perm;
  a.alpha = o.fdr;
  a.lambda_min = o.lambda_min;
  a.smoothed = !o.unsmoothed;
  a.seed = o.seed;
  return a;
}

// ---------------------------------------------------------------- fit

int run_fit(const CommonOpts& o) {
  Manifest m;
  m.subcommand = "fit";
  m.version = version_string();
  m.seed = o.seed;
  echo_common(m, o);
  LoadedData d = load_data(o, m, false);
  const MaxEntModel model = fit_model(d.log, o.lambda_min);
  emit(o, m, "model.json", model_to_json(model));
  finish(o, m);
  return 0;
}

// ---------------------------------------------------------------- assoc

int run_assoc(const CommonOpts& o, const std::string& method) {
  Manifest m;
  m.subcommand = "assoc";
  m.version = version_string();
  m.seed = o.seed;
  m.add("method", method);
  echo_common(m, o);
  LoadedData d = load_data(o, m, true);
  const AssociationTable t = run_method(d.log, d.labels, method_from_string(method), make_assoc_options(o));
  emit(o, m, "associations.tsv", association_tsv(t));
  finish(o, m);
  return 0;
}

// ---------------------------------------------------------------- curve

int run_curve(const CommonOpts& o, const std::string& method, const std::string& sizes_str, int repeats) {
  Manifest m;
  m.subcommand = "curve";
  m.version = version_string();
  m.seed = o.seed;
  m.add("method", method);
  m.add("sizes", sizes_str);
  m.add("repeats", std::to_string(repeats));
  echo_common(m, o);
  LoadedData d = load_data(o, m, true);
  const std::vector<int> sizes = parse_int_list(sizes_str, "--sizes");
  const auto curve = detection_curve(d.log, d.labels, sizes, repeats, method_from_string(method),
                                     make_assoc_options(o));
  std::ostringstream os;
  os << "size,mean,sd\n";
  for (const auto& pt : curve) os << pt.size << ',' << fmt_g(pt.mean) << ',' << fmt_g(pt.sd) << '\n';
  os << "\nsize,repeat,n_significant\n";
  for (const auto& pt : curve)
    for (std::size_t r = 0; r < pt.counts.size(); ++r) os << pt.size << ',' << r << ',' << pt.counts[r] << '\n';
  emit(o, m, "curve.csv", os.str());
  finish(o, m);
  return 0;
}

// ---------------------------------------------------------------- synth

struct SynthOpts {
  std::string preset, spec_json_path;
  int dim = 47;
  double density = 0.3;
  std::uint64_t gt_seed = 1;
  bool near_diagonal = false;
  int n_cases = 275, n_controls = 189;
  double depth = 3.0e4;
};

int run_synth(const CommonOpts& o, const SynthOpts& s) {
  Manifest m;
  m.subcommand = "synth";
  m.version = version_string();
  m.seed = o.seed;
  m.add("dim", std::to_string(s.dim));
  m.add("density", fmt_g17(s.density));
  m.add("gt_seed", std::to_string(s.gt_seed));
  m.add("near_diagonal", s.near_diagonal ? "true" : "false");
  m.add("n_cases", std::to_string(s.n_cases));
  m.add("n_controls", std::to_string(s.n_controls));
  m.add("depth", fmt_g17(s.depth));

  SyntheticSpec spec;
  if (!s.spec_json_path.empty()) {
    if (!s.preset.empty()) throw Error("give either --preset or --spec-json, not both");
    spec = spec_from_json(read_file(s.spec_json_path));
    m.add_input(s.spec_json_path);
    m.add("spec_json", s.spec_json_path);
  } else {
    if (!s.preset.empty()) {
      spec.planted = preset_effects(s.preset);
      m.add("preset", s.preset);
    }
    spec.n_cases = s.n_cases;
    spec.n_controls = s.n_controls;
    spec.seed = o.seed;
  }

  const GroundTruthModel gt = make_ground_truth(s.dim, s.density, s.gt_seed, s.near_diagonal);
  const Cohort co = generate_cohort(gt, spec);
  const CountMatrix counts = counts_from_log(co.log_abundance, s.depth);

  emit(o, m, "counts.tsv", format_count_table(counts));
  emit(o, m, "labels.tsv", format_labels(co.labels, co.log_abundance.samples));
  emit(o, m, "truth.json", truth_to_json(gt, spec, co));
  emit(o, m, "spec.json", spec_to_json(spec));
  emit(o, m, "model.json", model_to_json(gt.model));
  {
    std::ostringstream os;
    os << "taxon";
    for (const auto& sname : co.log_abundance.samples) os << '\t' << sname;
    os << '\n';
    for (int i = 0; i < co.log_abundance.n_taxa(); ++i) {
      os << co.log_abundance.taxa[static_cast<std::size_t>(i)];
      for (int j = 0; j < co.log_abundance.n_samples(); ++j) os << '\t' << fmt_g17(co.log_abundance.values(i, j));
      os << '\n';
    }
    emit(o, m, "log_abundance.tsv", os.str());
  }
  finish(o, m);
  return 0;
}

// ---------------------------------------------------------------- network

int run_network(const CommonOpts& o, const std::string& kind, double pos_cutoff, double neg_cutoff) {
  Manifest m;
  m.subcommand = "network";
  m.version = version_string();
  m.seed = o.seed;
  m.add("kind", kind);
  m.add("pos_cutoff", fmt_g17(pos_cutoff));
  m.add("neg_cutoff", fmt_g17(neg_cutoff));
  echo_common(m, o);
  LoadedData d = load_data(o, m, false);
  const EdgeSignificance sig =
      edge_significance(d.log, edge_kind_from_string(kind), o.n_perm, o.seed, o.lambda_min);
  const EdgeList edges = extract_edges(sig, pos_cutoff, neg_cutoff, o.fdr);
  emit(o, m, "edges.tsv", edges_tsv(edges, d.log.taxa));
  finish(o, m);
  return 0;
}

// ---------------------------------------------------------------- classify

int run_classify(const CommonOpts& o, const std::vector<std::string>& subset_specs, int folds, int repeats,
                 double penalty) {
  Manifest m;
  m.subcommand = "classify";
  m.version = version_string();
  m.seed = o.seed;
  m.add("folds", std::to_string(folds));
  m.add("repeats", std::to_string(repeats));
  m.add("penalty", fmt_g17(penalty));
  echo_common(m, o);
  LoadedData d = load_data(o, m, true);

  auto resolve = [&](const std::string& tok) -> int {
    for (std::size_t i = 0; i < d.log.taxa.size(); ++i)
      if (d.log.taxa[i] == tok) return static_cast<int>(i);
    try {
      std::size_t pos = 0;
      const int v = std::stoi(tok, &pos);
      if (pos == tok.size()) return v;
    } catch (const std::exception&) {
    }
    throw Error("unknown taxon in --subset: '" + tok + "'");
  };

  std::vector<std::pair<std::string, std::vector<int>>> subsets;
  if (subset_specs.empty()) {
    std::vector<int> all(d.log.taxa.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    subsets.emplace_back("all", all);
  }
  for (const auto& spec : subset_specs) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw Error("--subset must look like name:taxon,taxon,...");
    const std::string name = spec.substr(0, colon);
    std::vector<int> idx;
    std::stringstream ss(spec.substr(colon + 1));
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) idx.push_back(resolve(tok));
    subsets.emplace_back(name, idx);
    m.add("subset:" + name, spec.substr(colon + 1));
  }

  std::vector<std::pair<std::string, CVReport>> reports;
  for (const auto& [name, idx] : subsets) {
    const CVReport rep = cross_validate(d.log, d.labels, idx, folds, repeats, penalty, o.seed);
    emit(o, m, "cv_" + name + ".json", cv_report_json(name, rep));
    reports.emplace_back(name, rep);
  }
  emit(o, m, "cv.csv", cv_table_csv(reports));
  finish(o, m);
  return 0;
}

// ---------------------------------------------------------------- validate

int run_validate(const CommonOpts& o) {
  Manifest m;
  m.subcommand = "validate";
  m.version = version_string();
  m.seed = o.seed;
  echo_common(m, o);
  LoadedData d = load_data(o, m, false);
  const MomentReport rep = validate_moments(d.log, o.seed == 0 ? 1 : o.seed);
  std::ostringstream os;
  os << "statistic,value\n";
  os << "r_third," << fmt_g(rep.r_third) << '\n';
  os << "r_fourth," << fmt_g(rep.r_fourth) << '\n';
  os << "baseline_r_third," << fmt_g(rep.baseline_r_third) << '\n';
  os << "baseline_r_fourth," << fmt_g(rep.baseline_r_fourth) << '\n';
  os << "\nkind,rank,predicted,observed\n";
  for (std::size_t k = 0; k < rep.third_noncentral_pred.size(); ++k)
    os << "third," << k << ',' << fmt_g(rep.third_noncentral_pred[k]) << ',' << fmt_g(rep.third_noncentral_obs[k])
       << '\n';
  for (std::size_t k = 0; k < rep.fourth_central_pred.size(); ++k)
    os << "fourth," << k << ',' << fmt_g(rep.fourth_central_pred[k]) << ',' << fmt_g(rep.fourth_central_obs[k])
       << '\n';
  emit(o, m, "moments.csv", os.str());
  finish(o, m);
  return 0;
}

// ---------------------------------------------------------------- robustness

struct RobustOpts {
  std::string op;  // stability, covcompare, sweep, norm, calibration
  double fraction = 0.8;
  int repeats = 50;
  std::string retained = "";
  std::string schemes = "tss,clr,css,none";
  std::string sizes = "";
  std::string method = "daa";
};

int run_robustness(const CommonOpts& o, const RobustOpts& r) {
  Manifest m;
  m.subcommand = "robustness";
  m.version = version_string();
  m.seed = o.seed;
  m.add("op", r.op);
  m.add("fraction", fmt_g17(r.fraction));
  m.add("repeats", std::to_string(r.repeats));
  if (!r.retained.empty()) m.add("retained", r.retained);
  m.add("schemes", r.schemes);
  if (!r.sizes.empty()) m.add("sizes", r.sizes);
  m.add("method", r.method);
  echo_common(m, o);
  LoadedData d = load_data(o, m, true);

  if (r.op == "stability") {
    const StabilityReport rep = subsample_stability(d.log, d.labels, r.fraction, r.repeats, o.lambda_min, o.seed);
    emit(o, m, "stability.csv", stability_csv(rep));
  } else if (r.op == "covcompare") {
    const CovCompareReport rep = compare_group_covariances(d.log, d.labels, r.repeats, o.seed);
    emit(o, m, "covcompare.csv", covcompare_csv(rep));
  } else if (r.op == "sweep") {
    if (r.retained.empty()) throw Error("--op sweep needs --retained");
    const SweepReport rep =
        lambda_sweep(d.log, d.labels, parse_int_list(r.retained, "--retained"), o.n_perm, o.seed);
    emit(o, m, "sweep.csv", sweep_csv(rep));
  } else if (r.op == "norm") {
    if (r.sizes.empty()) throw Error("--op norm needs --sizes");
    std::vector<Scheme> schemes;
    std::stringstream ss(r.schemes);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) schemes.push_back(scheme_from_string(tok));
    const NormalizationReport rep = normalization_comparison(
        d.counts, d.labels, schemes, parse_int_list(r.sizes, "--sizes"), o.n_perm, o.seed, r.repeats);
    emit(o, m, "normalization.csv", normalization_csv(rep));
  } else if (r.op == "calibration") {
    const CalibrationReport rep =
        pvalue_calibration(d.log, d.labels, method_from_string(r.method), r.repeats, make_assoc_options(o));
    std::ostringstream os;
    os << "statistic,value\n";
    os << "ks_distance," << fmt_g(rep.ks_distance) << '\n';
    os << "n_pvalues," << rep.sorted_p.size() << '\n';
    os << "\nrank,p\n";
    for (std::size_t k = 0; k < rep.sorted_p.size(); ++k) os << k << ',' << fmt_g(rep.sorted_p[k]) << '\n';
    emit(o, m, "calibration.csv", os.str());
  } else {
    throw Error("unknown --op: " + r.op + " (expected stability, covcompare, sweep, norm, calibration)");
  }
  finish(o, m);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"direct association analysis for case/control count data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version_string());

  CommonOpts fit_o;
  auto* fit_cmd = app.add_subcommand("fit", "fit the pairwise model to a cohort");
  add_common_flags(fit_cmd, fit_o, true, false);

  CommonOpts assoc_o;
  std::string assoc_method = "daa";
  auto* assoc_cmd = app.add_subcommand("assoc", "test per-taxon case/control associations");
  add_common_flags(assoc_cmd, assoc_o, true, true);
  assoc_cmd->add_option("--method", assoc_method, "naive or daa")->default_val("daa");

  CommonOpts curve_o;
  std::string curve_method = "daa", curve_sizes;
  int curve_repeats = 10;
  auto* curve_cmd = app.add_subcommand("curve", "significant-taxon counts vs cohort size");
  add_common_flags(curve_cmd, curve_o, true, true);
  curve_cmd->add_option("--method", curve_method, "naive or daa")->default_val("daa");
  curve_cmd->add_option("--sizes", curve_sizes, "comma-separated cohort sizes")->required();
  curve_cmd->add_option("--repeats", curve_repeats, "subsample repeats per size")->default_val(10);

  CommonOpts synth_o;
  SynthOpts synth_s;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic cohort with known effects");
  add_common_flags(synth_cmd, synth_o, false, false);
  synth_cmd->add_option("--preset", synth_s.preset, "planted-effect preset (table-s2-main/small/large)");
  synth_cmd->add_option("--spec-json", synth_s.spec_json_path, "cohort spec JSON (overrides preset and sizes)");
  synth_cmd->add_option("--dim", synth_s.dim, "number of taxa")->default_val(47);
  synth_cmd->add_option("--density", synth_s.density, "coupling density of the ground truth")->default_val(0.3);
  synth_cmd->add_option("--gt-seed", synth_s.gt_seed, "ground-truth structure seed")->default_val(1);
  synth_cmd->add_flag("--near-diagonal", synth_s.near_diagonal, "uncoupled (diagonal) ground truth");
  synth_cmd->add_option("--n-cases", synth_s.n_cases, "case samples")->default_val(275);
  synth_cmd->add_option("--n-controls", synth_s.n_controls, "control samples")->default_val(189);
  synth_cmd->add_option("--depth", synth_s.depth, "median sequencing depth for synthesized counts")
      ->default_val(3.0e4);

  CommonOpts net_o;
  std::string net_kind = "correlation";
  double net_pos = 0.27, net_neg = -0.15;
  auto* net_cmd = app.add_subcommand("network", "taxon-taxon edges with permutation significance");
  add_common_flags(net_cmd, net_o, true, false);
  net_cmd->add_option("--kind", net_kind, "correlation or interaction")->default_val("correlation");
  net_cmd->add_option("--pos-cutoff", net_pos, "keep edges above this weight")->default_val(0.27);
  net_cmd->add_option("--neg-cutoff", net_neg, "keep edges below this weight")->default_val(-0.15);

  CommonOpts cls_o;
  std::vector<std::string> cls_subsets;
  int cls_folds = 5, cls_repeats = 10;
  double cls_penalty = 0.0;
  auto* cls_cmd = app.add_subcommand("classify", "cross-validated sparse logistic classification");
  add_common_flags(cls_cmd, cls_o, true, true);
  cls_cmd->add_option("--subset", cls_subsets, "feature subset, name:taxon,taxon,... (repeatable)");
  cls_cmd->add_option("--folds", cls_folds, "cross-validation folds")->default_val(5);
  cls_cmd->add_option("--repeats", cls_repeats, "shuffled repeats")->default_val(10);
  cls_cmd->add_option("--penalty", cls_penalty, "L1 penalty (<= 0 picks from an internal ladder)")
      ->default_val(0.0);

  CommonOpts val_o;
  auto* val_cmd = app.add_subcommand("validate", "check third/fourth moments of the fitted model");
  add_common_flags(val_cmd, val_o, true, false);

  CommonOpts rob_o;
  RobustOpts rob_r;
  auto* rob_cmd = app.add_subcommand("robustness", "stability and sensitivity analyses");
  add_common_flags(rob_cmd, rob_o, true, true);
  rob_cmd->add_option("--op", rob_r.op, "stability, covcompare, sweep, norm, calibration")->required();
  rob_cmd->add_option("--fraction", rob_r.fraction, "subsample fraction for --op stability")->default_val(0.8);
  rob_cmd->add_option("--repeats", rob_r.repeats, "repeats for the chosen op")->default_val(50);
  rob_cmd->add_option("--retained", rob_r.retained, "comma-separated retained-component counts (sweep)");
  rob_cmd->add_option("--schemes", rob_r.schemes, "comma-separated schemes (norm)")
      ->default_val("tss,clr,css,none");
  rob_cmd->add_option("--sizes", rob_r.sizes, "comma-separated cohort sizes (norm)");
  rob_cmd->add_option("--method", rob_r.method, "method for --op calibration")->default_val("daa");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (fit_cmd->parsed()) return run_fit(fit_o);
    if (assoc_cmd->parsed()) return run_assoc(assoc_o, assoc_method);
    if (curve_cmd->parsed()) return run_curve(curve_o, curve_method, curve_sizes, curve_repeats);
    if (synth_cmd->parsed()) return run_synth(synth_o, synth_s);
    if (net_cmd->parsed()) return run_network(net_o, net_kind, net_pos, net_neg);
    if (cls_cmd->parsed()) return run_classify(cls_o, cls_subsets, cls_folds, cls_repeats, cls_penalty);
    if (val_cmd->parsed()) return run_validate(val_o);
    if (rob_cmd->parsed()) return run_robustness(rob_o, rob_r);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
