// gfam: batch driver for the partitioning family.
//
//   gfam gen      --kind blobs|planes-line|lowrank|clustered-lowrank --output X
//   gfam cluster  --input X [--alpha --k --r --adapt ...] --out DIR
//   gfam ensemble --input X [--B 200 --q 40] --out DIR
//   gfam cssp     --input X --r-list 30,60,90 --method deim --variant cvod --output F
//   gfam mor      [--pde-config F | --paper-scale] --output F
//
// Exit status: 0 success, 1 runtime failure, 2 usage error.

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "gfam/cssp.hpp"
#include "gfam/datagen.hpp"
#include "gfam/ensemble.hpp"
#include "gfam/error.hpp"
#include "gfam/linalg.hpp"
#include "gfam/matio.hpp"
#include "gfam/mor.hpp"
#include "gfam/partition.hpp"

namespace fs = std::filesystem;
using namespace gfam;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InputOpts {
  std::string path;
  std::string format = "auto";
  std::string points = "cols";
};

void add_input(CLI::App* sub, InputOpts& in) {
  sub->add_option("--input,-i", in.path, "Data matrix file")->required();
  sub->add_option("--format", in.format, "csv, bin, idx or auto")
      ->check(CLI::IsMember({"auto", "csv", "bin", "idx"}));
  sub->add_option("--points", in.points, "Whether data points are stored as columns or rows")
      ->check(CLI::IsMember({"cols", "rows"}));
}

MatrixFormat parse_format(const std::string& s, const fs::path& path) {
  if (s == "csv") return MatrixFormat::csv;
  if (s == "bin") return MatrixFormat::gfam_bin;
  if (s == "idx") return MatrixFormat::idx;
  return format_from_path(path);
}

DataMatrix load_input(const InputOpts& in) {
  DataMatrix d = load_matrix(in.path, parse_format(in.format, in.path));
  if (in.points == "rows") d.transposeInPlace();
  validate_finite(d);
  return d;
}

struct FamilyOpts {
  double alpha = 1.0;
  std::size_t k = 1;
  std::size_t r = 0;
  std::vector<std::size_t> dims;
  double tol = 0.1;
  std::size_t max_iter = 50;
  bool adapt = false;
  bool zero_means = false;
  double eta = 1e-8;
  std::uint64_t seed = 0;
  std::string init = "random";
  std::string init_labels;
  std::string centering = "vector";
};

void add_family(CLI::App* sub, FamilyOpts& f) {
  sub->add_option("--alpha", f.alpha, "Mixing weight in [0,1]")->check(CLI::Range(0.0, 1.0));
  sub->add_option("--k", f.k, "Initial number of clusters")->check(CLI::PositiveNumber);
  sub->add_option("--r", f.r, "Total subspace dimension");
  sub->add_option("--dims", f.dims, "Explicit per-cluster dimensions")->delimiter(',');
  sub->add_option("--tol", f.tol, "Stop when consecutive energies differ by less")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--max-iter", f.max_iter, "Iteration limit")->check(CLI::PositiveNumber);
  sub->add_flag("--adapt,!--no-adapt", f.adapt, "Re-split the dimension budget each iteration");
  sub->add_flag("--zero-means", f.zero_means, "Pin cluster means at the origin");
  sub->add_option("--eta", f.eta, "Mean step regularizer")->check(CLI::PositiveNumber);
  sub->add_option("--seed", f.seed, "Random seed");
  sub->add_option("--init", f.init, "random, labels or correlation")
      ->check(CLI::IsMember({"random", "labels", "correlation"}));
  sub->add_option("--init-labels", f.init_labels, "Label file for --init labels");
  sub->add_option("--centering", f.centering, "Correlation centering: vector or feature")
      ->check(CLI::IsMember({"vector", "feature"}));
}

CorrelationCentering parse_centering(const std::string& s) {
  return s == "feature" ? CorrelationCentering::per_feature : CorrelationCentering::per_vector;
}

FamilyConfig to_config(const FamilyOpts& f) {
  FamilyConfig cfg;
  cfg.alpha = f.alpha;
  cfg.k_init = f.k;
  cfg.total_dim = f.r;
  cfg.dims = f.dims;
  cfg.tol = f.tol;
  cfg.max_iter = f.max_iter;
  cfg.adaptive = f.adapt;
  cfg.fix_means_zero = f.zero_means;
  cfg.eta = f.eta;
  cfg.seed = f.seed;
  cfg.centering = parse_centering(f.centering);
  if (f.init == "labels") {
    if (f.init_labels.empty()) throw UsageError("--init labels needs --init-labels");
    cfg.init = InitKind::given_labels;
    cfg.initial_labels = load_labels(f.init_labels);
  } else if (f.init == "correlation") {
    cfg.init = InitKind::correlation_quantile;
  }
  return cfg;
}

// First two principal coordinates of the centered data, then the label.
std::string plot_csv(const DataMatrix& data, const Labels& labels) {
  Eigen::MatrixXd centered = data.colwise() - data.rowwise().mean();
  const LeftSpectrum sp = leading_left(centered, 2);
  Eigen::MatrixXd coords = Eigen::MatrixXd::Zero(2, data.cols());
  coords.topRows(sp.U.cols()) = sp.U.transpose() * centered;
  std::string text = "pc1,pc2,label\n";
  char buf[96];
  for (Index j = 0; j < data.cols(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d\n", coords(0, j), coords(1, j),
                  labels[static_cast<std::size_t>(j)]);
    text += buf;
  }
  return text;
}

std::string dims_text(const std::vector<std::size_t>& d) {
  std::string s;
  for (std::size_t i = 0; i < d.size(); ++i) s += (i ? "," : "") + std::to_string(d[i]);
  return s;
}

// ---- gen --------------------------------------------------------------------

struct GenOpts {
  std::string kind = "blobs";
  std::string output;
  std::string truth;
  std::size_t k = 5, ambient = 600, per_cluster = 100, embed = 0;
  double spread = 1.0, separation = 75.0;
  std::size_t n_plane = 250, n_line = 100;
  double noise = 0.01;
  std::size_t m = 200, n = 300, rank = 10, blocks = 5;
  std::string decay = "geometric";
  std::uint64_t seed = 0;
};

int cmd_gen(const GenOpts& o) {
  Generated g;
  if (o.kind == "blobs") {
    g = gen_blobs(o.k, o.ambient, o.per_cluster, o.spread, o.separation, o.seed);
    // The embedding gets its own stream; sharing the generator seed correlates it with the noise.
    if (o.embed > 0)
      g.data = gaussian_embed(g.data, static_cast<Index>(o.embed), o.seed ^ 0x9e3779b97f4a7c15ULL);
  } else if (o.kind == "planes-line") {
    g = gen_planes_line(o.n_plane, o.n_line, o.noise, o.seed);
  } else if (o.kind == "lowrank") {
    if (o.rank > std::min(o.m, o.n)) throw UsageError("--rank exceeds min(m, n)");
    g.data = gen_lowrank_noise(o.m, o.n, o.rank, o.noise,
                               o.decay == "flat" ? Decay::flat : Decay::geometric, o.seed)
                 .data;
  } else {
    g = gen_clustered_lowrank(o.m, o.blocks, o.n, o.rank, o.noise, o.seed);
  }
  save_matrix(g.data, o.output, format_from_path(o.output));
  if (!o.truth.empty()) {
    nlohmann::ordered_json j;
    j["true_k"] = g.truth.true_k;
    j["true_dims"] = g.truth.true_dims;
    j["labels"] = g.truth.labels;
    write_text(o.truth, j.dump(2) + "\n");
  }
  return 0;
}

// ---- cluster ----------------------------------------------------------------

int cmd_cluster(const InputOpts& in, const FamilyOpts& f, const std::string& out) {
  const DataMatrix data = load_input(in);
  FamilyConfig cfg = to_config(f);
  try {
    validate_config(cfg, data);
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  }
  const RunResult res = run(data, cfg);
  fs::create_directories(out);
  save_labels(res.state.labels, fs::path(out) / "labels.csv");
  emit_report(res.report, fs::path(out) / "report.json");
  write_text(fs::path(out) / "plot.csv", plot_csv(data, res.state.labels));
  std::cout << "k=" << res.state.k() << " dims=" << dims_text(res.state.dims)
            << " energy=" << res.report.energy_trace.back()
            << " iterations=" << res.report.iterations << "\n";
  return 0;
}

// ---- ensemble ---------------------------------------------------------------

struct EnsembleOpts {
  std::size_t runs = 200, q = 40, k = 4, r = 7;
  std::string mode = "or";
  std::uint64_t seed = 0;
};

int cmd_ensemble(const InputOpts& in, const EnsembleOpts& o, std::size_t threads,
                 const std::string& out) {
  const DataMatrix data = load_input(in);
  const auto kcfg = kest_config(o.k, o.r, o.seed);
  const auto acfg = affinity_config(o.k, o.r, o.seed);
  try {
    validate_config(kcfg, data);
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  }
  const auto mode = o.mode == "and" ? ThresholdMode::row_and_column : ThresholdMode::row_or_column;
  const EnsembleResult res = ensemble_pipeline(data, kcfg, acfg, o.runs, o.q, mode, threads);
  fs::create_directories(out);
  save_labels(res.labels, fs::path(out) / "labels.csv");
  nlohmann::ordered_json j;
  j["k_hat"] = res.k_hat;
  j["runs"] = o.runs;
  j["q"] = o.q;
  j["kest_finals"] = res.kest_finals;
  write_text(fs::path(out) / "ensemble.json", j.dump(2) + "\n");
  std::cout << "k_hat=" << res.k_hat << "\n";
  return 0;
}

// ---- cssp -------------------------------------------------------------------

struct CsspOpts {
  std::vector<std::size_t> r_list{30, 60, 90};
  std::string method = "deim";
  std::string variant = "cvod";
  std::size_t k = 5;
  std::uint64_t seed = 0;
  std::string output;
  std::string monitor;
};

int cmd_cssp(const InputOpts& in, const CsspOpts& o) {
  const DataMatrix a = load_input(in);
  const auto limit = static_cast<std::size_t>(std::min(a.rows(), a.cols()));
  for (std::size_t r : o.r_list)
    if (r < 1 || r > limit)
      throw UsageError("r = " + std::to_string(r) + " outside [1, " + std::to_string(limit) + "]");
  const CsspMethod method = parse_method(o.method);
  std::vector<SelectionResult> results;
  std::string text = "r,error,g_star\n";
  char buf[96];
  for (std::size_t r : o.r_list) {
    SelectionResult res;
    if (o.variant == "none") {
      res = select_columns(a, static_cast<Index>(r), method);
    } else {
      const auto v = o.variant == "vqpca" ? PairingVariant::vqpca_based : PairingVariant::cvod_based;
      res = partitioned_select(a, static_cast<Index>(r), o.k, method, v, o.seed);
    }
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", r, res.relative_error,
                  res.g_star.value_or(0.0));
    text += buf;
    results.push_back(std::move(res));
  }
  write_text(o.output, text);
  if (!o.monitor.empty()) write_text(o.monitor, monitor_csv(theorem1_monitor(results)));
  return 0;
}

// ---- mor --------------------------------------------------------------------

struct MorOpts {
  std::string pde_config;
  bool paper_scale = false;
  std::size_t r = 10, k = 10;
  double tol = 1e-4;
  std::string centering = "vector";
  std::string output;
  std::string report;
  std::string snapshots;
};

int cmd_mor(const MorOpts& o) {
  PdeConfig pde = o.paper_scale ? fine_grid_pde() : PdeConfig{};
  if (!o.pde_config.empty()) pde = load_pde_config(o.pde_config);
  if (o.paper_scale) pde.dx = fine_grid_pde().dx;
  const SnapshotSet s = simulate_snapshots(pde);
  if (o.r < 1 || o.r > static_cast<std::size_t>(std::min(s.snapshots.rows(), s.snapshots.cols())))
    throw UsageError("--r outside [1, min(dofs, snapshots)]");
  if (!o.snapshots.empty()) save_matrix(s.snapshots, o.snapshots, format_from_path(o.snapshots));
  const MorComparison c = compare_pod_vs_family(s, o.r, o.k, o.tol, parse_centering(o.centering));
  write_text(o.output, comparison_csv(c));
  if (!o.report.empty()) emit_report(c.report, o.report);
  std::cout << "dofs=" << s.snapshots.rows() << " snapshots=" << s.snapshots.cols()
            << " mean_pod=" << c.mean_pod << " mean_family=" << c.mean_family
            << " final_k=" << c.final_k << " dims=" << dims_text(c.final_dims) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partitioning family: clustering, ensemble subspace clustering, CSSP and MOR"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML file mirroring the command-line flags");
  std::size_t threads = 1;
  app.add_option("--threads", threads, "Worker cap")->envname("GFAM_THREADS")->check(CLI::PositiveNumber);

  GenOpts gen;
  auto* g = app.add_subcommand("gen", "Write a synthetic data set");
  g->add_option("--kind", gen.kind)->check(CLI::IsMember({"blobs", "planes-line", "lowrank", "clustered-lowrank"}));
  g->add_option("--output,-o", gen.output, "Matrix file (.csv or .bin)")->required();
  g->add_option("--truth", gen.truth, "Ground-truth JSON sidecar");
  g->add_option("--k", gen.k)->check(CLI::PositiveNumber);
  g->add_option("--ambient", gen.ambient)->check(CLI::PositiveNumber);
  g->add_option("--per-cluster", gen.per_cluster)->check(CLI::PositiveNumber);
  g->add_option("--spread", gen.spread)->check(CLI::NonNegativeNumber);
  g->add_option("--separation", gen.separation)->check(CLI::NonNegativeNumber);
  g->add_option("--embed", gen.embed, "Gaussian embedding dimension for blobs (0 = none)");
  g->add_option("--n-plane", gen.n_plane)->check(CLI::PositiveNumber);
  g->add_option("--n-line", gen.n_line)->check(CLI::PositiveNumber);
  g->add_option("--noise", gen.noise)->check(CLI::NonNegativeNumber);
  g->add_option("--m", gen.m)->check(CLI::PositiveNumber);
  g->add_option("--n", gen.n, "Columns (per block for clustered-lowrank)")->check(CLI::PositiveNumber);
  g->add_option("--rank", gen.rank)->check(CLI::PositiveNumber);
  g->add_option("--blocks", gen.blocks)->check(CLI::PositiveNumber);
  g->add_option("--decay", gen.decay)->check(CLI::IsMember({"flat", "geometric"}));
  g->add_option("--seed", gen.seed);

  InputOpts cl_in;
  FamilyOpts fam;
  std::string cl_out = ".";
  auto* c = app.add_subcommand("cluster", "Run one member of the family");
  add_input(c, cl_in);
  add_family(c, fam);
  c->add_option("--out", cl_out, "Directory for labels.csv, report.json and plot.csv");

  InputOpts en_in;
  EnsembleOpts ens;
  std::string en_out = ".";
  auto* e = app.add_subcommand("ensemble", "Ensemble subspace clustering");
  add_input(e, en_in);
  e->add_option("--B", ens.runs, "Base runs")->check(CLI::PositiveNumber);
  e->add_option("--q", ens.q, "Entries kept per row/column")->check(CLI::PositiveNumber);
  e->add_option("--k", ens.k, "Initial clusters per base run")->check(CLI::PositiveNumber);
  e->add_option("--r", ens.r, "Total dimension per base run")->check(CLI::PositiveNumber);
  e->add_option("--threshold", ens.mode, "or / and")->check(CLI::IsMember({"or", "and"}));
  e->add_option("--seed", ens.seed);
  e->add_option("--out", en_out, "Directory for labels.csv and ensemble.json");

  InputOpts cs_in;
  CsspOpts cs;
  auto* s = app.add_subcommand("cssp", "Column subset selection error sweep");
  add_input(s, cs_in);
  s->add_option("--r-list", cs.r_list, "Ranks")->delimiter(',');
  s->add_option("--method", cs.method)->check(CLI::IsMember({"deim", "cpqr", "lupp"}));
  s->add_option("--variant", cs.variant, "cvod, vqpca or none (unpartitioned)")
      ->check(CLI::IsMember({"cvod", "vqpca", "none"}));
  s->add_option("--k", cs.k, "Initial clusters")->check(CLI::PositiveNumber);
  s->add_option("--seed", cs.seed);
  s->add_option("--output,-o", cs.output, "CSV of r,error,g_star")->required();
  s->add_option("--monitor", cs.monitor, "CSV of residual vs partition energy");

  MorOpts mo;
  auto* m = app.add_subcommand("mor", "POD vs partitioned bases on reaction-diffusion snapshots");
  m->add_option("--pde-config", mo.pde_config, "JSON with nu, dx, dt, t_final, ...");
  m->add_flag("--paper-scale", mo.paper_scale, "Fine grid (6241 unknowns); slow");
  m->add_option("--r", mo.r, "Basis size")->check(CLI::PositiveNumber);
  m->add_option("--k", mo.k, "Initial clusters")->check(CLI::PositiveNumber);
  m->add_option("--tol", mo.tol)->check(CLI::NonNegativeNumber);
  m->add_option("--centering", mo.centering)->check(CLI::IsMember({"vector", "feature"}));
  m->add_option("--output,-o", mo.output, "CSV of t,pod_err,family_err")->required();
  m->add_option("--report", mo.report, "Run report JSON");
  m->add_option("--snapshots", mo.snapshots, "Also write the snapshot matrix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    std::cerr << "error: " << ex.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*g) return cmd_gen(gen);
    if (*c) return cmd_cluster(cl_in, fam, cl_out);
    if (*e) return cmd_ensemble(en_in, ens, threads, en_out);
    if (*s) return cmd_cssp(cs_in, cs);
    if (*m) return cmd_mor(mo);
  } catch (const UsageError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  } catch (const ConvergenceError& ex) {
    std::cerr << "error: " << ex.what() << " (time step " << ex.step() << ")\n";
    return 1;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 2;
}
