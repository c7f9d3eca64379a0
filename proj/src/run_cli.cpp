#include "ritzcg/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ritzcg/csv.hpp"
#include "ritzcg/opticalflow.hpp"
#include "ritzcg/pgm.hpp"
#include "ritzcg/steklov.hpp"
#include "ritzcg/tikhonov.hpp"

namespace ritzcg {

namespace {

namespace fs = std::filesystem;

struct SolveArgs {
  std::string a_csv, m_csv, ba_csv, bm_csv;
  double lambda = 0.0;
  double eps = 1e-8;
  int max_iter = 1000;
  std::string criteria = "residual";
  std::string sweep_lambdas;
  bool no_ritz = false;
  std::string basis_in;    // augment the solve with a persisted basis
  std::string basis_out;   // persist the recycled basis for later runs
  double recycle = 0.85;
  std::uint64_t seed = 0;
  std::string out;
};

struct DatacompArgs {
  int nel = 40;
  int k = 3;
  double snr = 10.0;
  std::uint64_t seed = 0;
  std::string method = "cg";
  std::string prec = "sd";
  std::string reg = "sd";
  double lambda = 1e-9;
  double eps = 1e-9;
  double eps_sigma = 1e-3;
  int max_iter = 200;
  std::string out;
};

struct FlowArgs {
  std::string img1, img2;
  double lambda = 1000.0;
  std::string lambdas;
  double eps = 1e-5;
  std::string levels = "auto";
  double recycle = 0.85;
  int median = 3;
  bool jacobi = false;
  std::uint64_t seed = 0;
  std::string out;
};

struct SweepArgs {
  std::string ritz_json;
  std::string lambdas;
  std::string out;
};

std::vector<double> parse_lambda_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    values.push_back(std::stod(item));
  }
  return values;
}

unsigned parse_criteria(const std::string& text) {
  unsigned mask = 0;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "residual")
      mask = mask | StopCriterion::ResidualRatio;
    else if (item == "minres")
      mask = mask | StopCriterion::MinresStyle;
    else if (item == "stagnation")
      mask = mask | StopCriterion::Stagnation;
    else
      throw CliUsageError("unknown stopping criterion '" + item + "'");
  }
  if (mask == 0) throw CliUsageError("no stopping criterion selected");
  return mask;
}

void add_checksum(RunManifest& manifest, const fs::path& dir, const std::string& name) {
  manifest.output_checksums[name] = file_checksum((dir / name).string());
}

void finish_run(const fs::path& dir, RunManifest& manifest) {
  manifest.rng_algorithm = Rng::algorithm();
  write_manifest((dir / "run.json").string(), manifest);
}

void write_natural_euclid(const fs::path& dir, const ComparisonResult& run,
                          RunManifest& manifest) {
  {
    std::ofstream out(dir / "lcurve_natural.csv");
    out << "iter,err_a_offset_sq,corr_mnorm_sq\n";
    for (size_t i = 0; i < run.natural.err_axis.size(); ++i)
      out << i << ',' << format_number(run.natural.err_axis[i]) << ','
          << format_number(run.natural.norm_axis[i]) << '\n';
  }
  {
    std::ofstream out(dir / "lcurve_euclid.csv");
    out << "iter,res_norm_sq,dx_norm_sq\n";
    for (size_t i = 0; i < run.euclid.err_axis.size(); ++i)
      out << i << ',' << format_number(run.euclid.err_axis[i]) << ','
          << format_number(run.euclid.norm_axis[i]) << '\n';
  }
  add_checksum(manifest, dir, "lcurve_natural.csv");
  add_checksum(manifest, dir, "lcurve_euclid.csv");
}

int execute_solve(const SolveArgs& args, RunManifest manifest) {
  fs::create_directories(args.out);
  fs::path dir(args.out);

  Matrix a = read_matrix_csv(args.a_csv);
  Matrix m = args.m_csv.empty()
                 ? Matrix(Matrix::Identity(a.rows(), a.cols()))
                 : read_matrix_csv(args.m_csv);
  Vector b_a = read_vector_csv(args.ba_csv);
  Vector b_m = args.bm_csv.empty() ? Vector(Vector::Zero(b_a.size()))
                                   : read_vector_csv(args.bm_csv);

  TikhonovSystem system{dense_map(a), dense_map(m), make_dense_inverse_map(m),
                        b_a, b_m, args.lambda};
  SolveConfig cfg;
  cfg.eps = args.eps;
  cfg.max_iter = args.max_iter;
  cfg.criteria = parse_criteria(args.criteria);
  if (!args.basis_out.empty()) cfg.reorthogonalize = true;  // Ritz-quality run

  AugmentationBasis basis;
  if (!args.basis_in.empty()) basis = load_basis(args.basis_in, system.shifted());

  RegularizedSolve solve = solve_regularized(system, cfg, &basis, !args.no_ritz);

  write_vector_csv((dir / "x.csv").string(), solve.result.x);
  write_trace_csv((dir / "trace.csv").string(), solve.result.trace);
  add_checksum(manifest, dir, "x.csv");
  add_checksum(manifest, dir, "trace.csv");

  if (!args.basis_out.empty() && solve.ritz && solve.result.trace.m() >= 1) {
    TridiagEig eig = tridiag_eig(build_tridiagonal(solve.result.trace));
    Matrix av = ritz_apply_a(solve.result.trace, eig);
    int keep = static_cast<int>(std::ceil(args.recycle * solve.result.trace.m()));
    save_basis(args.basis_out,
               recycle(basis, system.shifted(), *solve.ritz, av, keep));
  }

  if (solve.ritz) {
    write_lcurve_csv((dir / "lcurve.csv").string(),
                     ritz_lcurve(*solve.ritz, args.lambda));
    write_picard_csv((dir / "picard.csv").string(),
                     picard_table(*solve.ritz, args.lambda));
    write_ritz_json((dir / "ritz.json").string(), *solve.ritz);
    add_checksum(manifest, dir, "lcurve.csv");
    add_checksum(manifest, dir, "picard.csv");

    if (!args.sweep_lambdas.empty()) {
      std::vector<SweepRow> rows;
      for (const SweepPoint& point :
           lambda_sweep(*solve.ritz, solve.result.trace.x0,
                        parse_lambda_list(args.sweep_lambdas)))
        rows.push_back({point.lambda, point.mnorm_sq, point.err_offset});
      write_sweep_csv((dir / "sweep.csv").string(), rows);
      add_checksum(manifest, dir, "sweep.csv");
    }
  }
  finish_run(dir, manifest);
  return solve.result.converged() || solve.result.trace.stop_reason == StopReason::MaxIter
             ? 0
             : 1;
}

int execute_datacomp(const DatacompArgs& args, RunManifest manifest) {
  fs::create_directories(args.out);
  fs::path dir(args.out);

  CauchyCase c;
  c.n_el = args.nel;
  c.wavenumber = args.k;
  c.snr_db = args.snr;
  c.seed = args.seed;

  ComparisonConfig cfg;
  if (args.method == "cg")
    cfg.method = CompareMethod::Cg;
  else if (args.method == "tsvd")
    cfg.method = CompareMethod::Tsvd;
  else if (args.method == "tikhonov")
    cfg.method = CompareMethod::DirectTikhonov;
  else
    throw CliUsageError("unknown method '" + args.method + "'");

  if (args.prec == "sd")
    cfg.prec = PrecKind::SteklovD;
  else if (args.prec == "jacobi")
    cfg.prec = PrecKind::Jacobi;
  else if (args.prec == "id")
    cfg.prec = PrecKind::Identity;
  else
    throw CliUsageError("unknown preconditioner '" + args.prec + "'");

  cfg.regularizer = args.reg == "id" ? RegKind::Identity : RegKind::SteklovD;
  cfg.lambda = args.lambda;
  cfg.eps = args.eps;
  cfg.eps_sigma = args.eps_sigma;
  cfg.max_iter = args.max_iter;

  ComparisonResult run = run_comparison(c, cfg);

  {
    std::ofstream out(dir / "u_R.csv");
    out << "y,u_R\n";
    for (Index j = 0; j < run.u_r.size(); ++j)
      out << format_number(c.height * double(j + 1) / c.n_el) << ','
          << format_number(run.u_r[j]) << '\n';
  }
  add_checksum(manifest, dir, "u_R.csv");

  if (cfg.method == CompareMethod::Cg) {
    write_trace_csv((dir / "trace.csv").string(), run.trace);
    add_checksum(manifest, dir, "trace.csv");
    write_natural_euclid(dir, run, manifest);
    if (run.ritz) {
      write_picard_csv((dir / "picard.csv").string(),
                       picard_table(*run.ritz, args.lambda));
      write_ritz_json((dir / "ritz.json").string(), *run.ritz);
      add_checksum(manifest, dir, "picard.csv");
    }
  }
  finish_run(dir, manifest);
  return 0;
}

void write_flow_outputs(const fs::path& dir, const Image& ux, const Image& uy,
                        RunManifest& manifest, const std::string& prefix) {
  write_matrix_csv((dir / "flow_x.csv").string(), ux);
  write_matrix_csv((dir / "flow_y.csv").string(), uy);
  write_field_pgm((dir / "strain_xx.pgm").string(), strain_xx(ux));
  manifest.output_checksums[prefix + "flow_x.csv"] =
      file_checksum((dir / "flow_x.csv").string());
  manifest.output_checksums[prefix + "flow_y.csv"] =
      file_checksum((dir / "flow_y.csv").string());
}

int execute_opticalflow(const FlowArgs& args, RunManifest manifest) {
  fs::create_directories(args.out);
  fs::path dir(args.out);

  Image i1 = read_pgm(args.img1).to_real();
  Image i2 = read_pgm(args.img2).to_real();

  FlowConfig cfg;
  cfg.solve.eps = args.eps;
  cfg.median_width = args.median;
  cfg.recycle_fraction = args.recycle;
  cfg.jacobi_prec = args.jacobi;
  if (args.levels != "auto") cfg.levels = std::stoi(args.levels);

  std::vector<double> postprocess = parse_lambda_list(args.lambdas);
  FlowResult result = pyramid_solve(i1, i2, args.lambda, cfg, postprocess);
  if (result.levels_clamped)
    std::cerr << "opticalflow: level count clamped to " << result.levels_used << "\n";

  write_flow_outputs(dir, result.ux, result.uy, manifest, "");
  if (result.ritz) {
    write_lcurve_csv((dir / "lcurve.csv").string(),
                     ritz_lcurve(*result.ritz, args.lambda));
    write_picard_csv((dir / "picard.csv").string(),
                     picard_table(*result.ritz, args.lambda));
    write_ritz_json((dir / "ritz.json").string(), *result.ritz);
    add_checksum(manifest, dir, "lcurve.csv");
    add_checksum(manifest, dir, "picard.csv");
  }

  for (size_t p = 0; p < result.postprocess_flows.size(); ++p) {
    std::ostringstream name;
    name << "lambda_" << result.postprocess_lambdas[p];
    fs::path sub = dir / name.str();
    fs::create_directories(sub);
    write_flow_outputs(sub, result.postprocess_flows[p].first,
                       result.postprocess_flows[p].second, manifest,
                       name.str() + "/");
  }
  finish_run(dir, manifest);
  return 0;
}

int execute_sweep(const SweepArgs& args, RunManifest manifest) {
  fs::create_directories(args.out);
  fs::path dir(args.out);

  RitzSet ritz = read_ritz_json(args.ritz_json);
  std::vector<SweepRow> rows;
  for (double lambda : parse_lambda_list(args.lambdas)) {
    auto curve = ritz_lcurve(ritz, lambda);
    rows.push_back({lambda, curve.back().mnorm_sq, curve.back().err_offset});
  }
  write_sweep_csv((dir / "sweep.csv").string(), rows);
  add_checksum(manifest, dir, "sweep.csv");
  finish_run(dir, manifest);
  return 0;
}

struct ParsedCli {
  RunManifest manifest;
  std::function<int()> execute;
};

struct HelpRequested {
  std::string text;
};

ParsedCli build_cli(const std::vector<std::string>& args) {
  auto app = std::make_shared<CLI::App>(
      "regularized Krylov solver with Ritz postprocessing");
  app->require_subcommand(1);

  auto solve_args = std::make_shared<SolveArgs>();
  CLI::App* solve = app->add_subcommand("solve", "solve a generic system from CSV matrices");
  solve->add_option("--a", solve_args->a_csv, "CSV matrix A")->required();
  solve->add_option("--m", solve_args->m_csv, "CSV matrix M (default identity)");
  solve->add_option("--ba", solve_args->ba_csv, "CSV vector b_A")->required();
  solve->add_option("--bm", solve_args->bm_csv, "CSV vector b_M (default zero)");
  solve->add_option("--lambda", solve_args->lambda, "regularization weight");
  solve->add_option("--eps", solve_args->eps, "stopping tolerance");
  solve->add_option("--max-iter", solve_args->max_iter, "iteration cap");
  solve->add_option("--criteria", solve_args->criteria,
                    "comma list: residual,minres,stagnation");
  solve->add_option("--sweep", solve_args->sweep_lambdas, "postprocess weights");
  solve->add_flag("--no-ritz", solve_args->no_ritz, "skip Ritz extraction");
  solve->add_option("--basis", solve_args->basis_in, "augmentation basis to load");
  solve->add_option("--save-basis", solve_args->basis_out,
                    "persist the recycled basis here");
  solve->add_option("--recycle", solve_args->recycle, "recycled Ritz fraction");
  solve->add_option("--seed", solve_args->seed, "random seed");
  solve->add_option("--out", solve_args->out, "output directory")->required();

  auto datacomp_args = std::make_shared<DatacompArgs>();
  CLI::App* datacomp =
      app->add_subcommand("datacomp", "boundary data completion assessment");
  datacomp->add_option("--nel", datacomp_args->nel, "elements per side");
  datacomp->add_option("--k", datacomp_args->k, "signal wavenumber");
  datacomp->add_option("--snr", datacomp_args->snr, "signal-to-noise ratio (dB)");
  datacomp->add_option("--seed", datacomp_args->seed, "noise seed");
  datacomp->add_option("--method", datacomp_args->method, "cg | tsvd | tikhonov");
  datacomp->add_option("--prec", datacomp_args->prec, "sd | jacobi | id");
  datacomp->add_option("--reg", datacomp_args->reg, "sd | id (direct method)");
  datacomp->add_option("--lambda", datacomp_args->lambda, "regularization weight");
  datacomp->add_option("--eps", datacomp_args->eps, "stopping tolerance");
  datacomp->add_option("--eps-sigma", datacomp_args->eps_sigma, "tsvd threshold");
  datacomp->add_option("--max-iter", datacomp_args->max_iter, "iteration cap");
  datacomp->add_option("--out", datacomp_args->out, "output directory")->required();

  auto flow_args = std::make_shared<FlowArgs>();
  CLI::App* flow = app->add_subcommand("opticalflow", "optical flow assessment");
  flow->add_option("--img1", flow_args->img1, "reference image (PGM)")->required();
  flow->add_option("--img2", flow_args->img2, "deformed image (PGM)")->required();
  flow->add_option("--lambda", flow_args->lambda, "solve regularization weight");
  flow->add_option("--lambdas", flow_args->lambdas, "postprocess weights, comma list");
  flow->add_option("--eps", flow_args->eps, "inner stopping tolerance");
  flow->add_option("--levels", flow_args->levels, "pyramid levels or 'auto'");
  flow->add_option("--recycle", flow_args->recycle, "recycled Ritz fraction");
  flow->add_option("--median", flow_args->median, "median filter width");
  flow->add_flag("--jacobi", flow_args->jacobi, "diagonal preconditioner comparison");
  flow->add_option("--seed", flow_args->seed, "random seed");
  flow->add_option("--out", flow_args->out, "output directory")->required();

  auto sweep_args = std::make_shared<SweepArgs>();
  CLI::App* sweep = app->add_subcommand("sweep", "lambda postprocess of a saved trace");
  sweep->add_option("--ritz", sweep_args->ritz_json, "ritz.json from a solve")->required();
  sweep->add_option("--lambdas", sweep_args->lambdas, "weights, comma list")->required();
  sweep->add_option("--out", sweep_args->out, "output directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app->parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested{app->help()};
  }
  if (flow->parsed() && flow_args->levels != "auto") {
    try {
      (void)std::stoi(flow_args->levels);
    } catch (const std::exception&) {
      throw CliUsageError("--levels expects an integer or 'auto'");
    }
  }

  ParsedCli parsed;
  RunManifest& manifest = parsed.manifest;

  if (solve->parsed()) {
    manifest.command = "solve";
    manifest.seed = solve_args->seed;
    manifest.set("a", solve_args->a_csv);
    manifest.set("m", solve_args->m_csv);
    manifest.set("ba", solve_args->ba_csv);
    manifest.set("bm", solve_args->bm_csv);
    manifest.set("lambda", solve_args->lambda);
    manifest.set("eps", solve_args->eps);
    manifest.set("max_iter", static_cast<long long>(solve_args->max_iter));
    manifest.set("criteria", solve_args->criteria);
    manifest.set("sweep", solve_args->sweep_lambdas);
    manifest.set("ritz", solve_args->no_ritz ? "false" : "true");
    manifest.set("basis", solve_args->basis_in);
    manifest.set("save_basis", solve_args->basis_out);
    manifest.set("recycle", solve_args->recycle);
    manifest.set("out", solve_args->out);
    parsed.execute = [solve_args, manifest]() { return execute_solve(*solve_args, manifest); };
  } else if (datacomp->parsed()) {
    manifest.command = "datacomp";
    manifest.seed = datacomp_args->seed;
    manifest.set("nel", static_cast<long long>(datacomp_args->nel));
    manifest.set("k", static_cast<long long>(datacomp_args->k));
    manifest.set("snr", datacomp_args->snr);
    manifest.set("method", datacomp_args->method);
    manifest.set("prec", datacomp_args->prec);
    manifest.set("reg", datacomp_args->reg);
    manifest.set("lambda", datacomp_args->lambda);
    manifest.set("eps", datacomp_args->eps);
    manifest.set("eps_sigma", datacomp_args->eps_sigma);
    manifest.set("max_iter", static_cast<long long>(datacomp_args->max_iter));
    manifest.set("out", datacomp_args->out);
    parsed.execute = [datacomp_args, manifest]() {
      return execute_datacomp(*datacomp_args, manifest);
    };
  } else if (flow->parsed()) {
    manifest.command = "opticalflow";
    manifest.seed = flow_args->seed;
    manifest.set("img1", flow_args->img1);
    manifest.set("img2", flow_args->img2);
    manifest.set("lambda", flow_args->lambda);
    manifest.set("lambdas", flow_args->lambdas);
    manifest.set("eps", flow_args->eps);
    manifest.set("levels", flow_args->levels);
    manifest.set("recycle", flow_args->recycle);
    manifest.set("median", static_cast<long long>(flow_args->median));
    manifest.set("prec", flow_args->jacobi ? "jacobi" : "regularizer");
    manifest.set("out", flow_args->out);
    parsed.execute = [flow_args, manifest]() {
      return execute_opticalflow(*flow_args, manifest);
    };
  } else if (sweep->parsed()) {
    manifest.command = "sweep";
    manifest.set("ritz", sweep_args->ritz_json);
    manifest.set("lambdas", sweep_args->lambdas);
    manifest.set("out", sweep_args->out);
    parsed.execute = [sweep_args, manifest]() { return execute_sweep(*sweep_args, manifest); };
  }
  return parsed;
}

}  // namespace

void write_ritz_json(const std::string& path, const RitzSet& ritz) {
  nlohmann::json j;
  j["m"] = ritz.m;
  j["lambda_solve"] = ritz.lambda_solve;
  j["valid_count"] = ritz.valid_count;
  j["degraded"] = ritz.degraded;
  j["theta"] = std::vector<double>(ritz.theta.begin(), ritz.theta.end());
  j["r_a"] = std::vector<double>(ritz.r_a.begin(), ritz.r_a.end());
  j["r_m"] = std::vector<double>(ritz.r_m.begin(), ritz.r_m.end());
  std::ofstream out(path);
  require(out.good(), "write_ritz_json: cannot open " + path);
  out << j.dump(2) << '\n';
}

RitzSet read_ritz_json(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "read_ritz_json: cannot open " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  RitzSet ritz;
  ritz.m = j.at("m").get<int>();
  ritz.lambda_solve = j.at("lambda_solve").get<double>();
  ritz.valid_count = j.value("valid_count", ritz.m);
  ritz.degraded = j.value("degraded", false);
  auto to_vector = [](const nlohmann::json& arr) {
    Vector v(arr.size());
    for (size_t i = 0; i < arr.size(); ++i) v[i] = arr[i].get<double>();
    return v;
  };
  ritz.theta = to_vector(j.at("theta"));
  ritz.r_a = to_vector(j.at("r_a"));
  ritz.r_m = to_vector(j.at("r_m"));
  return ritz;
}

RunManifest parse_cli(const std::vector<std::string>& args) {
  try {
    return build_cli(args).manifest;
  } catch (const HelpRequested&) {
    throw CliUsageError("help requested");
  } catch (const CLI::ParseError& err) {
    throw CliUsageError(err.what());
  }
}

int run_cli(const std::vector<std::string>& args) {
  try {
    ParsedCli parsed = build_cli(args);
    return parsed.execute();
  } catch (const HelpRequested& help) {
    std::cout << help.text;
    return 0;
  } catch (const CLI::ParseError& err) {
    std::cerr << "usage error: " << err.what() << "\n";
    return 2;
  } catch (const CliUsageError& err) {
    std::cerr << "usage error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
}

}  // namespace ritzcg
