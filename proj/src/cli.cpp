#include "wgp/cli.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "wgp/io.hpp"

namespace wgp {

namespace {

QuantileFunction quantile_from_file_entry(
    const std::string& samples_path, const std::string& density_path,
    const std::string& id, int m) {
  if (!samples_path.empty()) {
    auto all = read_samples_csv(samples_path);
    if (id.empty()) {
      if (all.size() != 1)
        throw invalid_input(samples_path +
                            ": several observations; pick one with --id-a/--id-b");
      return quantile_from_samples(all[0].second, m);
    }
    for (const auto& [obs, e] : all)
      if (obs == id) return quantile_from_samples(e, m);
    throw invalid_input(samples_path + ": no observation '" + id + "'");
  }
  auto all = read_densities_csv(density_path);
  if (id.empty()) {
    if (all.size() != 1)
      throw invalid_input(density_path +
                          ": several observations; pick one with --id-a/--id-b");
    return quantile_from_density(all[0].second, m);
  }
  for (const auto& [obs, g] : all)
    if (obs == id) return quantile_from_density(g, m);
  throw invalid_input(density_path + ": no observation '" + id + "'");
}

struct IngestedInputs {
  std::vector<std::string> ids;
  std::vector<QuantileFunction> quantiles;
  std::vector<GridDensity> densities;  // only for density files
  std::vector<Provenance> meta;
};

IngestedInputs ingest_inputs(const std::string& samples_path,
                             const std::string& densities_path, int m) {
  IngestedInputs out;
  if (!samples_path.empty()) {
    for (auto& [id, e] : read_samples_csv(samples_path)) {
      out.ids.push_back(id);
      out.quantiles.push_back(quantile_from_samples(e, m));
      out.meta.push_back(
          {Provenance::Kind::empirical, static_cast<int>(e.samples.size())});
    }
  } else {
    for (auto& [id, g] : read_densities_csv(densities_path)) {
      out.ids.push_back(id);
      out.quantiles.push_back(quantile_from_density(g, m));
      out.densities.push_back(std::move(g));
      out.meta.push_back({Provenance::Kind::density, 0});
    }
  }
  return out;
}

Dataset dataset_from_files(const std::string& samples_path,
                           const std::string& densities_path,
                           const std::string& targets_path, int m) {
  IngestedInputs in = ingest_inputs(samples_path, densities_path, m);
  const auto targets = read_targets_csv(targets_path);

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < in.ids.size(); ++i) index[in.ids[i]] = i;

  Dataset ds;
  ds.targets.resize(targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t) {
    auto it = index.find(targets[t].first);
    if (it == index.end())
      throw invalid_input(targets_path + ": target '" + targets[t].first +
                          "' has no matching input observation");
    ds.inputs.push_back(in.quantiles[it->second]);
    ds.meta.push_back(in.meta[it->second]);
    if (!in.densities.empty()) ds.densities.push_back(in.densities[it->second]);
    ds.targets[t] = targets[t].second;
  }
  if (targets.size() != in.ids.size())
    throw invalid_input(targets_path + ": target and input observation sets differ");
  return ds;
}

FitConfig::Nugget parse_nugget(const std::string& text, double* value) {
  if (text == "off") return FitConfig::Nugget::off;
  if (text == "fit") return FitConfig::Nugget::fit;
  if (text.rfind("fixed:", 0) == 0) {
    *value = std::stod(text.substr(6));
    return FitConfig::Nugget::fixed;
  }
  throw invalid_input("--nugget must be off, fit or fixed:<value>");
}

KernelFamily parse_family(const std::string& text) {
  if (text == "powexp") return KernelFamily::powexp;
  if (text == "fbm") return KernelFamily::fbm;
  if (text == "legendre") return KernelFamily::legendre;
  if (text == "pca") return KernelFamily::pca;
  throw invalid_input("--kernel must be powexp, fbm, legendre or pca");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Gaussian-process regression for one-dimensional distribution "
               "inputs via Wasserstein kernels"};
  app.require_subcommand(1);
  app.set_config("--config");

  // --- distance ---------------------------------------------------------
  auto* dist_cmd = app.add_subcommand(
      "distance", "Quadratic Wasserstein distance between two inputs");
  std::string d_samples_a, d_samples_b, d_density_a, d_density_b, d_id_a, d_id_b;
  int d_grid = 512;
  dist_cmd->add_option("--samples-a", d_samples_a, "sample CSV for input A");
  dist_cmd->add_option("--samples-b", d_samples_b, "sample CSV for input B");
  dist_cmd->add_option("--density-a", d_density_a, "density CSV for input A");
  dist_cmd->add_option("--density-b", d_density_b, "density CSV for input B");
  dist_cmd->add_option("--id-a", d_id_a, "observation id inside file A");
  dist_cmd->add_option("--id-b", d_id_b, "observation id inside file B");
  dist_cmd->add_option("--grid-size", d_grid, "quantile grid size m");

  // --- fit ---------------------------------------------------------------
  auto* fit_cmd = app.add_subcommand("fit", "Maximum-likelihood fit");
  std::string f_samples, f_densities, f_targets, f_kernel = "powexp";
  std::string f_nugget = "off", f_center = "on", f_out;
  int f_grid = 512, f_order = 5, f_starts = 10, f_threads = 1, f_max_evals = 400;
  std::uint64_t f_seed = 0;
  double f_jitter = 1e-10;
  fit_cmd->add_option("--samples", f_samples, "training samples CSV");
  fit_cmd->add_option("--densities", f_densities, "training densities CSV");
  fit_cmd->add_option("--targets", f_targets, "training targets CSV")->required();
  fit_cmd->add_option("--kernel", f_kernel, "powexp|fbm|legendre|pca");
  fit_cmd->add_option("--order", f_order, "projection order");
  fit_cmd->add_option("--nugget", f_nugget, "off|fit|fixed:<v>");
  fit_cmd->add_option("--grid-size", f_grid, "quantile grid size m");
  fit_cmd->add_option("--starts", f_starts, "optimizer starts");
  fit_cmd->add_option("--max-evals", f_max_evals, "likelihood evaluations per start");
  fit_cmd->add_option("--seed", f_seed, "random seed");
  fit_cmd->add_option("--threads", f_threads, "worker threads");
  fit_cmd->add_option("--center-targets", f_center, "on|off");
  fit_cmd->add_option("--jitter", f_jitter, "relative diagonal jitter");
  fit_cmd->add_option("--out", f_out, "output model JSON path")->required();

  // --- predict -----------------------------------------------------------
  auto* pred_cmd = app.add_subcommand("predict", "Posterior mean and sd");
  std::string p_model, p_samples, p_densities, p_out;
  pred_cmd->add_option("--model", p_model, "model JSON path")->required();
  pred_cmd->add_option("--samples", p_samples, "query samples CSV");
  pred_cmd->add_option("--densities", p_densities, "query densities CSV");
  pred_cmd->add_option("--out", p_out, "output CSV path")->required();

  // --- benchmark ----------------------------------------------------------
  auto* bench_cmd = app.add_subcommand("benchmark", "Simulation-study drivers");
  std::string b_which;
  bench_cmd->add_option("which", b_which, "table1|table2|beta")->required();
  std::uint64_t b_seed = 20260810;
  int b_n_train = -1, b_n_test = -1, b_samples = -1;
  int b_grid = -1, b_dgrid = -1, b_starts = -1, b_threads = -1;
  std::string b_json, b_csv;
  bench_cmd->add_option("--seed", b_seed, "random seed");
  bench_cmd->add_option("--n-train", b_n_train, "training set size");
  bench_cmd->add_option("--n-test", b_n_test, "test set size");
  bench_cmd->add_option("--samples-per-dist", b_samples,
                        "two-stage samples per distribution");
  bench_cmd->add_option("--grid-size", b_grid, "quantile grid m");
  bench_cmd->add_option("--density-grid", b_dgrid, "density grid d");
  bench_cmd->add_option("--starts", b_starts, "optimizer starts");
  bench_cmd->add_option("--threads", b_threads, "worker threads");
  bench_cmd->add_option("--json", b_json, "write the report as JSON");
  bench_cmd->add_option("--csv", b_csv, "write predicted-vs-true pairs as CSV");

  // --- diagnose -----------------------------------------------------------
  auto* diag_cmd = app.add_subcommand("diagnose", "Kernel-validity diagnostics");
  std::string g_which, g_out;
  std::uint64_t g_seed = 20260810;
  int g_n = 60;
  diag_cmd->add_option("which", g_which, "negdef|nondegen|identifiability")
      ->required();
  diag_cmd->add_option("--seed", g_seed, "random seed");
  diag_cmd->add_option("--n", g_n, "number of inputs (identifiability)");
  diag_cmd->add_option("--out", g_out, "write the report as JSON");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (dist_cmd->parsed()) {
      if ((d_samples_a.empty() == d_density_a.empty()) ||
          (d_samples_b.empty() == d_density_b.empty()))
        throw invalid_input(
            "give exactly one of --samples-a/--density-a and one of "
            "--samples-b/--density-b");
      const QuantileFunction a =
          quantile_from_file_entry(d_samples_a, d_density_a, d_id_a, d_grid);
      const QuantileFunction b =
          quantile_from_file_entry(d_samples_b, d_density_b, d_id_b, d_grid);
      out << format_sig(w2_distance(a, b)) << "\n";
      return 0;
    }

    if (fit_cmd->parsed()) {
      if (f_samples.empty() == f_densities.empty())
        throw invalid_input("give exactly one of --samples or --densities");
      if (f_center != "on" && f_center != "off")
        throw invalid_input("--center-targets must be on or off");
      const KernelFamily family = parse_family(f_kernel);
      if (is_projection(family) && f_densities.empty())
        throw invalid_input("projection kernels need --densities inputs");

      const Dataset ds =
          dataset_from_files(f_samples, f_densities, f_targets, f_grid);
      FitConfig fc;
      fc.n_starts = f_starts;
      fc.max_evals = f_max_evals;
      fc.seed = f_seed;
      fc.threads = f_threads;
      fc.jitter = f_jitter;
      fc.order = f_order;
      fc.center_targets = f_center == "on";
      fc.nugget = parse_nugget(f_nugget, &fc.nugget_value);

      const GPModel model = fit_ml(ds, family, fc);
      save_model(model, f_out);

      const InfoMatrix info = info_matrix(model);
      out << "fitted " << family_name(family) << " model on " << ds.size()
          << " observations\n";
      const auto names = kernel_param_names(model.spec);
      const Eigen::VectorXd values = kernel_param_values(model.spec);
      for (std::size_t i = 0; i < names.size(); ++i)
        out << "  " << names[i] << " = " << format_sig(values[i]) << "\n";
      out << "  L = " << format_sig(model.loglik) << "\n";
      out << "  jitter = " << format_sig(model.jitter_used) << "\n";
      out << "  M_ML eigenvalues =";
      for (Eigen::Index i = 0; i < info.eigenvalues.size(); ++i)
        out << " " << format_sig(info.eigenvalues[i]);
      out << "\n";
      out << "  model written to " << f_out << "\n";
      return 0;
    }

    if (pred_cmd->parsed()) {
      if (p_samples.empty() == p_densities.empty())
        throw invalid_input("give exactly one of --samples or --densities");
      const GPModel model = load_model(p_model);
      const int m = model.inputs[0].grid_size();
      const bool proj = is_projection(family_of(model.spec));
      if (proj && p_densities.empty())
        throw invalid_input("this model predicts from densities");

      IngestedInputs in = ingest_inputs(p_samples, p_densities, m);
      std::ostringstream csv;
      csv << "obs_id,mean,sd\n";
      for (std::size_t i = 0; i < in.ids.size(); ++i) {
        const Prediction pr =
            proj ? predict(model, model_features(model, in.densities[i]))
                 : predict(model, in.quantiles[i]);
        csv << in.ids[i] << ',' << format_sig(pr.mean) << ','
            << format_sig(std::sqrt(pr.variance)) << "\n";
      }
      write_text_file(p_out, csv.str());
      out << "wrote " << in.ids.size() << " predictions to " << p_out << "\n";
      return 0;
    }

    if (bench_cmd->parsed()) {
      SimConfig cfg;
      if (b_which == "table1") cfg = SimConfig::table1_defaults();
      else if (b_which == "table2") cfg = SimConfig::table2_defaults();
      else if (b_which == "beta") cfg = SimConfig::beta_defaults();
      else throw invalid_input("benchmark must be table1, table2 or beta");
      cfg.seed = b_seed;
      if (b_n_train > 0) cfg.n_train = b_n_train;
      if (b_n_test > 0) cfg.n_test = b_n_test;
      if (b_samples > 0) cfg.samples_per_dist = b_samples;
      if (b_grid > 0) cfg.quantile_grid = b_grid;
      if (b_dgrid > 0) cfg.density_grid = b_dgrid;
      if (b_starts > 0) cfg.n_starts = b_starts;
      if (b_threads > 0) cfg.threads = b_threads;

      BenchmarkReport report;
      if (b_which == "table1") report = table1_benchmark(cfg);
      else if (b_which == "table2") report = table2_benchmark(cfg);
      else report = beta_skewness_experiment(cfg);

      out << format_report_table(report);
      if (!b_json.empty()) write_text_file(b_json, report_to_json(report) + "\n");
      if (!b_csv.empty()) write_text_file(b_csv, report_pairs_csv(report));
      return 0;
    }

    if (diag_cmd->parsed()) {
      DiagReport report;
      if (g_which == "negdef") report = diagnose_negdef(g_seed);
      else if (g_which == "nondegen") report = diagnose_nondegen(g_seed);
      else if (g_which == "identifiability")
        report = diagnose_identifiability(g_seed, g_n);
      else
        throw invalid_input("diagnose must be negdef, nondegen or identifiability");

      for (const auto& c : report.checks)
        out << (c.pass ? "PASS " : "FAIL ") << report.suite << "/" << c.name
            << " statistic=" << format_sig(c.statistic)
            << " threshold=" << format_sig(c.threshold) << "\n";
      out << (report.pass ? "all checks passed" : "some checks FAILED") << "\n";
      if (!g_out.empty()) write_text_file(g_out, diag_report_to_json(report) + "\n");
      return report.pass ? 0 : 4;
    }
  } catch (const invalid_input& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const numeric_error& e) {
    err << "numeric error: " << e.what() << "\n";
    return 3;
  }
  err << "error: no subcommand\n";
  return 2;
}

}  // namespace wgp
