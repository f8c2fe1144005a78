#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pcat/diagnostics.hpp"
#include "pcat/parallel.hpp"
#include "pcat/report.hpp"
#include "pcat/study_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pcat;

namespace {

// Exit codes: 0 ok, 1 usage, 2 data error, 3 numerical failure.
constexpr int kUsageError = 1;
constexpr int kDataError = 2;
constexpr int kNumericalError = 3;

CovarianceKind kind_from_string(const std::string& s) {
  if (s == "classical") return CovarianceKind::classical;
  if (s == "kendall" || s == "kendall_tau") return CovarianceKind::kendall_tau;
  if (s == "external") return CovarianceKind::external;
  throw DataError("unknown covariance kind '" + s + "'");
}

struct SummarizeArgs {
  std::string input, cov, out, id = "study";
  std::string kind = "classical";
  int r = 0;
  long n = 0;
  bool header = false, center = false;
  std::uint64_t max_pairs = 0, seed = 0;
};

int run_summarize(const SummarizeArgs& args, int threads) {
  if (args.input.empty() == args.cov.empty())
    throw DataError("summarize: provide exactly one of --input and --cov");

  CovarianceEstimate estimate;
  CovarianceKind kind;
  if (!args.input.empty()) {
    Dataset data;
    data.rows = read_csv_matrix(args.input, args.header);
    kind = kind_from_string(args.kind);
    if (kind == CovarianceKind::external)
      throw DataError("summarize: kind 'external' requires --cov");
    if (kind == CovarianceKind::classical) {
      estimate = sample_covariance(data, args.center);
    } else {
      const KendallTau result =
          kendall_tau(data, args.max_pairs, args.seed, threads);
      if (result.degenerate_pairs > 0)
        std::cerr << "note: skipped " << result.degenerate_pairs
                  << " degenerate pairs\n";
      estimate = result.estimate;
    }
  } else {
    if (args.n < 1) throw DataError("summarize: --cov requires --n");
    estimate.matrix = read_csv_matrix(args.cov, args.header);
    estimate.n = args.n;
    estimate.kind = kind = CovarianceKind::external;
    validate_covariance(estimate);
  }

  StudySummary summary = individual_pca(estimate, args.r, args.id);
  if (summary.degenerate_gap)
    std::cerr << "warning: degenerate eigenvalue gap at r = " << args.r << "\n";
  write_study_file(study_file_from_summary(summary, kind), args.out);
  std::cout << "wrote " << args.out << " (p=" << summary.projector.dim()
            << ", r=" << args.r << ", n_eff=" << format_double(summary.n_eff)
            << ")\n";
  return 0;
}

StudySummary load_summary(const std::string& path) {
  const LoadedStudy loaded = summary_from_study_file(read_study_file(path));
  if (loaded.reorthonormalized)
    std::cerr << "warning: re-orthonormalized basis from " << path << "\n";
  return loaded.summary;
}

struct BarycenterArgs {
  std::vector<std::string> inputs;
  int r_s = 0;
  std::string weighting = "effective";
  std::string out;
};

int run_barycenter(const BarycenterArgs& args) {
  WeightedProjectorSet set;
  long total_n = 0;
  double total_weight = 0.0;
  const Weighting weighting = weighting_from_string(args.weighting);
  for (const auto& path : args.inputs) {
    const StudySummary summary = load_summary(path);
    set.projectors.push_back(summary.projector);
    set.weights.push_back(study_weight(summary, weighting));
    total_n += summary.n;
    total_weight += set.weights.back();
  }
  const BarycenterResult result = barycenter(set, args.r_s);
  if (result.degenerate_gap)
    std::cerr << "warning: degenerate barycenter gap ("
              << format_double(result.gap) << ")\n";

  StudySummary combined;
  combined.projector = result.projector;
  combined.n = total_n;
  combined.n_eff = total_weight;
  combined.study_id = "barycenter";
  write_study_file(study_file_from_summary(combined, CovarianceKind::external),
                   args.out);
  std::cout << "wrote " << args.out << " (gap=" << format_double(result.gap)
            << ")\n";
  return 0;
}

struct TransferArgs {
  std::string target, target_cov, target_data, target_kind = "classical";
  std::vector<std::string> sources;
  int r_s = 0, r_0 = 0;
  std::optional<double> tau;
  std::string variant = "kmeans", weighting = "effective", init = "blind_barycenter";
  std::string init_study;
  int max_iter = 50, multi_starts = 8;
  double tol = 1e-8, alpha = 0.5;
  std::uint64_t init_seed = 0;
  bool header = false, oracle = false;
  std::string out;
};

int run_transfer(const TransferArgs& args, int threads) {
  if (args.target_cov.empty() == args.target_data.empty())
    throw DataError("transfer: provide exactly one of --target-cov and --target-data");

  const StudySummary target = load_summary(args.target);
  CovarianceEstimate target_cov;
  if (!args.target_cov.empty()) {
    target_cov.matrix = read_csv_matrix(args.target_cov, args.header);
    target_cov.n = target.n;
    target_cov.kind = CovarianceKind::external;
    validate_covariance(target_cov);
  } else {
    Dataset data;
    data.rows = read_csv_matrix(args.target_data, args.header);
    if (kind_from_string(args.target_kind) == CovarianceKind::kendall_tau)
      target_cov = kendall_tau(data, 0, 0, threads).estimate;
    else
      target_cov = sample_covariance(data, false);
  }

  std::vector<StudySummary> sources;
  for (const auto& path : args.sources) sources.push_back(load_summary(path));

  TransferConfig cfg;
  cfg.r_s = args.r_s;
  cfg.r_0 = args.r_0;
  cfg.tau = args.tau;
  cfg.variant = variant_from_string(args.variant);
  cfg.weighting = weighting_from_string(args.weighting);
  cfg.max_iter = args.max_iter;
  cfg.tol = args.tol;
  cfg.alpha = args.alpha;
  cfg.multi_starts = args.multi_starts;
  cfg.init_seed = args.init_seed;
  if (args.init == "blind_barycenter" || args.init == "blind")
    cfg.init = Init::blind_barycenter;
  else if (args.init == "target_top" || args.init == "target-top")
    cfg.init = Init::target_top;
  else if (args.init == "multi_start" || args.init == "multi-start")
    cfg.init = Init::multi_start;
  else if (args.init == "explicit")
    cfg.init = Init::explicit_projector;
  else
    throw DataError("unknown init '" + args.init + "'");
  if (cfg.init == Init::explicit_projector) {
    if (args.init_study.empty())
      throw DataError("transfer: --init explicit requires --init-study");
    cfg.init_projector = load_summary(args.init_study).projector;
  }

  TransferResult result;
  if (args.oracle) {
    std::vector<StudySummary> studies;
    studies.push_back(target);
    studies.insert(studies.end(), sources.begin(), sources.end());
    result = oracle_transfer(studies, target_cov, cfg);
  } else {
    result = non_oracle_transfer(target, target_cov, sources, cfg);
  }

  StudySummary combined;
  combined.projector = result.combined;
  combined.n = target.n;
  combined.n_eff = target.n_eff;
  combined.study_id = target.study_id + "-transfer";
  const std::string study_path = args.out + ".study";
  write_study_file(study_file_from_summary(combined, CovarianceKind::external),
                   study_path);

  json trace = json::array();
  for (const auto& record : result.trace)
    trace.push_back({{"iteration", record.iteration},
                     {"objective", record.objective},
                     {"selected", record.selected},
                     {"step_norm", record.step_norm}});
  json report{{"mode", args.oracle ? "oracle" : "selected"},
              {"r_s", cfg.r_s},
              {"r_0", cfg.r_0},
              {"tau", cfg.effective_tau()},
              {"variant", to_string(cfg.variant)},
              {"weighting", to_string(cfg.weighting)},
              {"selected", result.selected},
              {"converged", result.converged},
              {"iterations", result.trace.size()},
              {"trace", std::move(trace)},
              {"combined_study", study_path}};
  const std::string json_path = args.out + ".json";
  std::ofstream out(json_path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + json_path + "' for writing");
  out << report.dump(2) << "\n";
  std::cout << "wrote " << study_path << " and " << json_path << "\n";
  return 0;
}

struct ExperimentArgs {
  std::string preset, config, out, name;
  std::optional<int> K, n, p, reps, iterations, r_k, r_s;
  std::optional<double> tau, h;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> variant, weighting, pca, distribution;
  std::optional<double> t_df;
  std::optional<bool> population;
};

template <typename T>
void maybe_set(T& field, const std::optional<T>& value) {
  if (value) field = *value;
}

void apply_kv(ScenarioConfig& cfg, const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "type") continue;
    else if (key == "scenario") cfg.scenario = scenario_from_string(value);
    else if (key == "p") cfg.p = std::stoi(value);
    else if (key == "K") cfg.K = std::stoi(value);
    else if (key == "n") cfg.n = std::stoi(value);
    else if (key == "r_k") cfg.r_k = std::stoi(value);
    else if (key == "r_s") cfg.r_s = std::stoi(value);
    else if (key == "h") cfg.h = std::stod(value);
    else if (key == "lambda_p_target") cfg.lambda_p_target = std::stod(value);
    else if (key == "lambda_p_source") cfg.lambda_p_source = std::stod(value);
    else if (key == "lambda_s") cfg.lambda_s = std::stod(value);
    else if (key == "distribution") cfg.distribution = distribution_from_string(value);
    else if (key == "t_df") cfg.t_df = std::stod(value);
    else if (key == "pca") cfg.pca = pca_kind_from_string(value);
    else if (key == "tau") cfg.tau = std::stod(value);
    else if (key == "iterations") cfg.iterations = std::stoi(value);
    else if (key == "variant") cfg.variant = variant_from_string(value);
    else if (key == "weighting") cfg.weighting = weighting_from_string(value);
    else if (key == "replications") cfg.replications = std::stoi(value);
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "population") cfg.population = (value == "true" || value == "1");
    else if (key == "kendall_max_pairs") cfg.kendall_max_pairs = std::stoull(value);
    else throw DataError("unknown scenario config key '" + key + "'");
  }
}

void apply_kv(RateConfig& cfg, const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "type") continue;
    else if (key == "term") cfg = RateConfig::preset(rate_term_from_string(value));
    else if (key == "r_k") cfg.r_k = std::stoi(value);
    else if (key == "r_s") cfg.r_s = std::stoi(value);
    else if (key == "replications") cfg.replications = std::stoi(value);
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "weighting") cfg.weighting = weighting_from_string(value);
    else throw DataError("unknown rate config key '" + key + "'");
  }
}

void apply_kv(NormalityConfig& cfg, const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "type") continue;
    else if (key == "n0") cfg.n0 = std::stoi(value);
    else if (key == "p") cfg.p = std::stoi(value);
    else if (key == "r_0") cfg.r_0 = std::stoi(value);
    else if (key == "r_s") cfg.r_s = std::stoi(value);
    else if (key == "lambda_p") cfg.lambda_p = std::stod(value);
    else if (key == "lambda_s") cfg.lambda_s = std::stod(value);
    else if (key == "perturbation") cfg.perturbation = std::stod(value);
    else if (key == "distribution") cfg.distribution = distribution_from_string(value);
    else if (key == "t_df") cfg.t_df = std::stod(value);
    else if (key == "nu4") cfg.nu4 = std::stod(value);
    else if (key == "replications") cfg.replications = std::stoi(value);
    else if (key == "seed") cfg.seed = std::stoull(value);
    else throw DataError("unknown normality config key '" + key + "'");
  }
}

int run_experiment(const ExperimentArgs& args, int threads) {
  std::map<std::string, std::string> kv;
  if (!args.config.empty()) kv = read_kv_file(args.config);

  std::string family;  // scenario | rate | normality
  ScenarioConfig scenario_cfg;
  RateConfig rate_cfg;
  NormalityConfig normality_cfg;

  if (!args.preset.empty()) {
    const std::string& name = args.preset;
    if (name.size() == 10 && name.rfind("-figure", 2) == 2 &&
        (name[0] == 's') && name[2] == '-') {
      family = "scenario";
      scenario_cfg = ScenarioConfig::preset(
          scenario_from_string(name.substr(0, 2)));
      if (name.back() == '2') {  // elliptical variants under t3
        scenario_cfg.distribution = Distribution::student_t;
        scenario_cfg.t_df = 3.0;
        scenario_cfg.pca = PcaKind::elliptical;
      } else if (name.back() != '1') {
        throw DataError("unknown preset '" + name + "'");
      }
    } else if (name.rfind("rate-", 0) == 0) {
      family = "rate";
      rate_cfg = RateConfig::preset(rate_term_from_string(name.substr(5)));
    } else if (name == "normality-gaussian") {
      family = "normality";
      normality_cfg = NormalityConfig::gaussian_preset();
    } else {
      throw DataError("unknown preset '" + name + "'");
    }
  } else {
    const auto it = kv.find("type");
    if (it == kv.end())
      throw DataError("experiment: need --preset or a config file with 'type'");
    family = it->second;
  }

  const std::string stem = !args.name.empty()
                               ? args.name
                               : (!args.preset.empty() ? args.preset : family);
  const fs::path out_dir = args.out;

  if (family == "scenario") {
    apply_kv(scenario_cfg, kv);
    maybe_set(scenario_cfg.K, args.K);
    maybe_set(scenario_cfg.n, args.n);
    maybe_set(scenario_cfg.p, args.p);
    maybe_set(scenario_cfg.replications, args.reps);
    maybe_set(scenario_cfg.iterations, args.iterations);
    maybe_set(scenario_cfg.r_k, args.r_k);
    maybe_set(scenario_cfg.r_s, args.r_s);
    maybe_set(scenario_cfg.tau, args.tau);
    maybe_set(scenario_cfg.h, args.h);
    maybe_set(scenario_cfg.seed, args.seed);
    maybe_set(scenario_cfg.t_df, args.t_df);
    maybe_set(scenario_cfg.population, args.population);
    if (args.variant) scenario_cfg.variant = variant_from_string(*args.variant);
    if (args.weighting)
      scenario_cfg.weighting = weighting_from_string(*args.weighting);
    if (args.pca) scenario_cfg.pca = pca_kind_from_string(*args.pca);
    if (args.distribution)
      scenario_cfg.distribution = distribution_from_string(*args.distribution);

    const ScenarioReport report = run_scenario(scenario_cfg, threads);
    write_scenario_report(report, out_dir, stem);
    std::cout << "scenario " << to_string(scenario_cfg.scenario) << ", K="
              << scenario_cfg.K << ", " << scenario_cfg.replications
              << " replications in " << report.wall_seconds << "s\n";
    for (const auto& stat : report.summaries)
      std::cout << "  " << stat.method << ": mean D=" << stat.mean
                << " (se " << stat.se << ")\n";
    if (!report.failures.empty())
      std::cout << "  failed replications: " << report.failures.size() << "\n";
  } else if (family == "rate") {
    apply_kv(rate_cfg, kv);
    maybe_set(rate_cfg.replications, args.reps);
    maybe_set(rate_cfg.r_k, args.r_k);
    maybe_set(rate_cfg.r_s, args.r_s);
    maybe_set(rate_cfg.seed, args.seed);
    if (args.weighting) rate_cfg.weighting = weighting_from_string(*args.weighting);
    if (rate_cfg.curves.empty())
      rate_cfg = [&] {  // config file gave only 'term'
        RateConfig fresh = RateConfig::preset(rate_cfg.term);
        fresh.replications = rate_cfg.replications;
        fresh.seed = rate_cfg.seed;
        fresh.weighting = rate_cfg.weighting;
        return fresh;
      }();

    const RateReport report = run_rate_experiment(rate_cfg, threads);
    write_rate_report(report, out_dir, stem);
    std::cout << "rate term " << to_string(rate_cfg.term) << ", slope = "
              << report.slope << " (" << report.wall_seconds << "s)\n";
  } else if (family == "normality") {
    apply_kv(normality_cfg, kv);
    maybe_set(normality_cfg.replications, args.reps);
    maybe_set(normality_cfg.p, args.p);
    maybe_set(normality_cfg.seed, args.seed);
    maybe_set(normality_cfg.t_df, args.t_df);
    if (args.distribution)
      normality_cfg.distribution = distribution_from_string(*args.distribution);

    const NormalityReport report = run_normality_experiment(normality_cfg, threads);
    write_normality_report(report, out_dir, stem);
    std::cout << "normality: KS(z_hat)=" << report.ks_hat << ", KS(z_tilde)="
              << report.ks_tilde << ", var(z_hat)=" << report.var_hat << " ("
              << report.wall_seconds << "s)\n";
  } else {
    throw DataError("unknown experiment type '" + family + "'");
  }
  return 0;
}

struct ArArgs {
  std::string transfer, baseline, test, out;
  bool header = false;
};

int run_ar(const ArArgs& args) {
  const StudySummary transfer = load_summary(args.transfer);
  const StudySummary baseline = load_summary(args.baseline);
  Dataset test;
  test.rows = read_csv_matrix(args.test, args.header);
  const double ratio = ar_ratio(transfer.projector, baseline.projector, test);
  std::cout << format_double(ratio) << "\n";
  if (!args.out.empty()) {
    json report{{"ar", ratio},
                {"rows", test.n()},
                {"transfer", args.transfer},
                {"baseline", args.baseline}};
    std::ofstream out(args.out, std::ios::binary);
    if (!out) throw DataError("cannot open '" + args.out + "' for writing");
    out << report.dump(2) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge transfer across PCA studies"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads,
                 "worker threads (0 = auto, env PCAT_THREADS)");

  SummarizeArgs summarize;
  auto* cmd_summarize =
      app.add_subcommand("summarize", "Individual PCA of a dataset or covariance");
  cmd_summarize->add_option("--input", summarize.input, "dataset CSV, one row per observation");
  cmd_summarize->add_option("--cov", summarize.cov, "covariance matrix CSV");
  cmd_summarize->add_flag("--header", summarize.header, "skip one header line");
  cmd_summarize->add_option("--r", summarize.r, "subspace rank")->required();
  cmd_summarize->add_option("--kind", summarize.kind, "classical | kendall")
      ->check(CLI::IsMember({"classical", "kendall", "kendall_tau"}));
  cmd_summarize->add_flag("--center", summarize.center, "subtract the sample mean");
  cmd_summarize->add_option("--n", summarize.n, "sample size behind --cov");
  cmd_summarize->add_option("--max-pairs", summarize.max_pairs,
                            "subsample this many Kendall pairs (0 = all)");
  cmd_summarize->add_option("--seed", summarize.seed, "pair subsampling seed");
  cmd_summarize->add_option("--id", summarize.id, "study identifier");
  cmd_summarize->add_option("--out", summarize.out, "output .study file")->required();

  BarycenterArgs bary;
  auto* cmd_barycenter =
      app.add_subcommand("barycenter", "Grassmannian barycenter of study files");
  cmd_barycenter->add_option("--inputs", bary.inputs, "input .study files")
      ->required()->expected(-1);
  cmd_barycenter->add_option("--rs", bary.r_s, "shared rank")->required();
  cmd_barycenter->add_option("--weighting", bary.weighting, "effective | raw_n")
      ->check(CLI::IsMember({"effective", "raw_n", "raw"}));
  cmd_barycenter->add_option("--out", bary.out, "output .study file")->required();

  TransferArgs transfer;
  auto* cmd_transfer = app.add_subcommand("transfer", "Knowledge transfer to a target study");
  cmd_transfer->add_option("--target", transfer.target, "target .study file")->required();
  cmd_transfer->add_option("--target-cov", transfer.target_cov, "target covariance CSV");
  cmd_transfer->add_option("--target-data", transfer.target_data, "target dataset CSV");
  cmd_transfer->add_option("--target-kind", transfer.target_kind,
                           "covariance kind for --target-data")
      ->check(CLI::IsMember({"classical", "kendall", "kendall_tau"}));
  cmd_transfer->add_flag("--header", transfer.header, "skip one header line in CSVs");
  cmd_transfer->add_option("--sources", transfer.sources, "candidate .study files")
      ->expected(-1);
  cmd_transfer->add_option("--rs", transfer.r_s, "shared rank")->required();
  cmd_transfer->add_option("--r0", transfer.r_0, "target rank")->required();
  cmd_transfer->add_option("--tau", transfer.tau,
                           "selection threshold in [0, rs]; default 0.5 rs");
  cmd_transfer->add_option("--variant", transfer.variant, "kmeans | gradient | newton")
      ->check(CLI::IsMember({"kmeans", "gradient", "newton"}));
  cmd_transfer->add_option("--weighting", transfer.weighting, "effective | raw_n")
      ->check(CLI::IsMember({"effective", "raw_n", "raw"}));
  cmd_transfer->add_option("--max-iter", transfer.max_iter, "iteration cap");
  cmd_transfer->add_option("--tol", transfer.tol, "step-norm stopping tolerance");
  cmd_transfer->add_option("--alpha", transfer.alpha, "gradient step size");
  cmd_transfer->add_option("--init", transfer.init,
                           "blind_barycenter | target_top | multi_start | explicit");
  cmd_transfer->add_option("--init-study", transfer.init_study,
                           ".study file for --init explicit");
  cmd_transfer->add_option("--multi-starts", transfer.multi_starts,
                           "extra Haar starts for --init multi_start");
  cmd_transfer->add_option("--init-seed", transfer.init_seed, "seed for the Haar starts");
  cmd_transfer->add_flag("--oracle", transfer.oracle,
                         "treat every source as informative (no selection)");
  cmd_transfer->add_option("--out", transfer.out, "output prefix")->required();

  ExperimentArgs experiment;
  auto* cmd_experiment = app.add_subcommand("experiment", "Run a simulation experiment");
  cmd_experiment->add_option("--preset", experiment.preset,
                             "s{1,2,3}-figure{1,2} | rate-{private,variance-n,variance-K,bias,deviation} | normality-gaussian");
  cmd_experiment->add_option("--config", experiment.config, "key = value config file");
  cmd_experiment->add_option("--out", experiment.out, "output directory")->required();
  cmd_experiment->add_option("--name", experiment.name, "output file stem");
  cmd_experiment->add_option("--K", experiment.K, "number of sources");
  cmd_experiment->add_option("--n", experiment.n, "per-study sample size");
  cmd_experiment->add_option("--p", experiment.p, "dimension");
  cmd_experiment->add_option("--reps", experiment.reps, "replications");
  cmd_experiment->add_option("--T", experiment.iterations, "rectified iteration cap");
  cmd_experiment->add_option("--rk", experiment.r_k, "study rank");
  cmd_experiment->add_option("--rs", experiment.r_s, "shared rank");
  cmd_experiment->add_option("--tau", experiment.tau, "selection threshold");
  cmd_experiment->add_option("--hlevel", experiment.h, "informative level h");
  cmd_experiment->add_option("--seed", experiment.seed, "master seed");
  cmd_experiment->add_option("--variant", experiment.variant, "kmeans | gradient | newton");
  cmd_experiment->add_option("--weighting", experiment.weighting, "effective | raw_n");
  cmd_experiment->add_option("--pca", experiment.pca, "classical | elliptical");
  cmd_experiment->add_option("--distribution", experiment.distribution,
                             "gaussian | student_t");
  cmd_experiment->add_option("--t-df", experiment.t_df, "degrees of freedom for student_t");
  cmd_experiment->add_flag("--population", [&experiment](std::int64_t) {
    experiment.population = true;
  }, "feed population covariances directly");

  ArArgs ar;
  auto* cmd_ar = app.add_subcommand("ar", "Average relative information preservation ratio");
  cmd_ar->add_option("--transfer", ar.transfer, "transfer .study file")->required();
  cmd_ar->add_option("--baseline", ar.baseline, "baseline .study file")->required();
  cmd_ar->add_option("--test", ar.test, "test dataset CSV")->required();
  cmd_ar->add_flag("--header", ar.header, "skip one header line");
  cmd_ar->add_option("--out", ar.out, "optional JSON report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    const int resolved = resolve_threads(threads);
    if (cmd_summarize->parsed()) return run_summarize(summarize, resolved);
    if (cmd_barycenter->parsed()) return run_barycenter(bary);
    if (cmd_transfer->parsed()) return run_transfer(transfer, resolved);
    if (cmd_experiment->parsed()) return run_experiment(experiment, resolved);
    if (cmd_ar->parsed()) return run_ar(ar);
    std::cerr << "no subcommand given\n";
    return kUsageError;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumericalError;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
}
