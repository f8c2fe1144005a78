#include "pcat/report.hpp"

#include <fstream>

#include <json.hpp>

#include "pcat/study_io.hpp"

namespace pcat {

using nlohmann::json;

const char* to_string(Variant v) {
  switch (v) {
    case Variant::kmeans: return "kmeans";
    case Variant::gradient: return "gradient";
    case Variant::newton: return "newton";
  }
  return "?";
}

const char* to_string(Weighting w) {
  return w == Weighting::raw_n ? "raw_n" : "effective";
}

const char* to_string(Init i) {
  switch (i) {
    case Init::blind_barycenter: return "blind_barycenter";
    case Init::target_top: return "target_top";
    case Init::explicit_projector: return "explicit";
    case Init::multi_start: return "multi_start";
  }
  return "?";
}

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::S1: return "S1";
    case Scenario::S2: return "S2";
    case Scenario::S3: return "S3";
  }
  return "?";
}

const char* to_string(Distribution d) {
  return d == Distribution::gaussian ? "gaussian" : "student_t";
}

const char* to_string(PcaKind k) {
  return k == PcaKind::classical ? "classical" : "elliptical";
}

const char* to_string(RateTerm t) {
  switch (t) {
    case RateTerm::private_term: return "private";
    case RateTerm::variance_n: return "variance-n";
    case RateTerm::variance_K: return "variance-K";
    case RateTerm::bias: return "bias";
    case RateTerm::deviation: return "deviation";
  }
  return "?";
}

namespace {

[[noreturn]] void unknown(const char* what, const std::string& s) {
  throw DataError(std::string("unknown ") + what + " '" + s + "'");
}

}  // namespace

Variant variant_from_string(const std::string& s) {
  if (s == "kmeans") return Variant::kmeans;
  if (s == "gradient") return Variant::gradient;
  if (s == "newton") return Variant::newton;
  unknown("variant", s);
}

Weighting weighting_from_string(const std::string& s) {
  if (s == "raw_n" || s == "raw") return Weighting::raw_n;
  if (s == "effective") return Weighting::effective;
  unknown("weighting", s);
}

Scenario scenario_from_string(const std::string& s) {
  if (s == "S1" || s == "s1") return Scenario::S1;
  if (s == "S2" || s == "s2") return Scenario::S2;
  if (s == "S3" || s == "s3") return Scenario::S3;
  unknown("scenario", s);
}

Distribution distribution_from_string(const std::string& s) {
  if (s == "gaussian") return Distribution::gaussian;
  if (s == "student_t" || s == "t") return Distribution::student_t;
  unknown("distribution", s);
}

PcaKind pca_kind_from_string(const std::string& s) {
  if (s == "classical") return PcaKind::classical;
  if (s == "elliptical") return PcaKind::elliptical;
  unknown("pca kind", s);
}

RateTerm rate_term_from_string(const std::string& s) {
  if (s == "private") return RateTerm::private_term;
  if (s == "variance-n") return RateTerm::variance_n;
  if (s == "variance-K" || s == "variance-k") return RateTerm::variance_K;
  if (s == "bias") return RateTerm::bias;
  if (s == "deviation") return RateTerm::deviation;
  unknown("rate term", s);
}

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (long i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (long j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (long i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);  // LF endings everywhere
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

void write_long_csv(const std::filesystem::path& path,
                    const std::vector<std::string>& series,
                    const std::vector<std::vector<std::pair<double, double>>>& data) {
  // data[s] holds (x, value) per replication, already in output order.
  std::string text = "method,x,replication,value\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    long replication = 0;
    double last_x = 0.0;
    bool first = true;
    for (const auto& [x, value] : data[s]) {
      if (first || x != last_x) {
        replication = 0;
        last_x = x;
        first = false;
      }
      text += series[s];
      text += ',';
      text += format_double(x);
      text += ',';
      text += std::to_string(replication++);
      text += ',';
      text += format_double(value);
      text += '\n';
    }
  }
  write_text(path, text);
}

json scenario_config_json(const ScenarioConfig& cfg) {
  return json{{"scenario", to_string(cfg.scenario)},
              {"p", cfg.p},
              {"K", cfg.K},
              {"n", cfg.n},
              {"r_k", cfg.r_k},
              {"r_s", cfg.r_s},
              {"h", cfg.h},
              {"lambda_p_target", cfg.lambda_p_target},
              {"lambda_p_source", cfg.lambda_p_source},
              {"lambda_s", cfg.lambda_s},
              {"distribution", to_string(cfg.distribution)},
              {"t_df", cfg.t_df},
              {"pca", to_string(cfg.pca)},
              {"tau", cfg.tau},
              {"iterations", cfg.iterations},
              {"variant", to_string(cfg.variant)},
              {"weighting", to_string(cfg.weighting)},
              {"replications", cfg.replications},
              {"seed", cfg.seed},
              {"population", cfg.population},
              {"kendall_max_pairs", cfg.kendall_max_pairs}};
}

}  // namespace

void write_scenario_report(const ScenarioReport& report,
                           const std::filesystem::path& directory,
                           const std::string& stem) {
  std::filesystem::create_directories(directory);

  std::vector<std::vector<std::pair<double, double>>> data(report.methods.size());
  for (std::size_t m = 0; m < report.methods.size(); ++m)
    for (double value : report.values[m])
      data[m].emplace_back(static_cast<double>(report.config.K), value);
  write_long_csv(directory / (stem + ".csv"), report.methods, data);

  json summary;
  summary["config"] = scenario_config_json(report.config);
  json methods = json::array();
  for (const auto& stat : report.summaries)
    methods.push_back(
        {{"method", stat.method}, {"mean", stat.mean}, {"se", stat.se}});
  summary["methods"] = std::move(methods);
  json failures = json::array();
  for (const auto& [rep, message] : report.failures)
    failures.push_back({{"replication", rep}, {"error", message}});
  summary["failures"] = std::move(failures);
  if (report.alternative_center)
    summary["alternative_center"] = matrix_to_json(*report.alternative_center);
  write_text(directory / (stem + ".json"), summary.dump(2) + "\n");
}

void write_rate_report(const RateReport& report,
                       const std::filesystem::path& directory,
                       const std::string& stem) {
  std::filesystem::create_directories(directory);

  std::vector<std::string> labels;
  std::vector<std::vector<std::pair<double, double>>> data;
  for (std::size_t c = 0; c < report.config.curves.size(); ++c) {
    labels.push_back(report.config.curves[c].label);
    std::vector<std::pair<double, double>> series;
    for (std::size_t pt = 0; pt < report.config.curves[c].points.size(); ++pt)
      for (double value : report.values[c][pt])
        series.emplace_back(report.config.curves[c].points[pt].x, value);
    data.push_back(std::move(series));
  }
  write_long_csv(directory / (stem + ".csv"), labels, data);

  json summary;
  summary["term"] = to_string(report.config.term);
  summary["r_k"] = report.config.r_k;
  summary["r_s"] = report.config.r_s;
  summary["replications"] = report.config.replications;
  summary["seed"] = report.config.seed;
  summary["weighting"] = to_string(report.config.weighting);
  json curves = json::array();
  for (std::size_t c = 0; c < report.config.curves.size(); ++c) {
    json points = json::array();
    for (std::size_t pt = 0; pt < report.config.curves[c].points.size(); ++pt) {
      const RatePoint& point = report.config.curves[c].points[pt];
      points.push_back({{"x", point.x},
                        {"p", point.p},
                        {"K", point.K},
                        {"n", point.n},
                        {"h", point.h},
                        {"lambda_s", point.lambda_s},
                        {"lambda_p", point.lambda_p},
                        {"mean_error", report.means[c][pt]}});
    }
    curves.push_back({{"label", report.config.curves[c].label},
                      {"slope", report.curve_slopes[c]},
                      {"points", std::move(points)}});
  }
  summary["curves"] = std::move(curves);
  summary["slope"] = report.slope;
  summary["dropped_replications"] = report.dropped_replications;
  write_text(directory / (stem + ".json"), summary.dump(2) + "\n");
}

void write_normality_report(const NormalityReport& report,
                            const std::filesystem::path& directory,
                            const std::string& stem) {
  std::filesystem::create_directories(directory);

  std::vector<std::vector<std::pair<double, double>>> data(2);
  for (double z : report.z_hat) data[0].emplace_back(0.0, z);
  for (double z : report.z_tilde) data[1].emplace_back(0.0, z);
  write_long_csv(directory / (stem + ".csv"), {"z_hat", "z_tilde"}, data);

  const NormalityConfig& cfg = report.config;
  json summary;
  summary["config"] = {{"n0", cfg.n0},
                       {"p", cfg.p},
                       {"r_0", cfg.r_0},
                       {"r_s", cfg.r_s},
                       {"lambda_p", cfg.lambda_p},
                       {"lambda_s", cfg.lambda_s},
                       {"perturbation", cfg.perturbation},
                       {"distribution", to_string(cfg.distribution)},
                       {"t_df", cfg.t_df},
                       {"nu4", cfg.nu4},
                       {"replications", cfg.replications},
                       {"seed", cfg.seed},
                       {"u", vector_to_json(*cfg.u)},
                       {"v", vector_to_json(*cfg.v)}};
  summary["sigma_p"] = report.sigma_p;
  summary["sigma_0"] = report.sigma_0;
  summary["ks_hat"] = report.ks_hat;
  summary["ks_tilde"] = report.ks_tilde;
  summary["var_hat"] = report.var_hat;
  summary["var_tilde"] = report.var_tilde;
  write_text(directory / (stem + ".json"), summary.dump(2) + "\n");
}

}  // namespace pcat
