// Command-line front end: metric, generate, bootstrap, alpha, varadarajan,
// experiment. Exit codes: 0 ok, 2 config/parse error, 3 capacity error,
// 4 total failure.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "robustboot/bl.hpp"
#include "robustboot/bootstrap.hpp"
#include "robustboot/io.hpp"
#include "robustboot/mixing.hpp"
#include "robustboot/parallel.hpp"
#include "robustboot/prohorov.hpp"
#include "robustboot/robustness.hpp"
#include "robustboot/version.hpp"

namespace rb = robustboot;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitCapacity = 3;
constexpr int kExitTotalFailure = 4;

std::string iso_timestamp() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

struct MeasureWithSpace {
  rb::DiscreteMeasure<double> m1d;
  rb::DiscreteMeasure<std::vector<double>> mnd;
  std::size_t dims = 1;
};

MeasureWithSpace load_measure(const std::string& path) {
  rb::MeasureFile mf = rb::read_measure_csv(path);
  MeasureWithSpace out;
  out.dims = mf.dims;
  std::vector<double> ws = mf.weights;
  double total = 0.0;
  for (double w : ws) total += w;
  if (total <= 0.0) throw rb::DomainError("measure has zero total weight: " + path);
  for (double& w : ws) w /= total;
  if (mf.dims == 1) {
    std::vector<double> xs;
    xs.reserve(mf.points.size());
    for (const auto& p : mf.points) xs.push_back(p[0]);
    out.m1d = rb::DiscreteMeasure<double>(std::move(xs), std::move(ws));
  } else {
    out.mnd = rb::DiscreteMeasure<std::vector<double>>(mf.points, ws);
  }
  return out;
}

int cmd_metric(const std::string& file_p, const std::string& file_q, double lo, double hi,
               const std::string& dump_path) {
  MeasureWithSpace p = load_measure(file_p);
  MeasureWithSpace q = load_measure(file_q);
  if (p.dims != q.dims)
    throw rb::DomainError("measure files have different dimensions");

  rb::MetricRelationReport rel;
  if (p.dims == 1) {
    rb::MetricSpace<double> space = rb::interval_space(lo, hi);
    if (!dump_path.empty()) {
      rb::BlOptions opt;
      opt.dump_path = dump_path;
      (void)rb::bl_distance(p.m1d, q.m1d, space, opt);
    }
    rel = rb::metric_relations(p.m1d, q.m1d, space);
  } else {
    std::vector<std::pair<double, double>> bounds(p.dims, {lo, hi});
    rb::MetricSpace<std::vector<double>> space = rb::box_space(bounds);
    if (!dump_path.empty()) {
      rb::BlOptions opt;
      opt.dump_path = dump_path;
      (void)rb::bl_distance(p.mnd, q.mnd, space, opt);
    }
    rel = rb::metric_relations(p.mnd, q.mnd, space);
  }
  std::cout << "d_bl " << rb::format_fixed9(rel.bl) << "\n";
  std::cout << "prohorov " << rb::format_fixed9(rel.prohorov) << "\n";
  std::cout << "d_bl_le_2pi " << (rel.bl_le_two_prohorov ? "pass" : "fail") << "\n";
  if (rel.pi_le_sqrt_bl_asserted) {
    std::cout << "pi_le_sqrt_d_bl " << (rel.pi_le_sqrt_bl ? "pass" : "fail") << "\n";
  } else {
    std::cout << "pi_le_sqrt_d_bl recorded(" << (rel.pi_le_sqrt_bl ? "holds" : "fails")
              << ")\n";
  }
  return (!rel.bl_le_two_prohorov || (rel.pi_le_sqrt_bl_asserted && !rel.pi_le_sqrt_bl))
             ? kExitTotalFailure
             : kExitOk;
}

int cmd_generate(const std::string& config_path, std::size_t n, std::uint64_t seed,
                 const std::string& out_path) {
  rb::ProcessSpec spec = rb::parse_process_spec_json(rb::read_text_file(config_path));
  rb::SamplePath<double> path = rb::generate(spec, n, seed);
  rb::write_path_csv(out_path, path);
  std::cout << "wrote " << out_path << " (" << path.values.size() << " rows)\n";
  return kExitOk;
}

int cmd_bootstrap(const std::string& in_path, const std::string& kind, std::size_t m,
                  double block_exponent, bool restrict_starts, std::uint64_t seed,
                  const std::string& out_path, const std::string& trace_path,
                  std::size_t trace_reps) {
  rb::SamplePath<double> path = rb::read_path_csv(in_path);
  rb::BootstrapScheme scheme;
  if (kind == "efron") {
    scheme.kind = rb::BootstrapScheme::Kind::kEfron;
    if (m > 0) scheme.resample_size = m;
  } else if (kind == "moving_block") {
    scheme.kind = rb::BootstrapScheme::Kind::kMovingBlock;
    scheme.block_exponent = block_exponent;
    scheme.restrict_starts = restrict_starts;
  } else {
    throw rb::DomainError("bootstrap: scheme must be efron or moving_block");
  }
  rb::SamplePath<double> star = rb::resample(path, scheme, seed);
  rb::write_path_csv(out_path, star);
  std::cout << "wrote " << out_path << " (" << star.values.size() << " rows)\n";

  if (!trace_path.empty()) {
    std::vector<rb::TraceRow> rows;
    const std::size_t n = path.values.size();
    for (std::size_t rep = 0; rep < std::max<std::size_t>(trace_reps, 1); ++rep) {
      std::uint64_t rep_seed = rb::Rng::derive(seed, rep);
      std::vector<std::size_t> idx =
          (scheme.kind == rb::BootstrapScheme::Kind::kEfron)
              ? rb::efron_indices(n, scheme.resample_size.value_or(n), rep_seed)
              : rb::mbb_indices(n, rb::block_schedule(n, scheme.block_exponent), rep_seed,
                                scheme.restrict_starts);
      for (std::size_t pos = 0; pos < idx.size(); ++pos)
        rows.push_back({rep, pos, idx[pos]});
    }
    rb::write_trace_csv(trace_path, rows);
    std::cout << "wrote " << trace_path << "\n";
  }
  return kExitOk;
}

int cmd_alpha(const std::string& config_path, std::size_t max_lag,
              const std::string& out_path) {
  rb::ProcessSpec spec = rb::parse_process_spec_json(rb::read_text_file(config_path));
  rb::MixingDiagnostics diag =
      rb::mixing_diagnostics(spec, max_lag, {10, 100});
  std::ostringstream csv;
  csv << "lag,alpha\n";
  for (std::size_t lag = 1; lag <= diag.alpha_coeffs.size(); ++lag)
    csv << lag << "," << rb::format_fixed9(diag.alpha_coeffs[lag - 1]) << "\n";
  if (!out_path.empty()) rb::write_text_file(out_path, csv.str());
  std::cout << csv.str();
  for (std::size_t gi = 0; gi < diag.n_grid.size(); ++gi)
    std::cout << "weak_bi_mixing_average(n=" << diag.n_grid[gi] << ") "
              << rb::format_fixed9(diag.weak_bi_averages[gi]) << "\n";
  std::cout << "gamma_hat " << rb::format_fixed9(diag.gamma_hat) << "\n";
  if (diag.geometric_rate)
    std::cout << "geometric_rate " << rb::format_fixed9(*diag.geometric_rate) << "\n";
  for (std::size_t d = 1; d <= diag.dimension_condition_partials.size(); ++d)
    std::cout << "dimension_condition_partial(d=" << d << ") "
              << rb::format_fixed9(diag.dimension_condition_partials[d - 1]) << "\n";
  return kExitOk;
}

int cmd_varadarajan(const std::string& config_path, const std::string& n_list,
                    std::size_t reps, std::uint64_t seed, const std::string& out_path) {
  rb::ProcessSpec spec = rb::parse_process_spec_json(rb::read_text_file(config_path));
  std::vector<std::size_t> n_grid;
  {
    std::stringstream ss(n_list);
    std::string tok;
    while (std::getline(ss, tok, ',')) n_grid.push_back(std::stoul(tok));
  }
  if (n_grid.empty()) throw rb::DomainError("varadarajan: empty n grid");
  rb::MarginalLaw target = rb::limit_law(spec, 512);
  rb::VaradarajanTable table =
      rb::varadarajan_diagnostic(spec, target.measure, n_grid, reps, seed);
  std::ostringstream csv;
  csv << "n,median_bl,q25,q75\n";
  for (const auto& row : table.rows)
    csv << row.n << "," << rb::format_fixed9(row.median_bl) << ","
        << rb::format_fixed9(row.q25) << "," << rb::format_fixed9(row.q75) << "\n";
  if (!out_path.empty()) rb::write_text_file(out_path, csv.str());
  std::cout << csv.str();
  return kExitOk;
}

int cmd_experiment(const std::string& config_path, const std::string& out_dir) {
  std::string config_text = rb::read_text_file(config_path);
  rb::ExperimentConfig config = rb::parse_experiment_config_json(config_text);

  rb::RunManifest manifest;
  manifest.config_path = config_path;
  manifest.config_hash = rb::content_hash_hex(config_text);
  manifest.tool_version = rb::kVersion;
  manifest.master_seed = config.seed;
  manifest.started_at = iso_timestamp();

  fs::create_directories(out_dir);
  rb::RobustnessReport report = rb::run_experiment(config);

  std::string json_path = (fs::path(out_dir) / "report.json").string();
  std::string csv_path = (fs::path(out_dir) / "summary.csv").string();
  rb::write_report_json(json_path, report);
  rb::write_report_csv(csv_path, report);
  manifest.outputs = {json_path, csv_path};
  manifest.finished_at = iso_timestamp();
  rb::write_text_file((fs::path(out_dir) / "manifest.json").string(),
                      rb::manifest_to_json(manifest) + "\n");

  std::cout << "n,input_proxy,nested,coupled\n";
  std::size_t failures = 0;
  for (const auto& row : report.rows) {
    if (row.status != "ok") {
      ++failures;
      std::cout << row.n << ",<" << row.status << ">\n";
      continue;
    }
    auto opt9 = [](const std::optional<double>& v) {
      return v ? rb::format_fixed9(*v) : std::string("nan");
    };
    std::cout << row.n << "," << rb::format_fixed9(row.input_proxy) << ","
              << opt9(row.nested) << "," << opt9(row.coupled) << "\n";
  }
  if (failures == report.rows.size()) return kExitTotalFailure;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bounded Lipschitz / Prohorov metrics, bootstrap schemes and "
               "qualitative-robustness experiments for discrete measures"};
  app.set_version_flag("--version", rb::kVersion);
  unsigned threads = 0;
  app.add_option("--threads", threads, "worker threads (default: hardware)");

  // metric
  std::string m_file_p, m_file_q, m_dump;
  double m_lo = 0.0, m_hi = 1.0;
  CLI::App* metric = app.add_subcommand("metric", "d_BL and Prohorov between measure files");
  metric->add_option("p", m_file_p, "measure CSV (coords...,weight)")->required();
  metric->add_option("q", m_file_q, "measure CSV (coords...,weight)")->required();
  metric->add_option("--lo", m_lo, "ground interval/box lower bound");
  metric->add_option("--hi", m_hi, "ground interval/box upper bound");
  metric->add_option("--dump", m_dump, "write the LP instance + solution here");

  // generate
  std::string g_config, g_out = "path.csv";
  std::size_t g_n = 100;
  std::uint64_t g_seed = 0;
  CLI::App* generate = app.add_subcommand("generate", "draw a sample path from a process config");
  generate->add_option("config", g_config, "process spec JSON")->required();
  generate->add_option("-n,--length", g_n, "path length");
  generate->add_option("--seed", g_seed, "master seed");
  generate->add_option("--out", g_out, "output CSV");

  // bootstrap
  std::string b_in, b_out = "resample.csv", b_kind = "efron", b_trace;
  std::size_t b_m = 0, b_trace_reps = 1;
  double b_exponent = 0.25;
  bool b_restrict = false;
  std::uint64_t b_seed = 0;
  CLI::App* boot = app.add_subcommand("bootstrap", "resample a CSV path");
  boot->add_option("input", b_in, "path CSV")->required();
  boot->add_option("--scheme", b_kind, "efron | moving_block");
  boot->add_option("-m,--resample-size", b_m, "Efron resample size (default n)");
  boot->add_option("--block-exponent", b_exponent, "moving block exponent in (0, 0.45]");
  boot->add_flag("--restrict-starts", b_restrict, "disable the circular wrap");
  boot->add_option("--seed", b_seed, "master seed");
  boot->add_option("--out", b_out, "output CSV");
  boot->add_option("--trace", b_trace, "dump resample indices (rep,position,source_index)");
  boot->add_option("--trace-reps", b_trace_reps, "number of traced replicates");

  // alpha
  std::string a_config, a_out;
  std::size_t a_lags = 20;
  CLI::App* alpha = app.add_subcommand("alpha", "mixing diagnostics for a process config");
  alpha->add_option("config", a_config, "process spec JSON")->required();
  alpha->add_option("--max-lag", a_lags, "largest lag");
  alpha->add_option("--out", a_out, "write lag,alpha CSV here");

  // varadarajan
  std::string v_config, v_out, v_grid = "100,400,1600";
  std::size_t v_reps = 20;
  std::uint64_t v_seed = 0;
  CLI::App* vara = app.add_subcommand("varadarajan", "empirical-measure convergence table");
  vara->add_option("config", v_config, "process spec JSON")->required();
  vara->add_option("--n-grid", v_grid, "comma separated n values");
  vara->add_option("--reps", v_reps, "replicates per n");
  vara->add_option("--seed", v_seed, "master seed");
  vara->add_option("--out", v_out, "write CSV here");

  // experiment
  std::string e_config, e_out = "experiment_out";
  CLI::App* exp = app.add_subcommand("experiment", "run a robustness experiment config");
  exp->add_option("config", e_config, "experiment config JSON")->required();
  exp->add_option("--out", e_out, "output directory");

  app.require_subcommand(1);
  CLI11_PARSE(app, argc, argv);

  if (threads > 0) rb::default_thread_count() = threads;

  try {
    if (*metric) return cmd_metric(m_file_p, m_file_q, m_lo, m_hi, m_dump);
    if (*generate) return cmd_generate(g_config, g_n, g_seed, g_out);
    if (*boot)
      return cmd_bootstrap(b_in, b_kind, b_m, b_exponent, b_restrict, b_seed, b_out,
                           b_trace, b_trace_reps);
    if (*alpha) return cmd_alpha(a_config, a_lags, a_out);
    if (*vara) return cmd_varadarajan(v_config, v_grid, v_reps, v_seed, v_out);
    if (*exp) return cmd_experiment(e_config, e_out);
  } catch (const rb::CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return kExitCapacity;
  } catch (const rb::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitTotalFailure;
  }
  return kExitOk;
}
