#include "robustboot/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace robustboot {

namespace {

using Json = nlohmann::ordered_json;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s, std::size_t line_no) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw DomainError("parse error at line " + std::to_string(line_no) + ": '" + s +
                      "' is not a number");
  }
}

bool is_numeric_row(const std::vector<std::string>& fields) {
  if (fields.empty()) return false;
  try {
    std::size_t pos = 0;
    (void)std::stod(fields[0], &pos);
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

Json parse_json_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const std::exception& e) {
    throw DomainError(std::string("config parse error: ") + e.what());
  }
}

Distribution1D parse_distribution(const Json& j) {
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s == "upper" || s == "lower")
      throw DomainError("distribution: '" + s + "' is only valid as a contamination target");
    throw DomainError("distribution: unknown shorthand '" + s + "'");
  }
  std::string kind = j.value("kind", "uniform");
  if (kind == "uniform")
    return Distribution1D::uniform(j.value("lo", 0.0), j.value("hi", 1.0));
  if (kind == "point") return Distribution1D::point_mass(j.value("x", 0.0));
  if (kind == "discrete") {
    std::vector<double> xs, ws;
    if (!j.contains("atoms") || !j["atoms"].is_array())
      throw DomainError("distribution: discrete kind needs an 'atoms' array");
    for (const auto& atom : j["atoms"]) {
      xs.push_back(atom.at("x").get<double>());
      ws.push_back(atom.value("w", 1.0));
    }
    double total = 0.0;
    for (double w : ws) total += w;
    if (total <= 0.0) throw DomainError("distribution: nonpositive total weight");
    for (double& w : ws) w /= total;
    return Distribution1D::discrete(DiscreteMeasure<double>(std::move(xs), std::move(ws)));
  }
  throw DomainError("distribution: unknown kind '" + kind + "'");
}

ContaminationSpec parse_contamination(const Json& j, const GroundInterval& ground) {
  ContaminationSpec cs;
  std::string mode = j.value("mode", "gross_error");
  if (mode == "gross_error")
    cs.mode = ContaminationSpec::Mode::kGrossError;
  else if (mode == "rounding")
    cs.mode = ContaminationSpec::Mode::kRounding;
  else if (mode == "distribution_shift")
    cs.mode = ContaminationSpec::Mode::kDistributionShift;
  else
    throw DomainError("contamination: unknown mode '" + mode + "'");
  cs.fraction = j.value("fraction", 0.0);
  cs.magnitude = j.value("magnitude", 0.0);
  if (j.contains("target")) {
    const Json& t = j["target"];
    if (t.is_string()) {
      std::string s = t.get<std::string>();
      if (s == "upper")
        cs.shift_target = Distribution1D::point_mass(ground.hi);
      else if (s == "lower")
        cs.shift_target = Distribution1D::point_mass(ground.lo);
      else
        throw DomainError("contamination target: unknown shorthand '" + s + "'");
    } else {
      cs.shift_target = parse_distribution(t);
    }
  }
  cs.validate();
  return cs;
}

ProcessSpec::RateTag parse_rate(const std::string& s) {
  if (s == "1/i") return ProcessSpec::RateTag::kOneOverI;
  if (s == "1/sqrt(i)") return ProcessSpec::RateTag::kOneOverSqrtI;
  throw DomainError("rate tag must be '1/i' or '1/sqrt(i)', got '" + s + "'");
}

ProcessSpec parse_process(const Json& j) {
  ProcessSpec spec;
  if (j.contains("ground")) {
    spec.ground.lo = j["ground"].value("lo", 0.0);
    spec.ground.hi = j["ground"].value("hi", 1.0);
  }
  std::string kind = j.value("kind", "iid");
  if (kind == "iid") {
    spec.kind = ProcessSpec::Kind::kIid;
    spec.iid = j.contains("distribution")
                   ? parse_distribution(j["distribution"])
                   : Distribution1D::uniform(spec.ground.lo, spec.ground.hi);
  } else if (kind == "normal_drift") {
    spec.kind = ProcessSpec::Kind::kNormalDrift;
    const Json drift = j.value("drift", Json::object());
    spec.drift_limit = drift.value("limit", 0.0);
    spec.drift_amplitude = drift.value("amplitude", 1.0);
    spec.drift_rate = parse_rate(drift.value("rate", "1/i"));
    spec.clip_half_width = drift.value("clip_half_width", 4.0);
  } else if (kind == "shrinking_contamination") {
    spec.kind = ProcessSpec::Kind::kShrinkingContamination;
    if (!j.contains("base") || !j.contains("contaminant"))
      throw DomainError("shrinking_contamination needs 'base' and 'contaminant'");
    spec.base = parse_distribution(j["base"]);
    spec.contaminant = parse_distribution(j["contaminant"]);
    spec.eps0 = j.value("eps0", 1.0);
    spec.eps_rate = parse_rate(j.value("eps_rate", "1/i"));
  } else if (kind == "markov_chain") {
    spec.kind = ProcessSpec::Kind::kMarkovChain;
    if (!j.contains("transition"))
      throw DomainError("markov_chain needs a 'transition' matrix");
    for (const auto& row : j["transition"])
      spec.chain.transition.push_back(row.get<std::vector<double>>());
    if (j.contains("emissions")) {
      spec.chain.emissions = j["emissions"].get<std::vector<double>>();
    } else {
      std::size_t s = spec.chain.transition.size();
      for (std::size_t i = 0; i < s; ++i)
        spec.chain.emissions.push_back(
            s == 1 ? spec.ground.lo
                   : spec.ground.lo + (spec.ground.hi - spec.ground.lo) *
                                          static_cast<double>(i) /
                                          static_cast<double>(s - 1));
    }
  } else if (kind == "ar1_transformed") {
    spec.kind = ProcessSpec::Kind::kAr1Transformed;
    spec.phi = j.value("phi", 0.5);
  } else {
    throw DomainError("process: unknown kind '" + kind + "'");
  }
  if (j.contains("contamination"))
    spec.contamination = parse_contamination(j["contamination"], spec.ground);
  spec.validate();
  return spec;
}

Json distribution_to_json(const Distribution1D& d) {
  Json j;
  switch (d.kind) {
    case Distribution1D::Kind::kUniform:
      j["kind"] = "uniform";
      j["lo"] = d.lo;
      j["hi"] = d.hi;
      break;
    case Distribution1D::Kind::kPoint:
      j["kind"] = "point";
      j["x"] = d.point;
      break;
    case Distribution1D::Kind::kDiscrete: {
      j["kind"] = "discrete";
      Json atoms = Json::array();
      for (std::size_t i = 0; i < d.atoms.size(); ++i)
        atoms.push_back({{"x", d.atoms.support()[i]}, {"w", d.atoms.weights()[i]}});
      j["atoms"] = atoms;
      break;
    }
  }
  return j;
}

Json contamination_to_json(const ContaminationSpec& cs) {
  Json j;
  switch (cs.mode) {
    case ContaminationSpec::Mode::kGrossError:
      j["mode"] = "gross_error";
      break;
    case ContaminationSpec::Mode::kRounding:
      j["mode"] = "rounding";
      break;
    case ContaminationSpec::Mode::kDistributionShift:
      j["mode"] = "distribution_shift";
      break;
  }
  j["fraction"] = cs.fraction;
  j["magnitude"] = cs.magnitude;
  if (cs.shift_target) j["target"] = distribution_to_json(*cs.shift_target);
  return j;
}

std::string rate_to_string(ProcessSpec::RateTag tag) {
  return tag == ProcessSpec::RateTag::kOneOverI ? "1/i" : "1/sqrt(i)";
}

Json process_to_json(const ProcessSpec& spec) {
  Json j;
  j["kind"] = spec.name();
  j["ground"] = {{"lo", spec.ground.lo}, {"hi", spec.ground.hi}};
  switch (spec.kind) {
    case ProcessSpec::Kind::kIid:
      j["distribution"] = distribution_to_json(spec.iid);
      break;
    case ProcessSpec::Kind::kNormalDrift:
      j["drift"] = {{"limit", spec.drift_limit},
                    {"amplitude", spec.drift_amplitude},
                    {"rate", rate_to_string(spec.drift_rate)},
                    {"clip_half_width", spec.clip_half_width}};
      break;
    case ProcessSpec::Kind::kShrinkingContamination:
      j["base"] = distribution_to_json(spec.base);
      j["contaminant"] = distribution_to_json(spec.contaminant);
      j["eps0"] = spec.eps0;
      j["eps_rate"] = rate_to_string(spec.eps_rate);
      break;
    case ProcessSpec::Kind::kMarkovChain:
      j["transition"] = spec.chain.transition;
      j["emissions"] = spec.chain.emissions;
      break;
    case ProcessSpec::Kind::kAr1Transformed:
      j["phi"] = spec.phi;
      break;
  }
  if (spec.contamination) j["contamination"] = contamination_to_json(*spec.contamination);
  return j;
}

}  // namespace

MeasureFile read_measure_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open measure file: " + path);
  MeasureFile mf;
  std::string line;
  std::size_t line_no = 0;
  bool dims_set = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (!is_numeric_row(fields)) {
      if (line_no == 1) continue;  // header
      throw DomainError("parse error at line " + std::to_string(line_no) +
                        ": non-numeric row");
    }
    if (fields.size() < 2 || fields.size() > 4)
      throw DomainError("parse error at line " + std::to_string(line_no) +
                        ": expected 2..4 columns (coords..., weight)");
    if (!dims_set) {
      mf.dims = fields.size() - 1;
      dims_set = true;
    } else if (fields.size() - 1 != mf.dims) {
      throw DomainError("parse error at line " + std::to_string(line_no) +
                        ": inconsistent column count");
    }
    std::vector<double> point;
    for (std::size_t c = 0; c + 1 < fields.size(); ++c)
      point.push_back(parse_double(fields[c], line_no));
    double w = parse_double(fields.back(), line_no);
    if (w < 0.0)
      throw DomainError("parse error at line " + std::to_string(line_no) +
                        ": negative weight");
    mf.points.push_back(std::move(point));
    mf.weights.push_back(w);
  }
  if (mf.points.empty()) throw DomainError("measure file has no data rows: " + path);
  return mf;
}

void write_measure_csv(const std::string& path, const MeasureFile& mf) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write measure file: " + path);
  for (std::size_t d = 0; d < mf.dims; ++d) out << "x" << d << ",";
  out << "weight\n";
  for (std::size_t i = 0; i < mf.points.size(); ++i) {
    for (std::size_t d = 0; d < mf.dims; ++d) out << format_fixed9(mf.points[i][d]) << ",";
    out << format_fixed9(mf.weights[i]) << "\n";
  }
}

SamplePath<double> read_path_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open path file: " + path);
  SamplePath<double> p;
  p.origin = path;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (!is_numeric_row(fields)) {
      if (line_no == 1) continue;
      throw DomainError("parse error at line " + std::to_string(line_no) +
                        ": non-numeric row");
    }
    if (fields.size() != 2)
      throw DomainError("parse error at line " + std::to_string(line_no) +
                        ": expected index,value");
    p.values.push_back(parse_double(fields[1], line_no));
  }
  if (p.values.empty()) throw DomainError("path file has no data rows: " + path);
  return p;
}

void write_path_csv(const std::string& path, const SamplePath<double>& p) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write path file: " + path);
  out << "index,value\n";
  for (std::size_t i = 0; i < p.values.size(); ++i)
    out << i << "," << format_fixed9(p.values[i]) << "\n";
}

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& rows) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write trace file: " + path);
  out << "rep,position,source_index\n";
  for (const TraceRow& r : rows)
    out << r.rep << "," << r.position << "," << r.source_index << "\n";
}

ProcessSpec parse_process_spec_json(const std::string& json_text) {
  return parse_process(parse_json_text(json_text));
}

ExperimentConfig parse_experiment_config_json(const std::string& json_text) {
  Json j = parse_json_text(json_text);
  ExperimentConfig cfg;
  if (!j.contains("process_p")) throw DomainError("config: missing process_p");
  cfg.process_p = parse_process(j["process_p"]);
  if (j.contains("process_q")) {
    const Json& q = j["process_q"];
    if (q.contains("contaminate")) {
      cfg.process_q = cfg.process_p;
      cfg.process_q.contamination = parse_contamination(q["contaminate"], cfg.process_q.ground);
    } else {
      cfg.process_q = parse_process(q);
    }
  } else {
    cfg.process_q = cfg.process_p;
  }
  if (j.contains("scheme")) {
    const Json& s = j["scheme"];
    std::string kind = s.value("kind", "efron");
    if (kind == "efron")
      cfg.scheme.kind = BootstrapScheme::Kind::kEfron;
    else if (kind == "moving_block")
      cfg.scheme.kind = BootstrapScheme::Kind::kMovingBlock;
    else
      throw DomainError("scheme: unknown kind '" + kind + "'");
    cfg.scheme.block_exponent = s.value("block_exponent", 0.25);
    if (s.contains("resample_size"))
      cfg.scheme.resample_size = s["resample_size"].get<std::size_t>();
    cfg.scheme.restrict_starts = s.value("restrict_starts", false);
  }
  if (j.contains("estimator")) {
    const Json& e = j["estimator"];
    cfg.estimator_name = e.value("name", "mean");
    for (auto it = e.begin(); it != e.end(); ++it)
      if (it.key() != "name" && it.value().is_number())
        cfg.estimator_params[it.key()] = it.value().get<double>();
  }
  if (!j.contains("n_grid")) throw DomainError("config: missing n_grid");
  cfg.n_grid = j["n_grid"].get<std::vector<std::size_t>>();
  cfg.outer_reps = j.value("outer_reps", std::size_t{32});
  cfg.inner_reps = j.value("inner_reps", std::size_t{500});
  cfg.seed = j.value("seed", std::uint64_t{0});
  std::string method = j.value("method", "both");
  if (method == "both")
    cfg.method = ExperimentConfig::Method::kBoth;
  else if (method == "nested")
    cfg.method = ExperimentConfig::Method::kNested;
  else if (method == "coupled")
    cfg.method = ExperimentConfig::Method::kCoupled;
  else
    throw DomainError("config: unknown method '" + method + "'");
  cfg.bin_max_atoms = j.value("bin_max_atoms", std::size_t{200});
  cfg.max_outer_for_lp = j.value("max_outer_for_lp", std::size_t{64});
  cfg.proxy_resolution = j.value("proxy_resolution", std::size_t{512});
  cfg.error_bar_resamples = j.value("error_bar_resamples", std::size_t{30});
  cfg.threads = j.value("threads", 0u);
  cfg.validate();
  return cfg;
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
  Json j;
  j["seed"] = cfg.seed;
  j["method"] = cfg.method == ExperimentConfig::Method::kBoth      ? "both"
                : cfg.method == ExperimentConfig::Method::kNested  ? "nested"
                                                                   : "coupled";
  j["n_grid"] = cfg.n_grid;
  j["outer_reps"] = cfg.outer_reps;
  j["inner_reps"] = cfg.inner_reps;
  Json est;
  est["name"] = cfg.estimator_name;
  for (const auto& [k, v] : cfg.estimator_params) est[k] = v;
  j["estimator"] = est;
  Json scheme;
  scheme["kind"] =
      cfg.scheme.kind == BootstrapScheme::Kind::kEfron ? "efron" : "moving_block";
  scheme["block_exponent"] = cfg.scheme.block_exponent;
  if (cfg.scheme.resample_size) scheme["resample_size"] = *cfg.scheme.resample_size;
  scheme["restrict_starts"] = cfg.scheme.restrict_starts;
  j["scheme"] = scheme;
  j["process_p"] = process_to_json(cfg.process_p);
  j["process_q"] = process_to_json(cfg.process_q);
  j["bin_max_atoms"] = cfg.bin_max_atoms;
  j["max_outer_for_lp"] = cfg.max_outer_for_lp;
  j["proxy_resolution"] = cfg.proxy_resolution;
  j["error_bar_resamples"] = cfg.error_bar_resamples;
  return j.dump(2);
}

std::string report_to_json(const RobustnessReport& report) {
  Json j;
  j["tool_version"] = report.version;
  j["config"] = parse_json_text(experiment_config_to_json(report.config));
  Json rows = Json::array();
  for (const RobustnessRow& r : report.rows) {
    Json row;
    row["n"] = r.n;
    row["status"] = r.status;
    row["input_proxy"] = r.input_proxy;
    row["proxy_exact"] = r.proxy_exact;
    row["proxy_resolution"] = r.proxy_resolution;
    if (r.nested) row["nested"] = *r.nested;
    if (r.coupled) row["coupled"] = *r.coupled;
    if (r.err_nested) row["err_nested"] = *r.err_nested;
    if (r.err_coupled) row["err_coupled"] = *r.err_coupled;
    rows.push_back(row);
  }
  j["rows"] = rows;
  Json timing = Json::array();
  for (const RobustnessRow& r : report.rows) timing.push_back(r.runtime_ms);
  j["timing_ms"] = timing;
  return j.dump(2);
}

void write_report_json(const std::string& path, const RobustnessReport& report) {
  write_text_file(path, report_to_json(report) + "\n");
}

void write_report_csv(const std::string& path, const RobustnessReport& report) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write report csv: " + path);
  out << "n,input_proxy,nested,coupled,err_nested,err_coupled,runtime_ms\n";
  for (const RobustnessRow& r : report.rows) {
    auto opt9 = [](const std::optional<double>& v) {
      return v ? format_fixed9(*v) : std::string("nan");
    };
    out << r.n << "," << format_fixed9(r.input_proxy) << "," << opt9(r.nested) << ","
        << opt9(r.coupled) << "," << opt9(r.err_nested) << "," << opt9(r.err_coupled)
        << "," << format_fixed9(r.runtime_ms) << "\n";
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write file: " + path);
  out << text;
}

std::string content_hash_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string manifest_to_json(const RunManifest& m) {
  Json j;
  j["config_path"] = m.config_path;
  j["config_hash"] = m.config_hash;
  j["tool_version"] = m.tool_version;
  j["master_seed"] = m.master_seed;
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  j["outputs"] = m.outputs;
  return j.dump(2);
}

std::string format_fixed9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", v);
  return buf;
}

}  // namespace robustboot
