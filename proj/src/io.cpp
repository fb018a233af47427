#include "wgp/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace wgp {

using nlohmann::json;

std::string format_sig(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw invalid_input(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw invalid_input(path + ": cannot open file for writing");
  out << content;
  if (!out) throw invalid_input(path + ": write failed");
}

// ---------------------------------------------------------------------------
// CSV ingestion
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s, const std::string& path, int row) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  while (begin < end && *begin == ' ') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end)
    throw invalid_input(path + ":" + std::to_string(row) +
                        ": cannot parse number '" + s + "'");
  return v;
}

struct CsvReader {
  std::string path;
  std::ifstream in;
  int row = 0;

  CsvReader(const std::string& p, const std::string& header) : path(p), in(p) {
    if (!in) throw invalid_input(path + ": cannot open file");
    std::string line;
    if (!std::getline(in, line))
      throw invalid_input(path + ":1: missing header row");
    ++row;
    std::string trimmed = line;
    if (!trimmed.empty() && trimmed.back() == '\r') trimmed.pop_back();
    if (trimmed != header)
      throw invalid_input(path + ":1: expected header '" + header + "'");
  }

  bool next(std::vector<std::string>& fields, std::size_t count) {
    std::string line;
    while (std::getline(in, line)) {
      ++row;
      if (line.empty() || line == "\r") continue;
      fields = split_csv_row(line);
      if (fields.size() != count)
        throw invalid_input(path + ":" + std::to_string(row) + ": expected " +
                            std::to_string(count) + " fields");
      return true;
    }
    return false;
  }
};

}  // namespace

std::vector<std::pair<std::string, EmpiricalDistribution>> read_samples_csv(
    const std::string& path) {
  CsvReader reader(path, "obs_id,value");
  std::vector<std::pair<std::string, EmpiricalDistribution>> out;
  std::map<std::string, std::size_t> index;
  std::vector<std::string> fields;
  while (reader.next(fields, 2)) {
    const double v = parse_double(fields[1], path, reader.row);
    auto it = index.find(fields[0]);
    if (it == index.end()) {
      index.emplace(fields[0], out.size());
      out.emplace_back(fields[0], EmpiricalDistribution{});
      out.back().second.samples.push_back(v);
    } else {
      out[it->second].second.samples.push_back(v);
    }
  }
  if (out.empty()) throw invalid_input(path + ": no data rows");
  return out;
}

std::vector<std::pair<std::string, GridDensity>> read_densities_csv(
    const std::string& path) {
  CsvReader reader(path, "obs_id,x,f");
  struct Raw {
    std::vector<double> x, f;
    int first_row = 0;
  };
  std::vector<std::string> order;
  std::map<std::string, Raw> raw;
  std::vector<std::string> fields;
  while (reader.next(fields, 3)) {
    auto it = raw.find(fields[0]);
    if (it == raw.end()) {
      order.push_back(fields[0]);
      it = raw.emplace(fields[0], Raw{{}, {}, reader.row}).first;
    }
    it->second.x.push_back(parse_double(fields[1], path, reader.row));
    it->second.f.push_back(parse_double(fields[2], path, reader.row));
  }
  if (order.empty()) throw invalid_input(path + ": no data rows");

  std::vector<std::pair<std::string, GridDensity>> out;
  for (const auto& id : order) {
    const Raw& r = raw[id];
    const int d = static_cast<int>(r.x.size());
    if (d < 2)
      throw invalid_input(path + ":" + std::to_string(r.first_row) +
                          ": observation '" + id + "' needs at least 2 nodes");
    const double dx = (r.x.back() - r.x.front()) / (d - 1);
    if (!(dx > 0.0))
      throw invalid_input(path + ":" + std::to_string(r.first_row) +
                          ": abscissae of '" + id + "' must increase");
    for (int j = 0; j < d; ++j) {
      if (std::abs(r.x[j] - (r.x.front() + j * dx)) >
          1e-9 * std::max(1.0, std::abs(r.x.back())))
        throw invalid_input(path + ":" + std::to_string(r.first_row + j) +
                            ": abscissae of '" + id + "' are not equispaced");
    }
    Eigen::VectorXd f =
        Eigen::Map<const Eigen::VectorXd>(r.f.data(), d);
    try {
      out.emplace_back(id, GridDensity(r.x.front(), r.x.back(), std::move(f)));
    } catch (const invalid_input& e) {
      throw invalid_input(path + ":" + std::to_string(r.first_row) +
                          ": observation '" + id + "': " + e.what());
    }
  }
  return out;
}

std::vector<std::pair<std::string, double>> read_targets_csv(
    const std::string& path) {
  CsvReader reader(path, "obs_id,y");
  std::vector<std::pair<std::string, double>> out;
  std::map<std::string, int> seen;
  std::vector<std::string> fields;
  while (reader.next(fields, 2)) {
    if (seen.count(fields[0]))
      throw invalid_input(path + ":" + std::to_string(reader.row) +
                          ": duplicate obs_id '" + fields[0] + "'");
    seen[fields[0]] = reader.row;
    out.emplace_back(fields[0], parse_double(fields[1], path, reader.row));
  }
  if (out.empty()) throw invalid_input(path + ": no data rows");
  return out;
}

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vector_from_json(const json& arr) {
  if (!arr.is_array()) throw invalid_input("expected a JSON array of numbers");
  Eigen::VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v[i] = arr[i].get<double>();
  return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vector_to_json(m.row(i)));
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
  if (!rows.is_array() || rows.empty())
    throw invalid_input("expected a JSON array of rows");
  const Eigen::Index r = rows.size();
  Eigen::VectorXd first = vector_from_json(rows[0]);
  Eigen::MatrixXd m(r, first.size());
  m.row(0) = first;
  for (Eigen::Index i = 1; i < r; ++i) {
    Eigen::VectorXd row = vector_from_json(rows[i]);
    if (row.size() != m.cols()) throw invalid_input("ragged JSON matrix");
    m.row(i) = row;
  }
  return m;
}

json spec_to_json_obj(const KernelSpec& spec) {
  json j;
  if (const auto* p = std::get_if<PowexpSpec>(&spec)) {
    j["variant"] = "powexp";
    j["sigma2"] = p->sigma2;
    j["ell"] = p->ell;
    j["h"] = p->h;
    j["delta"] = p->delta;
  } else if (const auto* f = std::get_if<FbmSpec>(&spec)) {
    j["variant"] = "fbm";
    j["h"] = f->h;
    j["origin"] = vector_to_json(f->origin.values());
  } else if (const auto* l = std::get_if<LegendreSpec>(&spec)) {
    j["variant"] = "legendre";
    j["order"] = l->order;
    j["sigma2"] = l->sigma2;
    j["ells"] = vector_to_json(l->ells);
    j["h"] = l->h;
  } else {
    const auto& c = std::get<PcaSpec>(spec);
    j["variant"] = "pca";
    j["sigma2"] = c.sigma2;
    j["ells"] = vector_to_json(c.ells);
    j["h"] = c.h;
    j["basis"] = {{"d", c.basis.d},
                  {"mean", vector_to_json(c.basis.mean)},
                  {"components", matrix_to_json(c.basis.components)},
                  {"project_centered", c.basis.project_centered}};
  }
  return j;
}

KernelSpec spec_from_json_obj(const json& j) {
  const std::string variant = j.at("variant").get<std::string>();
  KernelSpec spec;
  if (variant == "powexp") {
    spec = PowexpSpec{j.at("sigma2").get<double>(), j.at("ell").get<double>(),
                      j.at("h").get<double>(), j.at("delta").get<double>()};
  } else if (variant == "fbm") {
    spec = FbmSpec{j.at("h").get<double>(),
                   QuantileFunction(vector_from_json(j.at("origin")))};
  } else if (variant == "legendre") {
    LegendreSpec l;
    l.order = j.at("order").get<int>();
    l.sigma2 = j.at("sigma2").get<double>();
    l.ells = vector_from_json(j.at("ells"));
    l.h = j.at("h").get<double>();
    spec = l;
  } else if (variant == "pca") {
    PcaSpec c;
    c.sigma2 = j.at("sigma2").get<double>();
    c.ells = vector_from_json(j.at("ells"));
    c.h = j.at("h").get<double>();
    const json& b = j.at("basis");
    c.basis.d = b.at("d").get<int>();
    c.basis.mean = vector_from_json(b.at("mean"));
    c.basis.components = matrix_from_json(b.at("components"));
    c.basis.project_centered = b.at("project_centered").get<bool>();
    spec = c;
  } else {
    throw invalid_input("unknown kernel variant '" + variant + "'");
  }
  validate(spec);
  return spec;
}

}  // namespace

std::string kernel_spec_to_json(const KernelSpec& spec) {
  return spec_to_json_obj(spec).dump(2);
}

KernelSpec kernel_spec_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw invalid_input(std::string("kernel spec JSON parse error: ") + e.what());
  }
  return spec_from_json_obj(j);
}

std::string model_to_json(const GPModel& model) {
  json j;
  j["format"] = "wgp-model";
  j["version"] = 1;
  j["kernel"] = spec_to_json_obj(model.spec);
  j["target_offset"] = model.target_offset;
  j["loglik"] = model.loglik;
  j["jitter_used"] = model.jitter_used;
  j["jitter_config"] = model.jitter_config;
  j["free_params"] = model.free_params;
  j["grid_size"] = model.inputs.empty() ? 0 : model.inputs[0].grid_size();
  json inputs = json::array();
  for (const auto& q : model.inputs) inputs.push_back(vector_to_json(q.values()));
  j["inputs"] = inputs;
  if (!model.features.empty()) {
    json feats = json::array();
    for (const auto& f : model.features) feats.push_back(vector_to_json(f.coeffs));
    j["features"] = feats;
  }
  j["alpha"] = vector_to_json(model.alpha);
  return j.dump(2);
}

GPModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw invalid_input(std::string("model JSON parse error: ") + e.what());
  }
  if (j.value("format", "") != "wgp-model")
    throw invalid_input("not a wgp model file");

  GPModel model;
  model.spec = spec_from_json_obj(j.at("kernel"));
  model.target_offset = j.at("target_offset").get<double>();
  model.loglik = j.at("loglik").get<double>();
  model.jitter_used = j.at("jitter_used").get<double>();
  model.jitter_config = j.value("jitter_config", 1e-10);
  model.free_params = j.at("free_params").get<std::vector<int>>();
  for (const auto& arr : j.at("inputs"))
    model.inputs.emplace_back(vector_from_json(arr));
  if (j.contains("features")) {
    for (const auto& arr : j.at("features"))
      model.features.push_back(FeatureVector{vector_from_json(arr)});
  }
  model.alpha = vector_from_json(j.at("alpha"));
  if (model.inputs.empty()) throw invalid_input("model has no training inputs");
  if (model.alpha.size() != static_cast<Eigen::Index>(model.inputs.size()))
    throw invalid_input("model alpha length disagrees with inputs");

  // Rebuild the factor and verify the stored likelihood; y is recovered
  // from alpha as y = R alpha, so y'R^{-1}y = alpha'R alpha.
  const bool proj = is_projection(family_of(model.spec));
  if (proj && model.features.size() != model.inputs.size())
    throw invalid_input("projection model must store training features");
  Eigen::MatrixXd r = proj ? build_gram(model.spec, model.features)
                           : build_gram(model.spec, model.inputs);
  if (model.jitter_used > 0.0) r.diagonal().array() += model.jitter_used;
  Eigen::LLT<Eigen::MatrixXd> llt(r);
  if (llt.info() != Eigen::Success)
    throw numeric_error("stored model covariance failed to factorize");
  model.chol = llt.matrixL();
  const double n = static_cast<double>(model.inputs.size());
  const double recomputed =
      (2.0 / n) * model.chol.diagonal().array().log().sum() +
      model.alpha.dot(r * model.alpha) / n;
  if (std::abs(recomputed - model.loglik) > 1e-8 * (1.0 + std::abs(model.loglik)))
    throw numeric_error(
        "stored log-likelihood disagrees with the recomputed value (" +
        format_sig(model.loglik) + " vs " + format_sig(recomputed) + ")");
  return model;
}

void save_model(const GPModel& model, const std::string& path) {
  write_text_file(path, model_to_json(model) + "\n");
}

GPModel load_model(const std::string& path) {
  return model_from_json(read_text_file(path));
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

std::string report_to_json(const BenchmarkReport& report) {
  json j;
  j["name"] = report.name;
  j["metadata"] = report.metadata;
  json rows = json::array();
  for (const auto& row : report.rows) {
    json r;
    r["model"] = row.model;
    r["rmse"] = row.rmse_value;
    if (row.cir90) r["cir90"] = *row.cir90;
    r["params"] = row.params;
    r["wall_seconds"] = row.wall_seconds;
    r["truths"] = row.truths;
    r["preds"] = row.preds;
    if (!row.sds.empty()) r["sds"] = row.sds;
    rows.push_back(std::move(r));
  }
  j["rows"] = rows;
  return j.dump(2);
}

std::string diag_report_to_json(const DiagReport& report) {
  json j;
  j["suite"] = report.suite;
  j["pass"] = report.pass;
  json checks = json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"config", c.config},
                      {"statistic", c.statistic},
                      {"threshold", c.threshold},
                      {"pass", c.pass}});
  }
  j["checks"] = checks;
  return j.dump(2);
}

std::string format_report_table(const BenchmarkReport& report) {
  std::size_t name_w = 5;
  for (const auto& row : report.rows) name_w = std::max(name_w, row.model.size());
  std::ostringstream out;
  out << report.name << " (seed " << (report.metadata.count("seed")
                                          ? report.metadata.at("seed")
                                          : "?")
      << ")\n";
  char line[160];
  std::snprintf(line, sizeof(line), "%-*s  %12s  %8s  %9s\n",
                static_cast<int>(name_w), "model", "RMSE", "CIR_0.9",
                "seconds");
  out << line;
  for (const auto& row : report.rows) {
    char cirbuf[16] = "";
    if (row.cir90)
      std::snprintf(cirbuf, sizeof(cirbuf), "%.3f", *row.cir90);
    std::snprintf(line, sizeof(line), "%-*s  %12.6g  %8s  %9.2f\n",
                  static_cast<int>(name_w), row.model.c_str(), row.rmse_value,
                  cirbuf, row.wall_seconds);
    out << line;
  }
  return out.str();
}

std::string report_pairs_csv(const BenchmarkReport& report) {
  std::ostringstream out;
  out << "obs_index,model,truth,pred,sd\n";
  for (const auto& row : report.rows) {
    for (std::size_t i = 0; i < row.preds.size(); ++i) {
      out << i << ',' << row.model << ',' << format_sig(row.truths[i]) << ','
          << format_sig(row.preds[i]) << ',';
      if (!row.sds.empty()) out << format_sig(row.sds[i]);
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace wgp
