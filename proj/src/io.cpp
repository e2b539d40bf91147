#include "npglm/io.hpp"

#include <json.hpp>

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace npglm {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  const fs::path dir = target.has_parent_path() ? target.parent_path() : fs::path(".");
  if (!fs::is_directory(dir)) throw IoError("output directory does not exist: " + dir.string());
  const fs::path tmp = dir / ("." + target.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename into " + path + ": " + ec.message());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path + ": " + std::strerror(errno));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, delim)) out.push_back(cell);
  if (!line.empty() && line.back() == delim) out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\"");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\"");
  return s.substr(first, last - first + 1);
}

double parse_cell(const std::string& text, const std::string& path, std::size_t line, const std::string& column) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ValidationError(path + ":" + std::to_string(line) + ": non-numeric value '" + t +
                          "' in column '" + column + "'");
  }
  return v;
}

}  // namespace

Eigen::Index NumericTable::column_index(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == name) return static_cast<Eigen::Index>(j);
  }
  throw ValidationError("missing column '" + name + "'");
}

NumericTable read_numeric_table(const std::string& path, std::optional<char> delimiter) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path + ": empty file (header row required)");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const char delim = delimiter.value_or(line.find('\t') != std::string::npos ? '\t' : ',');
  NumericTable table;
  for (auto& h : split_line(line, delim)) table.header.push_back(trim(h));
  const std::size_t width = table.header.size();
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto cells = split_line(line, delim);
    if (cells.size() != width) {
      throw ValidationError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(width) +
                            " fields, got " + std::to_string(cells.size()));
    }
    std::vector<double> row(width);
    for (std::size_t j = 0; j < width; ++j) row[j] = parse_cell(cells[j], path, lineno, table.header[j]);
    rows.push_back(std::move(row));
  }
  table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < width; ++j) table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return table;
}

std::string format_table(const std::vector<std::string>& header, const Matrix& values, char delimiter) {
  std::string out;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j) out += delimiter;
    out += header[j];
  }
  out += '\n';
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      if (j) out += delimiter;
      out += format_number(values(i, j));
    }
    out += '\n';
  }
  return out;
}

void write_chain(const std::string& path, const Chain& chain) {
  std::string out;
  for (std::size_t j = 0; j < chain.columns.size(); ++j) {
    if (j) out += ',';
    out += chain.columns[j];
  }
  out += '\n';
  for (const auto& row : chain.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      out += format_number(row[j]);
    }
    out += '\n';
  }
  write_atomic(path, out);
}

Chain read_chain(const std::string& path) {
  const NumericTable t = read_numeric_table(path, ',');
  Chain c;
  c.columns = t.header;
  c.rows.resize(static_cast<std::size_t>(t.values.rows()));
  for (Eigen::Index i = 0; i < t.values.rows(); ++i) {
    c.rows[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(t.values.cols()));
    for (Eigen::Index j = 0; j < t.values.cols(); ++j) c.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = t.values(i, j);
  }
  return c;
}

std::string format_fit_summary(const FitResult& fit) {
  std::string out = "term,estimate,ci_low,ci_high\n";
  for (Eigen::Index j = 0; j < fit.beta_mean.size(); ++j) {
    out += fit.column_names[static_cast<std::size_t>(j)] + "," + format_number(fit.beta_mean(j)) + "," +
           format_number(fit.ci_low(j)) + "," + format_number(fit.ci_high(j)) + "\n";
  }
  return out;
}

std::string format_sim_report(const SimReport& report) {
  std::string out = "dgp,form,n,balance,method,coverage,ci_width,ars_train,ars_test,replications\n";
  for (const SimRow& r : report.rows) {
    out += std::string(to_string(r.dgp)) + "," + std::string(to_string(r.form)) + "," + std::to_string(r.n) + "," +
           format_number(r.balance) + "," + std::string(to_string(r.method)) + "," + format_number(r.coverage) +
           "," + format_number(r.ci_width) + "," + format_number(r.ars_train) + "," + format_number(r.ars_test) +
           "," + std::to_string(r.replications) + "\n";
  }
  return out;
}

std::string format_diagnostic_report(const DiagnosticReport& r, LinkFamily family) {
  std::string out = "field,value\n";
  out += "family," + std::string(to_string(family)) + "\n";
  out += "n," + std::to_string(r.alpha_i.size()) + "\n";
  out += "alpha_bar," + format_number(r.alpha_bar) + "\n";
  out += "variance," + format_number(r.variance_hat) + "\n";
  out += "t," + format_number(r.t_stat) + "\n";
  out += "p," + format_number(r.p_value) + "\n";
  out += "level," + format_number(r.level) + "\n";
  out += "decision," + std::string(to_string(r.decision)) + "\n";
  return out;
}

std::string format_ars_report(const ARSResult& r) {
  std::string out = "field,value\n";
  out += "n11," + format_number(r.cells.n11) + "\n";
  out += "n10," + format_number(r.cells.n10) + "\n";
  out += "n01," + format_number(r.cells.n01) + "\n";
  out += "n00," + format_number(r.cells.n00) + "\n";
  out += "tp," + format_number(r.rates.tp) + "\n";
  out += "tn," + format_number(r.rates.tn) + "\n";
  out += "fp," + format_number(r.rates.fp) + "\n";
  out += "fn," + format_number(r.rates.fn) + "\n";
  out += "ars," + format_number(r.ars) + "\n";
  out += "log_ars," + format_number(r.log_ars) + "\n";
  out += "sigma," + format_number(r.sigma) + "\n";
  out += "z," + format_number(r.z) + "\n";
  out += "p," + format_number(r.p_value) + "\n";
  out += "epsilon_used," + format_number(r.epsilon_used) + "\n";
  return out;
}

std::string format_two_sample_report(const TwoSampleResult& r) {
  std::string out = "field,value\n";
  out += std::string("paired,") + (r.paired ? "true" : "false") + "\n";
  out += "t," + format_number(r.t) + "\n";
  out += "dof," + format_number(r.dof) + "\n";
  out += "p," + format_number(r.p_value) + "\n";
  return out;
}

namespace {

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector json_vector(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::string model_to_json(const SavedModel& m) {
  json j;
  j["method"] = m.method;
  j["columns"] = m.column_names;
  j["chain_file"] = m.chain_file;
  j["response"] = m.response;
  j["threshold"] = m.threshold ? json(*m.threshold) : json(nullptr);
  j["predictors"] = m.predictors;
  j["transforms"] = m.transforms;
  if (const auto* p = std::get_if<ParametricModel>(&m.model)) {
    j["kind"] = "parametric";
    j["family"] = std::string(to_string(p->family));
    j["beta"] = vector_json(p->beta);
    j["cutoff"] = p->cutoff;
  } else {
    const auto& l = std::get<LatentModel>(m.model);
    j["kind"] = "latent";
    j["gamma"] = vector_json(l.gamma);
    j["unit_support"] = l.unit_support;
    j["unit_bandwidth"] = l.unit_bandwidth;
    j["alpha_star"] = l.alpha_star;
    j["cutoff"] = l.cutoff;
  }
  return j.dump(2) + "\n";
}

SavedModel model_from_json(const std::string& text) {
  SavedModel m;
  try {
    const json j = json::parse(text);
    m.method = j.at("method").get<std::string>();
    m.column_names = j.at("columns").get<std::vector<std::string>>();
    m.chain_file = j.value("chain_file", "");
    m.response = j.value("response", "");
    if (j.contains("threshold") && !j.at("threshold").is_null()) m.threshold = j.at("threshold").get<double>();
    m.predictors = j.value("predictors", std::vector<std::string>{});
    m.transforms = j.value("transforms", std::vector<std::string>{});
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "parametric") {
      m.model = ParametricModel{parse_link_family(j.at("family").get<std::string>()), json_vector(j.at("beta")),
                                j.at("cutoff").get<double>()};
    } else if (kind == "latent") {
      m.model = LatentModel{json_vector(j.at("gamma")), j.at("unit_support").get<std::vector<double>>(),
                            j.at("unit_bandwidth").get<double>(), j.at("alpha_star").get<double>(),
                            j.at("cutoff").get<double>()};
    } else {
      throw ValidationError("model file: unknown kind '" + kind + "'");
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("model file: ") + e.what());
  }
  return m;
}

}  // namespace npglm
