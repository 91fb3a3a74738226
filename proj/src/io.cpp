// Apache License, Version 2.0, refer to LICENSE.txt

#include "bdc/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace bdc::io {

using nlohmann::json;

namespace {

std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "' (missing file?)");
  return in;
}

json parse_json(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError("malformed JSON in " + where + ": " + e.what());
  }
}

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ValidationError(where + ": missing field '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(where + ": field '" + std::string(key) + "' has the wrong type");
  }
}

json options_json(const MCMCOptions& o) {
  return json{{"iterations", o.iterations}, {"burnin", o.burnin},   {"thin", o.thin},
              {"seed", o.seed},             {"split_merge_scans", o.split_merge_scans},
              {"chains", o.chains}};
}

json acceptance_json(const AcceptanceCounters& a) {
  return json{{"split_proposed", a.split_proposed}, {"split_accepted", a.split_accepted},
              {"merge_proposed", a.merge_proposed}, {"merge_accepted", a.merge_accepted},
              {"r_proposed", a.r_proposed},         {"r_accepted", a.r_accepted},
              {"p_proposed", a.p_proposed},         {"p_accepted", a.p_accepted}};
}

}  // namespace

std::vector<std::vector<double>> read_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t,") == std::string::npos) continue;
    std::vector<double> row;
    const char* p = line.data();
    const char* end = p + line.size();
    while (p < end) {
      while (p < end && (*p == ' ' || *p == '\t' || *p == ',')) ++p;
      if (p == end) break;
      const char* start = p;
      while (p < end && *p != ' ' && *p != '\t' && *p != ',') ++p;
      double value = 0.0;
      const auto res = std::from_chars(start, p, value);
      if (res.ec != std::errc() || res.ptr != p) {
        throw ValidationError("malformed CSV: " + path + " line " + std::to_string(line_no) +
                              ": cannot parse '" + std::string(start, p) + "'");
      }
      row.push_back(value);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError("malformed CSV: " + path + " is empty");
  return rows;
}

void write_csv(const std::string& path, const std::vector<std::vector<double>>& rows) {
  std::ofstream out = open_out(path);
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j > 0) out << ',';
      out << format_double(row[j]);
    }
    out << '\n';
  }
}

DataMatrix read_data(const std::string& path) {
  const auto rows = read_csv(path);
  DataMatrix data(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
  for (int i = 0; i < data.rows; ++i) {
    if (static_cast<int>(rows[i].size()) != data.cols) {
      throw ValidationError("malformed CSV: " + path + " row " + std::to_string(i + 1) +
                            " has a different number of columns");
    }
    for (int j = 0; j < data.cols; ++j) {
      if (!std::isfinite(rows[i][j])) throw ValidationError("data: non-finite value in " + path);
      data(i, j) = rows[i][j];
    }
  }
  return data;
}

void write_data(const std::string& path, const DataMatrix& data) {
  std::vector<std::vector<double>> rows(data.rows);
  for (int i = 0; i < data.rows; ++i) rows[i].assign(data.row(i).begin(), data.row(i).end());
  write_csv(path, rows);
}

void write_matrix(const std::string& path, const DissimilarityMatrix& d) {
  std::vector<std::vector<double>> rows(d.size());
  for (int i = 0; i < d.size(); ++i) rows[i].assign(d.row(i).begin(), d.row(i).end());
  write_csv(path, rows);
}

void write_coclustering(const std::string& path, const Coclustering& s) {
  std::vector<std::vector<double>> rows(s.n);
  for (int i = 0; i < s.n; ++i) {
    rows[i].assign(s.values.begin() + static_cast<std::ptrdiff_t>(i) * s.n,
                   s.values.begin() + static_cast<std::ptrdiff_t>(i + 1) * s.n);
  }
  write_csv(path, rows);
}

Partition read_labels(const std::string& path) {
  const auto rows = read_csv(path);
  std::vector<int> labels;
  for (const auto& row : rows) {
    for (double x : row) {
      if (x != std::floor(x) || std::abs(x) > 1e9) {
        throw ValidationError("labels: non-integer label in " + path);
      }
      labels.push_back(static_cast<int>(x));
    }
  }
  return Partition::from_labels(labels);
}

void write_labels(const std::string& path, const Partition& rho) {
  std::ofstream out = open_out(path);
  for (int x : rho.one_based()) out << x << '\n';
}

std::string chain_record_json(const ChainRecord& record) {
  json j;
  j["iter"] = record.iter;
  j["labels"] = record.partition.one_based();
  j["r"] = record.r;
  j["p"] = record.p;
  j["K"] = record.num_clusters();
  j["logpost"] = record.logpost;
  return j.dump();
}

void write_chain(const std::string& path, const SampleChain& chain, const std::string& meta_json) {
  {
    std::ofstream out = open_out(path);
    for (const auto& rec : chain.records) out << chain_record_json(rec) << '\n';
  }
  json meta = meta_json.empty() ? json::object() : parse_json(meta_json, "chain metadata");
  meta["n"] = chain.n;
  meta["options"] = options_json(chain.options);
  meta["seed"] = chain.seed;
  meta["acceptance"] = acceptance_json(chain.acceptance);
  meta["r_step"] = chain.r_step;
  meta["records"] = chain.records.size();
  write_text(path + ".meta.json", meta.dump(2) + "\n");
}

SampleChain read_chain(const std::string& path) {
  std::ifstream in = open_in(path);
  SampleChain chain;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + " line " + std::to_string(line_no);
    const json j = parse_json(line, where);
    ChainRecord rec;
    rec.iter = field<int>(j, "iter", where);
    const auto labels = field<std::vector<int>>(j, "labels", where);
    rec.partition = Partition::from_labels(labels);
    rec.r = field<double>(j, "r", where);
    rec.p = field<double>(j, "p", where);
    rec.logpost = field<double>(j, "logpost", where);
    if (field<int>(j, "K", where) != rec.num_clusters()) {
      throw ValidationError(where + ": K does not match the labels");
    }
    if (chain.n == 0) chain.n = rec.partition.size();
    if (rec.partition.size() != chain.n) throw ValidationError(where + ": label count changed");
    chain.records.push_back(std::move(rec));
  }
  std::ifstream meta_in(path + ".meta.json");
  if (meta_in) {
    std::stringstream buf;
    buf << meta_in.rdbuf();
    const json meta = parse_json(buf.str(), path + ".meta.json");
    if (meta.contains("options")) {
      const json& o = meta["options"];
      chain.options.iterations = o.value("iterations", chain.options.iterations);
      chain.options.burnin = o.value("burnin", chain.options.burnin);
      chain.options.thin = o.value("thin", chain.options.thin);
      chain.options.seed = o.value("seed", chain.options.seed);
      chain.options.split_merge_scans = o.value("split_merge_scans", chain.options.split_merge_scans);
      chain.options.chains = o.value("chains", chain.options.chains);
    }
    chain.seed = meta.value("seed", chain.options.seed);
    chain.r_step = meta.value("r_step", 0.0);
    if (meta.contains("acceptance")) {
      const json& a = meta["acceptance"];
      AcceptanceCounters& c = chain.acceptance;
      c.split_proposed = a.value("split_proposed", std::int64_t{0});
      c.split_accepted = a.value("split_accepted", std::int64_t{0});
      c.merge_proposed = a.value("merge_proposed", std::int64_t{0});
      c.merge_accepted = a.value("merge_accepted", std::int64_t{0});
      c.r_proposed = a.value("r_proposed", std::int64_t{0});
      c.r_accepted = a.value("r_accepted", std::int64_t{0});
      c.p_proposed = a.value("p_proposed", std::int64_t{0});
      c.p_accepted = a.value("p_accepted", std::int64_t{0});
    }
  }
  return chain;
}

void write_params(const std::string& path, const ElicitationReport& report) {
  const ModelParams& m = report.likelihood.params;
  const ESCParams& e = report.prior.esc;
  json j;
  j["k_elbow"] = report.k_elbow;
  j["initial_labels"] = report.initial_labels.one_based();
  j["model"] = {{"delta1", m.delta1}, {"delta2", m.delta2}, {"alpha", m.alpha}, {"beta", m.beta},
                {"zeta", m.zeta},     {"gamma", m.gamma},   {"repulsion", m.repulsion}};
  j["prior"] = {{"eta", e.eta}, {"sigma", e.sigma}, {"u", e.u}, {"v", e.v}};
  j["diagnostics"] = {
      {"method", report.method},
      {"curve", report.curve},
      {"n_within", report.likelihood.n_within},
      {"n_between", report.likelihood.n_between},
      {"delta2_clamped", report.likelihood.delta2_clamped},
      {"within_gamma_loglik", report.likelihood.within.loglik},
      {"between_gamma_loglik", report.likelihood.between.loglik},
      {"r_gamma_loglik", report.prior.r_fit.loglik},
      {"p_beta_loglik", report.prior.p_fit.loglik},
  };
  write_text(path, j.dump(2) + "\n");
}

RunParams read_params(const std::string& path) {
  const json j = parse_json(read_text(path), path);
  RunParams out;
  if (j.contains("model")) {
    const json& m = j["model"];
    const std::string where = path + " model";
    out.model.delta1 = field<double>(m, "delta1", where);
    out.model.delta2 = field<double>(m, "delta2", where);
    out.model.alpha = field<double>(m, "alpha", where);
    out.model.beta = field<double>(m, "beta", where);
    out.model.zeta = field<double>(m, "zeta", where);
    out.model.gamma = field<double>(m, "gamma", where);
    out.model.repulsion = m.value("repulsion", true);
  }
  if (j.contains("prior")) {
    const json& p = j["prior"];
    const std::string where = path + " prior";
    out.prior.eta = field<double>(p, "eta", where);
    out.prior.sigma = field<double>(p, "sigma", where);
    out.prior.u = field<double>(p, "u", where);
    out.prior.v = field<double>(p, "v", where);
  }
  out.prior.r = out.prior.eta / out.prior.sigma;
  out.prior.p = out.prior.u / (out.prior.u + out.prior.v);
  if (j.contains("initial_labels")) {
    out.initial_labels = Partition::from_labels(field<std::vector<int>>(j, "initial_labels", path));
  }
  out.model.validate();
  out.prior.validate();
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out = open_out(path);
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in = open_in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace bdc::io
