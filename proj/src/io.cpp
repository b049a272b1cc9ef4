// SPDX-License-Identifier: MIT
#include "gdlm/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace gdlm::io {

namespace {

using nlohmann::json;

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ParseError("invalid JSON in " + path, 0);
  return j;
}

json model_json(const ModelParams& params) {
  json j;
  j["k"] = params.k();
  j["p"] = params.p();
  if (params.alpha0 > 0.0) j["alpha0"] = params.alpha0;
  json vars = json::array();
  for (int v = 0; v < params.p(); ++v) {
    const MatrixXd& th = params.thetas[v];
    json entry;
    entry["index"] = v;
    entry["d"] = static_cast<int>(th.rows());
    json flat = json::array();
    for (Eigen::Index a = 0; a < th.rows(); ++a)
      for (Eigen::Index h = 0; h < th.cols(); ++h) flat.push_back(th(a, h));
    entry["theta"] = std::move(flat);
    vars.push_back(std::move(entry));
  }
  j["variables"] = std::move(vars);
  return j;
}

void write_file(const std::string& text, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text << '\n';
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace

Dataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);

  Dataset data;
  std::string line;
  int lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const std::vector<std::string> cells = split_csv(t);
    if (!have_header) {
      for (const std::string& cell : cells) {
        const std::string c = trim(cell);
        if (c.size() < 3 || c[0] != 'd' || c[1] != '=')
          throw ParseError("header cell '" + c + "' is not of the form d=<count>", lineno);
        int d = 0;
        try {
          std::size_t pos = 0;
          d = std::stoi(c.substr(2), &pos);
          if (pos != c.size() - 2) throw std::invalid_argument("");
        } catch (...) {
          throw ParseError("bad category count in '" + c + "'", lineno);
        }
        if (d < 1) throw ParseError("category count must be >= 1", lineno);
        data.categories.push_back(d);
      }
      data.p = static_cast<int>(data.categories.size());
      have_header = true;
      continue;
    }
    if (static_cast<int>(cells.size()) != data.p)
      throw ParseError("expected " + std::to_string(data.p) + " columns, got " +
                           std::to_string(cells.size()),
                       lineno);
    for (int j = 0; j < data.p; ++j) {
      const std::string c = trim(cells[j]);
      double v = 0.0;
      try {
        std::size_t pos = 0;
        v = std::stod(c, &pos);
        if (pos != c.size()) throw std::invalid_argument("");
      } catch (...) {
        throw ParseError("bad value '" + c + "' in column " + std::to_string(j), lineno);
      }
      if (data.categories[j] >= 2 &&
          (std::floor(v) != v || v < 0.0 || v >= data.categories[j]))
        throw ParseError("category " + c + " out of range [0," +
                             std::to_string(data.categories[j]) + ") in column " +
                             std::to_string(j),
                         lineno);
      data.values.push_back(v);
    }
    ++data.n;
  }
  if (!have_header) throw ParseError("missing header", 0);
  if (data.n == 0) throw ParseError("no observations", 0);
  data.validate();
  return data;
}

void save_dataset_csv(const Dataset& data, const std::string& path) {
  data.validate();
  std::ostringstream out;
  for (int j = 0; j < data.p; ++j) out << (j ? "," : "") << "d=" << data.categories[j];
  out << '\n';
  char buf[64];
  for (int i = 0; i < data.n; ++i) {
    for (int j = 0; j < data.p; ++j) {
      if (j) out << ',';
      const double v = data(i, j);
      if (data.categories[j] >= 2) {
        out << static_cast<long long>(v);
      } else {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << buf;
      }
    }
    out << '\n';
  }
  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << out.str();
  if (!f) throw IoError("write failed for " + path);
}

std::string model_to_json(const ModelParams& params) { return model_json(params).dump(2); }

std::string fit_to_json(const FitResult& fit) {
  json j = model_json(fit.params);
  json weights = json::array();
  for (const VectorXd& w : fit.weights) {
    json row = json::array();
    for (Eigen::Index h = 0; h < w.size(); ++h) row.push_back(w[h]);
    weights.push_back(std::move(row));
  }
  j["weights"] = std::move(weights);
  json parts = json::array();
  for (std::size_t q = 0; q < fit.reports.size(); ++q) {
    const MatchReport& rep = fit.reports[q];
    json entry;
    entry["partition"] = q;
    entry["converged"] = q < fit.converged.size() ? fit.converged[q] : false;
    entry["objective"] = q < fit.objectives.size() ? fit.objectives[q] : 0.0;
    entry["match_valid"] = rep.valid;
    entry["match_repaired"] = rep.repaired;
    entry["match_score"] = rep.score;
    if (rep.permutation) entry["psi"] = rep.permutation->psi;
    parts.push_back(std::move(entry));
  }
  j["partitions"] = std::move(parts);
  j["anchor_rank_warning"] = fit.anchor_rank_warning;
  return j.dump(2);
}

void save_model_json(const ModelParams& params, const std::string& path) {
  write_file(model_to_json(params), path);
}

void save_model_json(const FitResult& fit, const std::string& path) {
  write_file(fit_to_json(fit), path);
}

ModelParams model_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError("invalid JSON", 0);
  if (!j.contains("k") || !j.contains("p") || !j.contains("variables"))
    throw ParseError("model JSON must contain k, p and variables", 0);
  const int k = j["k"].get<int>();
  const int p = j["p"].get<int>();
  if (k < 1 || p < 1) throw ParseError("k and p must be positive", 0);
  if (static_cast<int>(j["variables"].size()) != p)
    throw ParseError("variables array length differs from p", 0);

  ModelParams params;
  params.thetas.resize(p);
  std::vector<char> seen(p, 0);
  for (const json& entry : j["variables"]) {
    const int v = entry.at("index").get<int>();
    if (v < 0 || v >= p) throw ParseError("variable index out of range", 0);
    if (seen[v]) throw ParseError("duplicate variable index " + std::to_string(v), 0);
    seen[v] = 1;
    const int d = entry.at("d").get<int>();
    const json& flat = entry.at("theta");
    if (static_cast<int>(flat.size()) != d * k)
      throw ParseError("theta length differs from d*k for variable " + std::to_string(v), 0);
    MatrixXd th(d, k);
    for (int a = 0; a < d; ++a)
      for (int h = 0; h < k; ++h) th(a, h) = flat[a * k + h].get<double>();
    for (int h = 0; h < k; ++h) {
      double sum = 0.0;
      for (int a = 0; a < d; ++a) {
        if (th(a, h) < 0.0)
          throw ParseError("negative theta entry for variable " + std::to_string(v) +
                               " column " + std::to_string(h),
                           0);
        sum += th(a, h);
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw ParseError("theta column " + std::to_string(h) + " of variable " +
                             std::to_string(v) + " does not sum to 1",
                         0);
    }
    params.thetas[v] = std::move(th);
  }
  if (j.contains("alpha0")) params.alpha0 = j["alpha0"].get<double>();
  return params;
}

ModelParams load_model_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return model_from_json(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(std::string(e.what()) + " (" + path + ")", e.line());
  }
}

}  // namespace gdlm::io
