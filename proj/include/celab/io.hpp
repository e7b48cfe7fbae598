// ce-lab: file formats. JSON system specs in, JSON reports and CSV tables
// out. All writes go through a temp-file rename so readers never observe a
// partial file. CSV floats use %.17g; JSON floats use the library's
// shortest round-trip form. Non-finite report values are serialized as the
// strings "inf", "-inf", "nan" since JSON has no literals for them.
// SPDX-License-Identifier: MIT
#ifndef CELAB_IO_HPP
#define CELAB_IO_HPP

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "celab/ei.hpp"
#include "celab/emergence.hpp"
#include "celab/errors.hpp"
#include "celab/mi.hpp"
#include "celab/simulate.hpp"
#include "celab/system.hpp"

namespace celab {

using json = nlohmann::ordered_json;

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed for " + path.string());
  return ss.str();
}

inline void write_file_atomic(const std::filesystem::path& path,
                              const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec)
    throw IoError("rename " + tmp.string() + " -> " + path.string() +
                  " failed: " + ec.message());
}

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Finite values serialize as numbers; inf/nan as strings (JSON has none).
inline json json_num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

// ---------------------------------------------------------------- CSV

inline void write_csv(const std::filesystem::path& path,
                      const std::string& header,
                      const std::vector<std::vector<double>>& rows) {
  std::ostringstream ss;
  if (!header.empty()) ss << header << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) ss << ",";
      ss << format_g17(row[i]);
    }
    ss << "\n";
  }
  write_file_atomic(path, ss.str());
}

inline void write_matrix_csv(const std::filesystem::path& path,
                             const Eigen::MatrixXd& M,
                             const std::string& header = "") {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(M.rows()));
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    rows[static_cast<std::size_t>(r)].assign(M.row(r).begin(),
                                             M.row(r).end());
  }
  write_csv(path, header, rows);
}

/// Reads a numeric CSV, skipping one leading header line if it does not
/// start with a number.
inline Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<double>> rows;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> row;
    bool ok = true;
    while (std::getline(ls, cell, ',')) {
      char* end = nullptr;
      double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || !std::isfinite(v)) {
        ok = false;
        break;
      }
      row.push_back(v);
    }
    if (!ok) {
      if (first) {
        first = false;
        continue;  // header line
      }
      throw ParseError("non-numeric cell in " + path.string());
    }
    first = false;
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("ragged rows in " + path.string());
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("no data rows in " + path.string());
  Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index r = 0; r < M.rows(); ++r)
    for (Eigen::Index c = 0; c < M.cols(); ++c)
      M(r, c) = rows[static_cast<std::size_t>(r)]
                    [static_cast<std::size_t>(c)];
  return M;
}

inline void write_trajectory_csv(const std::filesystem::path& path,
                                 const Trajectory& tr) {
  std::ostringstream header;
  header << "t";
  for (Eigen::Index j = 0; j < tr.states.cols(); ++j)
    header << ",x" << (j + 1);
  std::vector<std::vector<double>> rows(
      static_cast<std::size_t>(tr.states.rows()));
  for (Eigen::Index r = 0; r < tr.states.rows(); ++r) {
    auto& row = rows[static_cast<std::size_t>(r)];
    row.push_back(static_cast<double>(tr.t0 + r));
    row.insert(row.end(), tr.states.row(r).begin(), tr.states.row(r).end());
  }
  write_csv(path, header.str(), rows);
}

// ---------------------------------------------------------------- JSON specs

struct SystemSpec {
  LinearSystem system;
  std::optional<CoarseMap> W;
  std::optional<double> eta;
  std::optional<double> L;
  std::optional<std::uint64_t> seed;
};

namespace detail {

inline double finite_number(const json& j, const std::string& key) {
  if (!j.is_number())
    throw ParseError("\"" + key + "\" must be a finite number");
  double v = j.get<double>();
  if (!std::isfinite(v))
    throw ParseError("\"" + key + "\" is not finite");
  return v;
}

inline Eigen::MatrixXd matrix_from_array(const json& arr, int rows, int cols,
                                         const std::string& key) {
  if (!arr.is_array() ||
      arr.size() != static_cast<std::size_t>(rows) * cols)
    throw ParseError("\"" + key + "\" must be a row-major array of " +
                     std::to_string(rows * cols) + " numbers");
  Eigen::MatrixXd M(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      M(r, c) = finite_number(arr[static_cast<std::size_t>(r) * cols + c],
                              key);
  return M;
}

inline json matrix_to_array(const Eigen::MatrixXd& M) {
  json arr = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r)
    for (Eigen::Index c = 0; c < M.cols(); ++c) arr.push_back(M(r, c));
  return arr;
}

}  // namespace detail

inline SystemSpec parse_system_spec(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  try {
    if (!j.is_object() || !j.contains("n"))
      throw ParseError("spec must be an object with an \"n\" field");
    if (!j["n"].is_number_integer() || j["n"].get<int>() < 1)
      throw ParseError("\"n\" must be a positive integer");
    int n = j["n"].get<int>();
    if (!j.contains("A")) throw ParseError("missing \"A\"");
    Eigen::MatrixXd A = detail::matrix_from_array(j["A"], n, n, "A");

    Eigen::MatrixXd Sigma;
    if (!j.contains("Sigma")) throw ParseError("missing \"Sigma\"");
    if (j["Sigma"].is_object()) {
      if (!j["Sigma"].contains("isotropic"))
        throw ParseError("\"Sigma\" object form requires \"isotropic\"");
      double s = detail::finite_number(j["Sigma"]["isotropic"], "Sigma");
      if (!(s > 0.0)) throw ParseError("isotropic sigma must be positive");
      Sigma = s * s * Eigen::MatrixXd::Identity(n, n);
    } else {
      Sigma = detail::matrix_from_array(j["Sigma"], n, n, "Sigma");
    }

    SystemSpec spec;
    spec.system = make_system(A, Sigma);
    if (j.contains("W")) {
      const json& w = j["W"];
      if (!w.is_object() || !w.contains("k") || !w.contains("data"))
        throw ParseError("\"W\" must be an object with \"k\" and \"data\"");
      if (!w["k"].is_number_integer() || w["k"].get<int>() < 1)
        throw ParseError("\"W.k\" must be a positive integer");
      int k = w["k"].get<int>();
      spec.W = make_coarse_map(
          detail::matrix_from_array(w["data"], k, n, "W.data"));
    }
    if (j.contains("eta"))
      spec.eta = detail::finite_number(j["eta"], "eta");
    if (j.contains("L")) {
      spec.L = detail::finite_number(j["L"], "L");
      if (!(*spec.L > 0.0)) throw ParseError("\"L\" must be positive");
    }
    if (j.contains("seed")) {
      if (!j["seed"].is_number_integer())
        throw ParseError("\"seed\" must be an integer");
      spec.seed = j["seed"].get<std::uint64_t>();
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed spec: ") + e.what());
  }
}

inline SystemSpec load_system_spec(const std::filesystem::path& path) {
  return parse_system_spec(read_file(path));
}

inline json system_spec_to_json(const SystemSpec& spec) {
  json j;
  j["n"] = spec.system.n;
  j["A"] = detail::matrix_to_array(spec.system.A);
  j["Sigma"] = detail::matrix_to_array(spec.system.Sigma);
  if (spec.W) {
    j["W"] = {{"k", spec.W->k},
              {"data", detail::matrix_to_array(spec.W->W)}};
  }
  if (spec.eta) j["eta"] = *spec.eta;
  if (spec.L) j["L"] = *spec.L;
  if (spec.seed) j["seed"] = *spec.seed;
  j["units"] = {{"A", "dimensionless"},
                {"Sigma", "state units squared"},
                {"eta", "nats"},
                {"L", "state units"}};
  return j;
}

// ---------------------------------------------------------------- reports

inline json ei_breakdown_to_json(const EIBreakdown& b) {
  json j;
  j["ei"] = json_num(b.ei);
  j["determinism"] = json_num(b.determinism);
  j["degeneracy"] = json_num(b.degeneracy);
  j["per_dimension"] = json_num(b.per_dimension);
  j["L"] = json_num(b.L);
  j["units"] = {{"ei", b.units},
                {"determinism", b.units},
                {"degeneracy", b.units},
                {"per_dimension", b.units},
                {"L", "state units"}};
  return j;
}

inline json emergence_report_to_json(const EmergenceReport& r) {
  json j;
  j["j_micro"] = json_num(r.j_micro);
  j["j_macro"] = json_num(r.j_macro);
  j["delta_j"] = json_num(r.delta_j);
  j["delta_j1"] = json_num(r.delta_j1);
  j["delta_j2"] = json_num(r.delta_j2);
  j["k"] = r.k;
  j["n"] = r.n;
  if (r.constraint_eta) j["constraint_eta"] = json_num(*r.constraint_eta);
  if (r.constraint_satisfied)
    j["constraint_satisfied"] = *r.constraint_satisfied;
  j["units"] = {{"j_micro", "nats"},     {"j_macro", "nats"},
                {"delta_j", "nats"},     {"delta_j1", "nats"},
                {"delta_j2", "nats"},    {"k", "dimensionless"},
                {"n", "dimensionless"},  {"constraint_eta", "nats"}};
  return j;
}

inline void write_convergence_csv(const std::filesystem::path& path,
                                  const std::vector<ConvergenceRow>& rows) {
  std::vector<std::vector<double>> data;
  data.reserve(rows.size());
  for (const auto& r : rows)
    data.push_back({static_cast<double>(r.n_samples), r.delta_i_mean,
                    r.delta_i_std, r.delta_j});
  write_csv(path, "n_samples,delta_i_mean,delta_i_std,delta_j", data);
}

}  // namespace celab

#endif  // CELAB_IO_HPP
