// Serialization: JSON schemas for boxes, bound results and SDP dumps, CSV
// rows for scans and table sweeps, plus the small hashing helper used by
// run manifests.
#pragma once

#include "icbound/core.hpp"
#include "icbound/explorer.hpp"
#include "icbound/npa.hpp"
#include "icbound/nsbox.hpp"
#include "icbound/sdp.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <string>

namespace icbound {

using nlohmann::json;

// {"d":int,"k":int,"joint":[{"x":int,"y":int,"table":[[float]]}]}
inline json nsbox_to_json(const NsBox& box) {
  json j;
  j["d"] = box.d();
  j["k"] = box.k();
  json tables = json::array();
  for (long long x = 0; x < box.alice_settings(); ++x)
    for (int y = 0; y < box.bob_settings(); ++y) {
      json t;
      t["x"] = x;
      t["y"] = y;
      json rows = json::array();
      for (int A = 0; A < box.d(); ++A) {
        json row = json::array();
        for (int B = 0; B < box.d(); ++B) row.push_back(box.pr(x, y, A, B));
        rows.push_back(row);
      }
      t["table"] = rows;
      tables.push_back(t);
    }
  j["joint"] = tables;
  return j;
}

inline NsBox nsbox_from_json(const json& j) {
  const int d = j.at("d").get<int>();
  const int k = j.at("k").get<int>();
  const long long nx = alice_setting_count(d, k);
  std::vector<Eigen::MatrixXd> joint(nx * k, Eigen::MatrixXd::Zero(d, d));
  std::vector<bool> seen(nx * k, false);
  for (const auto& t : j.at("joint")) {
    const long long x = t.at("x").get<long long>();
    const int y = t.at("y").get<int>();
    require(x >= 0 && x < nx && y >= 0 && y < k, "nsbox_from_json: setting out of range");
    Eigen::MatrixXd m(d, d);
    const auto& rows = t.at("table");
    require(static_cast<int>(rows.size()) == d, "nsbox_from_json: bad table");
    for (int A = 0; A < d; ++A)
      for (int B = 0; B < d; ++B) m(A, B) = rows.at(A).at(B).get<double>();
    joint[x * k + y] = m;
    seen[x * k + y] = true;
  }
  for (bool s : seen) require(s, "nsbox_from_json: missing setting pair");
  return NsBox(d, k, std::move(joint));
}

// {"d","k","level","objective","xi","gain","status","gap"}
inline json bound_to_json(const BoundResult& r) {
  json j;
  j["d"] = r.d;
  j["k"] = r.k;
  j["level"] = r.level.str();
  j["objective"] = r.objective;
  j["xi"] = r.xi;
  j["gain"] = r.gain;
  j["status"] = to_string(r.status);
  j["gap"] = r.rel_gap;
  j["isotropy_dev"] = r.isotropy_dev;
  j["iterations"] = r.iterations;
  j["encoding"] = r.encoding;
  return j;
}

inline json dense_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

// Self-describing dump with dense row-major matrices, for regression
// goldens and bug reports.
inline json sdp_problem_to_json(const SdpProblem& p) {
  json j;
  j["format"] = "icbound-sdp-problem";
  j["n"] = p.n;
  j["sense"] = p.sense == SdpSense::maximize ? "max" : "min";
  j["C"] = dense_to_json(p.C);
  json eqs = json::array();
  for (size_t q = 0; q < p.eq_mats.size(); ++q) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p.n, p.n);
    p.eq_mats[q].add_to(m, 1.0);
    eqs.push_back({{"matrix", dense_to_json(m)}, {"rhs", p.eq_rhs[q]}});
  }
  j["equalities"] = eqs;
  json ineqs = json::array();
  for (const auto& h : p.ineq_mats) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p.n, p.n);
    h.add_to(m, 1.0);
    ineqs.push_back({{"matrix", dense_to_json(m)}});
  }
  j["inequalities"] = ineqs;
  return j;
}

inline json sdp_solution_to_json(const SdpSolution& s) {
  json j;
  j["format"] = "icbound-sdp-solution";
  j["status"] = to_string(s.status);
  j["X"] = dense_to_json(s.X);
  j["S"] = dense_to_json(s.S);
  j["y"] = std::vector<double>(s.y.data(), s.y.data() + s.y.size());
  j["ineq_y"] = std::vector<double>(s.ineq_y.data(), s.ineq_y.data() + s.ineq_y.size());
  j["primal_obj"] = s.primal_obj;
  j["dual_obj"] = s.dual_obj;
  j["rel_gap"] = s.rel_gap;
  j["primal_res"] = s.primal_res;
  j["dual_res"] = s.dual_res;
  j["iterations"] = s.iterations;
  j["message"] = s.message;
  return j;
}

inline json aggregate_to_json(const ScanAggregate& a) {
  json j;
  j["max_I"] = a.max_gain;
  json argmax = json::array();
  for (const auto& pt : a.argmax) {
    argmax.push_back({{"p00", pt.p[0]},
                      {"p01", pt.p[1]},
                      {"p10", pt.p[2]},
                      {"p11", pt.p[3]},
                      {"pa0", pt.pa0},
                      {"pa1", pt.pa1},
                      {"chsh", pt.chsh},
                      {"I0", pt.i0},
                      {"I1", pt.i1},
                      {"I", pt.gain},
                      {"local", pt.local}});
  }
  j["argmax"] = argmax;
  j["argmax_overflow"] = a.argmax_overflow;
  j["saturated"] = a.max_gain >= 1.0 - 1e-6;
  j["counts"] = {{"total", a.total_points},
                 {"feasible", a.feasible_points},
                 {"local", a.local_points}};
  j["histogram"] = {{"chsh_bins", ScanAggregate::kChshBins},
                    {"chsh_range", {0.0, 4.0}},
                    {"I_bins", ScanAggregate::kGainBins},
                    {"I_range", {0.0, 1.0}},
                    {"counts", a.histogram}};
  return j;
}

inline ScanAggregate aggregate_from_json(const json& j) {
  ScanAggregate a;
  a.max_gain = j.at("max_I").get<double>();
  for (const auto& e : j.at("argmax")) {
    ScanPoint pt;
    pt.p = {e.at("p00").get<double>(), e.at("p01").get<double>(), e.at("p10").get<double>(),
            e.at("p11").get<double>()};
    pt.pa0 = e.at("pa0").get<double>();
    pt.pa1 = e.at("pa1").get<double>();
    pt.chsh = e.at("chsh").get<double>();
    pt.i0 = e.at("I0").get<double>();
    pt.i1 = e.at("I1").get<double>();
    pt.gain = e.at("I").get<double>();
    pt.local = e.at("local").get<bool>();
    pt.quantum = true;
    a.argmax.push_back(pt);
  }
  a.argmax_overflow = j.at("argmax_overflow").get<long long>();
  a.total_points = j.at("counts").at("total").get<long long>();
  a.feasible_points = j.at("counts").at("feasible").get<long long>();
  a.local_points = j.at("counts").at("local").get<long long>();
  a.histogram = j.at("histogram").at("counts").get<std::vector<long long>>();
  return a;
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline const char* scan_csv_header() {
  return "p00,p01,p10,p11,pa0,pa1,chsh,chsh_p1,chsh_p2,chsh_p3,quantum,local,I0,I1,I";
}

inline std::string scan_csv_row(const ScanPoint& pt) {
  std::string s;
  for (double v : pt.p) s += format_double(v) + ",";
  s += format_double(pt.pa0) + "," + format_double(pt.pa1) + ",";
  s += format_double(pt.chsh) + ",";
  for (double v : pt.partners) s += format_double(v) + ",";
  s += std::string(pt.quantum ? "1" : "0") + "," + (pt.local ? "1" : "0") + ",";
  s += format_double(pt.i0) + "," + format_double(pt.i1) + "," + format_double(pt.gain);
  return s;
}

inline const char* bound_csv_header() {
  return "d,k,level,objective,xi_mean,gain,ic_bound,margin,status";
}

inline std::string bound_csv_row(const BoundResult& r) {
  const double ic = std::log2(static_cast<double>(r.d));
  std::string s = std::to_string(r.d) + "," + std::to_string(r.k) + "," + r.level.str() + ",";
  if (r.status == SdpStatus::optimal) {
    s += format_double(r.objective) + "," + format_double(r.xi_mean) + "," +
         format_double(r.gain) + "," + format_double(ic) + "," + format_double(ic - r.gain);
  } else {
    s += ",,," + format_double(ic) + ",";
  }
  s += std::string(",") + to_string(r.status);
  return s;
}

// FNV-1a, 64-bit; enough to pin outputs in a run manifest.
inline std::string fnv1a_hex(const std::string& bytes) {
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "read_file: cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "write_file: cannot open " + path);
  out << content;
}

}  // namespace icbound
