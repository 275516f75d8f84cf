// Command-line front end: reproduce the certificate bound tables, run the
// d=2,k=2 brute-force scans, verify the analytic properties, and load or
// store boxes. Every run writes a manifest listing its outputs with
// checksums; outputs themselves are deterministic for identical
// invocations.
//
// Exit codes: 0 success, 2 invalid arguments, 3 size-budget refusal,
// 4 verification failure, 5 solver failure.

#include "icbound/explorer.hpp"
#include "icbound/infotheory.hpp"
#include "icbound/io.hpp"
#include "icbound/npa.hpp"
#include "icbound/nsbox.hpp"
#include "icbound/protocol.hpp"
#include "icbound/sdp.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace icbound;

namespace {

constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kOk = 0,
  kInvalidArgs = 2,
  kBudget = 3,
  kVerifyFailed = 4,
  kSolverFailed = 5,
};

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%dT%H%M%SZ", std::gmtime(&t));
  return buf;
}

std::string iso_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[40];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

int env_threads() {
  if (const char* v = std::getenv("ICBOUND_THREADS")) {
    const int n = std::atoi(v);
    if (n > 0) return n;
  }
  return 0;  // explorer: hardware concurrency; solver: 1
}

// Collects output files and writes the run manifest on destruction.
class RunDir {
 public:
  RunDir(std::string command, std::string out, json params)
      : command_(std::move(command)), params_(std::move(params)) {
    dir_ = out.empty() ? fs::path("results") / (command_ + "-" + utc_timestamp()) : fs::path(out);
    fs::create_directories(dir_);
    started_ = iso_now();
  }

  fs::path path(const std::string& name) const { return dir_ / name; }

  void emit(const std::string& name, const std::string& content) {
    write_file((dir_ / name).string(), content);
    outputs_.push_back(name);
  }

  void note_output(const std::string& name) { outputs_.push_back(name); }

  void finalize(const std::string& argv_line) {
    json manifest;
    manifest["command"] = argv_line;
    manifest["parameters"] = params_;
    manifest["version"] = kVersion;
    manifest["started_at"] = started_;
    manifest["finished_at"] = iso_now();
    json outs = json::array();
    for (const auto& name : outputs_) {
      const std::string bytes = read_file((dir_ / name).string());
      outs.push_back({{"path", name}, {"bytes", bytes.size()}, {"fnv1a64", fnv1a_hex(bytes)}});
    }
    manifest["outputs"] = outs;
    write_file((dir_ / "manifest.json").string(), manifest.dump(2) + "\n");
    std::printf("wrote %s\n", (dir_ / "manifest.json").c_str());
  }

  const fs::path& dir() const { return dir_; }

 private:
  std::string command_, started_;
  fs::path dir_;
  json params_;
  std::vector<std::string> outputs_;
};

std::string argv_line(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

void print_bound(const BoundResult& r) {
  const double ic = std::log2(static_cast<double>(r.d));
  std::printf("d=%d k=%d level=%s status=%s\n", r.d, r.k, r.level.str().c_str(),
              to_string(r.status));
  if (r.status == SdpStatus::optimal) {
    std::printf("  objective  %.6g\n", r.objective);
    std::printf("  xi         ");
    for (double v : r.xi) std::printf("%.6g ", v);
    std::printf(" (isotropy dev %.2g)\n", r.isotropy_dev);
    std::printf("  gain       %.6g bits\n", r.gain);
    std::printf("  IC bound   %.6g bits (margin %.6g)\n", ic, ic - r.gain);
  }
}

int cmd_bound(int d, int k, const std::string& level_str, double tol, int max_dim,
              const std::string& out, int threads, const std::string& line) {
  Level level = Level::parse(level_str);
  RunDir run("bound", out,
             {{"d", d}, {"k", k}, {"level", level.str()}, {"tol", tol}, {"max_dim", max_dim}});
  NpaOptions opt;
  opt.tol = tol;
  opt.max_dim = max_dim;
  opt.threads = std::max(1, threads);
  BoundResult r = solve_level(d, k, level, opt);
  print_bound(r);
  run.emit("bound.json", bound_to_json(r).dump(2) + "\n");
  run.emit("bound.csv", std::string(bound_csv_header()) + "\n" + bound_csv_row(r) + "\n");
  run.finalize(line);
  return r.status == SdpStatus::optimal ? kOk : kSolverFailed;
}

int cmd_table(const std::string& levels_str, int dmax, int kmax, double tol, int max_dim,
              const std::string& out, int threads, const std::string& line) {
  std::vector<Level> levels;
  {
    std::stringstream ss(levels_str);
    std::string tok;
    while (std::getline(ss, tok, ',')) levels.push_back(Level::parse(tok));
  }
  require(dmax >= 2 && kmax >= 2, "table: need dmax >= 2 and kmax >= 2");
  RunDir run("table", out,
             {{"levels", levels_str}, {"dmax", dmax}, {"kmax", kmax}, {"tol", tol},
              {"max_dim", max_dim}});

  std::string csv = std::string(bound_csv_header()) + "\n";
  bool all_ok = true;
  for (const Level& level : levels)
    for (int d = 2; d <= dmax; ++d)
      for (int k = 2; k <= kmax; ++k) {
        NpaOptions opt;
        opt.tol = tol;
        opt.max_dim = max_dim;
        opt.threads = std::max(1, threads);
        try {
          BoundResult r = solve_level(d, k, level, opt);
          const double ic = std::log2(static_cast<double>(d));
          std::printf("%-5s d=%d k=%d  obj=%10.4f  gain=%7.4f  IC=%7.4f  margin=%7.4f  %s\n",
                      level.str().c_str(), d, k, r.objective, r.gain, ic, ic - r.gain,
                      to_string(r.status));
          csv += bound_csv_row(r) + "\n";
          if (r.status != SdpStatus::optimal) all_ok = false;
        } catch (const budget_error& e) {
          std::printf("%-5s d=%d k=%d  skipped (certificate dim %d over budget %d)\n",
                      level.str().c_str(), d, k, e.dim(), max_dim);
          csv += std::to_string(d) + "," + std::to_string(k) + "," + level.str() +
                 ",,,," + format_double(std::log2(static_cast<double>(d))) + ",,skipped\n";
        }
      }
  run.emit("table.csv", csv);
  run.finalize(line);
  return all_ok ? kOk : kSolverFailed;
}

ScanConfig::Mode parse_mode(const std::string& s) {
  if (s == "symmetric") return ScanConfig::Mode::symmetric;
  if (s == "isotropic") return ScanConfig::Mode::isotropic;
  if (s == "case-i") return ScanConfig::Mode::case_i;
  if (s == "case-ii") return ScanConfig::Mode::case_ii;
  if (s == "case-iii") return ScanConfig::Mode::case_iii;
  if (s == "general") return ScanConfig::Mode::general;
  throw std::invalid_argument("scan: unknown mode '" + s + "'");
}

int cmd_scan(const std::string& mode_str, int resolution, const std::string& window_str,
             bool csv, bool plot_data, const std::string& resume, const std::string& out,
             int threads, const std::string& line) {
  ScanConfig cfg;
  cfg.mode = parse_mode(mode_str);
  cfg.resolution = resolution;
  cfg.threads = threads;
  if (!window_str.empty()) {
    std::stringstream ss(window_str);
    std::string tok;
    std::vector<double> vals;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    require(static_cast<int>(vals.size()) == 2 * scan_axis_count(cfg.mode),
            "scan: window needs lo,hi per scanned axis");
    for (size_t i = 0; i < vals.size(); i += 2) cfg.window.push_back({vals[i], vals[i + 1]});
  }

  RunDir run("scan", out,
             {{"mode", mode_str}, {"resolution", resolution}, {"window", window_str},
              {"csv", csv}, {"plot_data", plot_data}});

  ScanAggregate seed;
  if (!resume.empty()) {
    auto j = json::parse(read_file(resume));
    cfg.start_chunk = j.at("next_chunk").get<int>();
    seed = aggregate_from_json(j.at("aggregate"));
    require(!csv && !plot_data, "scan: --resume works with aggregate-only runs");
    std::printf("resuming at chunk %d\n", cfg.start_chunk);
  }

  std::ofstream csv_stream, plot_stream;
  std::function<void(const ScanPoint&)> sink;
  if (csv || plot_data) {
    if (csv) {
      csv_stream.open(run.path("scan.csv"));
      csv_stream << scan_csv_header() << "\n";
      run.note_output("scan.csv");
    }
    if (plot_data) {
      plot_stream.open(run.path("scan_plot.dat"));
      run.note_output("scan_plot.dat");
    }
    sink = [&](const ScanPoint& pt) {
      if (csv_stream.is_open()) csv_stream << scan_csv_row(pt) << "\n";
      if (plot_stream.is_open())
        plot_stream << format_double(pt.chsh) << " " << format_double(pt.gain) << "\n";
    };
  }

  const std::string ckpt_path = run.path("checkpoint.json").string();
  auto checkpoint = [&](int next_chunk, const ScanAggregate& agg) {
    json j;
    j["next_chunk"] = next_chunk;
    j["aggregate"] = aggregate_to_json(agg);
    write_file(ckpt_path, j.dump() + "\n");
  };

  auto agg = run_scan(cfg, sink, std::move(seed),
                      sink ? std::function<void(int, const ScanAggregate&)>{} : checkpoint);
  if (csv_stream.is_open()) csv_stream.close();
  if (plot_stream.is_open()) plot_stream.close();

  std::printf("mode=%s resolution=%d\n", mode_str.c_str(), resolution);
  std::printf("  points     %lld (feasible %lld, local %lld)\n", agg.total_points,
              agg.feasible_points, agg.local_points);
  std::printf("  max_I      %.6g %s\n", agg.max_gain,
              agg.max_gain >= 1.0 - 1e-6 ? "(saturated)" : "");
  if (!agg.argmax.empty())
    std::printf("  argmax     %zu point(s), first at chsh=%.6g pa0=%.6g pa1=%.6g\n",
                agg.argmax.size(), agg.argmax[0].chsh, agg.argmax[0].pa0, agg.argmax[0].pa1);
  run.emit("aggregate.json", aggregate_to_json(agg).dump(2) + "\n");
  run.finalize(line);
  return kOk;
}

int cmd_verify(const std::string& target, int d, int k, double xi, uint64_t seedval,
               const std::string& out, const std::string& line) {
  RunDir run("verify", out, {{"target", target}, {"d", d}, {"k", k}, {"xi", xi}});
  json report;
  report["target"] = target;
  bool pass = true;

  if (target == "signal-decay") {
    const double sup = signal_decay_ratio_sup(d, xi, 48);
    const double bound = signal_decay_bound(d, xi);
    pass = sup <= bound + 2e-3;
    report["sup"] = sup;
    report["bound"] = bound;
    std::printf("signal-decay d=%d xi=%g: sup=%.6g bound=%.6g -> %s\n", d, xi, sup, bound,
                pass ? "pass" : "FAIL");
  } else if (target == "hessian") {
    std::mt19937_64 rng(seedval);
    auto simplex = [&](int n, double floor_v) {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      Eigen::VectorXd v(n);
      double s = 0.0;
      for (int i = 0; i < n; ++i) {
        v[i] = -std::log(std::max(u(rng), 1e-300));
        s += v[i];
      }
      v /= s;
      v = (1.0 - n * floor_v) * v;
      v.array() += floor_v;
      return v;
    };
    int done = 0, bad = 0;
    double worst = 0.0;
    while (done < 100) {
      const int dd = done % 4 == 3 ? 3 : 2;
      const long long nx = alice_setting_count(dd, 2);
      std::vector<std::vector<Eigen::VectorXd>> r(nx, std::vector<Eigen::VectorXd>(2));
      for (auto& row : r)
        for (auto& prof : row) prof = simplex(dd, 0.1);
      std::vector<Eigen::VectorXd> marg;
      for (int i = 0; i < 2; ++i) marg.push_back(simplex(dd, 0.2));
      RacScheme scheme(dd, 2, marg);
      auto box = NsBox::from_difference_distributions(dd, 2, r);
      const double analytic = hessian_d2I(box, scheme);
      if (std::abs(analytic) < 5e-3) continue;
      auto eval = [&](double dv) {
        auto rr = r;
        rr[0][0][0] += dv;
        rr[0][0][dd - 1] -= dv;
        return information_gain(NsBox::from_difference_distributions(dd, 2, rr), scheme).total;
      };
      auto second = [&](double hh) {
        return (eval(hh) - 2.0 * eval(0.0) + eval(-hh)) / (hh * hh);
      };
      const double h = 2e-4;
      const double fd = (4.0 * second(0.5 * h) - second(h)) / 3.0;
      const double rel = std::abs(analytic - fd) / std::max(std::abs(analytic), 1e-300);
      worst = std::max(worst, rel);
      if (rel > 1e-5) ++bad;
      ++done;
    }
    // Positivity at uniform marginals.
    std::mt19937_64 rng2(seedval + 1);
    bool positive = true;
    for (auto [dd, kk] : std::vector<std::pair<int, int>>{{2, 2}, {3, 2}, {2, 3}}) {
      const long long nx = alice_setting_count(dd, kk);
      std::vector<std::vector<Eigen::VectorXd>> r(nx, std::vector<Eigen::VectorXd>(kk));
      for (auto& row : r)
        for (auto& prof : row) prof = simplex(dd, 0.05);
      auto box = NsBox::from_difference_distributions(dd, kk, r);
      if (hessian_d2I(box, RacScheme::uniform(dd, kk)) <= 0.0) positive = false;
    }
    pass = bad == 0 && positive;
    report["points"] = done;
    report["max_relative_error"] = worst;
    report["positivity_at_uniform"] = positive;
    std::printf("hessian: 100 points, worst relative error %.3g, uniform positivity %s -> %s\n",
                worst, positive ? "ok" : "violated", pass ? "pass" : "FAIL");
  } else if (target == "monotonic") {
    pass = true;
    double prev = -1.0;
    for (int i = 0; i <= 1000; ++i) {
      const double g = gain_unbiased(d, k, i / 1000.0);
      if (g < prev) pass = false;
      prev = g;
    }
    for (int i = 1; i < 1000; ++i)
      if (gain_derivative_unbiased(d, i / 1000.0) < 0.0) pass = false;
    report["grid"] = 1000;
    std::printf("monotonic d=%d k=%d: gain strictly increasing over the xi grid -> %s\n", d, k,
                pass ? "pass" : "FAIL");
  } else if (target == "no-signaling") {
    std::mt19937_64 rng(seedval);
    double worst = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
      const int dd = 2 + static_cast<int>(rng() % 3);
      const int kk = 2 + static_cast<int>(rng() % 2);
      Eigen::MatrixXd p(alice_setting_count(dd, kk), kk);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (Eigen::Index i = 0; i < p.rows(); ++i)
        for (Eigen::Index j = 0; j < p.cols(); ++j) p(i, j) = u(rng);
      auto repc = check_no_signaling(NsBox::from_success_probs(dd, kk, p));
      worst = std::max({worst, repc.alice_marginal_dev, repc.bob_marginal_dev});
    }
    // A signaling table must be flagged.
    Eigen::MatrixXd t0(2, 2), t1(2, 2);
    t0 << 0.5, 0.0, 0.0, 0.5;
    t1 << 0.7, 0.0, 0.0, 0.3;
    NsBox bad(2, 2, {t0, t0, t1, t1});
    const bool flagged = !check_no_signaling(bad).pass;
    pass = worst <= 1e-12 && flagged;
    report["max_violation"] = worst;
    report["signaling_flagged"] = flagged;
    std::printf("no-signaling: max violation %.3g, signaling table flagged %s -> %s\n", worst,
                flagged ? "yes" : "NO", pass ? "pass" : "FAIL");
  } else {
    throw std::invalid_argument("verify: unknown target '" + target + "'");
  }

  report["pass"] = pass;
  run.emit("verify.json", report.dump(2) + "\n");
  run.finalize(line);
  return pass ? kOk : kVerifyFailed;
}

int cmd_box(const std::string& action, const std::string& kind, int d, int k, double p,
            const std::string& file, const std::string& out, const std::string& line) {
  if (action == "make") {
    NsBox box = [&] {
      if (kind == "noiseless") return NsBox::noiseless(d, k);
      if (kind == "random") return NsBox::completely_random(d, k);
      if (kind == "isotropic")
        return NsBox::from_success_probs(
            d, k, Eigen::MatrixXd::Constant(alice_setting_count(d, k), k, p));
      if (kind == "tsirelson") {
        require(d == 2 && k == 2, "box: the tsirelson kind is d=2, k=2");
        return NsBox::from_success_probs(
            2, 2, Eigen::MatrixXd::Constant(2, 2, 0.25 * (2.0 + std::sqrt(2.0))));
      }
      throw std::invalid_argument("box: unknown kind '" + kind + "'");
    }();
    RunDir run("box", out, {{"action", action}, {"kind", kind}, {"d", d}, {"k", k}, {"p", p}});
    run.emit("box.json", nsbox_to_json(box).dump(2) + "\n");
    run.finalize(line);
    return kOk;
  }
  if (action == "check") {
    auto box = nsbox_from_json(json::parse(read_file(file)));
    auto rep = check_no_signaling(box);
    std::printf("d=%d k=%d\n", box.d(), box.k());
    std::printf("  no-signaling: alice dev %.3g, bob dev %.3g -> %s\n", rep.alice_marginal_dev,
                rep.bob_marginal_dev, rep.pass ? "pass" : "FAIL");
    if (box.d() == 2 && box.k() == 2) {
      auto q = correlations_2x2(box);
      auto vals = chsh_values(q);
      std::printf("  chsh %.6g (partners %.6g %.6g %.6g) quantum=%s local=%s\n", vals[0],
                  vals[1], vals[2], vals[3], is_quantum_2x2(q) ? "yes" : "no",
                  is_local_2x2(q) ? "yes" : "no");
    }
    auto gain = information_gain(box, RacScheme::uniform(box.d(), box.k()));
    std::printf("  gain (uniform marginals) %.6g bits, IC bound %.6g -> %s\n", gain.total,
                gain.bound, gain.satisfied ? "satisfied" : "VIOLATED");
    return rep.pass ? kOk : kVerifyFailed;
  }
  throw std::invalid_argument("box: unknown action '" + action + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"information-gain bounds for d-level random access codes over no-signaling boxes"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  const std::string line = argv_line(argc, argv);
  const int default_threads = env_threads();

  // bound
  auto* bound = app.add_subcommand("bound", "solve one certificate bound");
  int b_d = 2, b_k = 2, b_maxdim = 300, b_threads = std::max(1, default_threads);
  double b_tol = 1e-7;
  std::string b_level = "1", b_out;
  bound->add_option("--d", b_d, "levels per digit")->check(CLI::Range(2, 16));
  bound->add_option("--k", b_k, "database size")->check(CLI::Range(2, 16));
  bound->add_option("--level", b_level, "certificate level: 1 or 1+AB");
  bound->add_option("--tol", b_tol, "relative duality-gap target");
  bound->add_option("--max-dim", b_maxdim, "certificate size budget");
  bound->add_option("--threads", b_threads, "solver assembly threads");
  bound->add_option("--out", b_out, "output directory");

  // table
  auto* table = app.add_subcommand("table", "sweep bounds over (d, k, level)");
  int t_dmax = 5, t_kmax = 5, t_maxdim = 300, t_threads = std::max(1, default_threads);
  double t_tol = 1e-7;
  std::string t_levels = "1,1+AB", t_out;
  table->add_option("--levels", t_levels, "comma-separated levels");
  table->add_option("--dmax", t_dmax, "largest d");
  table->add_option("--kmax", t_kmax, "largest k");
  table->add_option("--tol", t_tol, "relative duality-gap target");
  table->add_option("--max-dim", t_maxdim, "certificate size budget per cell");
  table->add_option("--threads", t_threads, "solver assembly threads");
  table->add_option("--out", t_out, "output directory");

  // scan
  auto* scan = app.add_subcommand("scan", "brute-force d=2,k=2 landscape scans");
  std::string s_mode = "symmetric", s_window, s_resume, s_out;
  int s_res = 100, s_threads = default_threads;
  bool s_csv = false, s_plot = false;
  scan->add_option("--mode", s_mode, "symmetric|isotropic|case-i|case-ii|case-iii|general")
      ->required();
  scan->add_option("--resolution", s_res, "grid points per axis (default 100)");
  scan->add_option("--window", s_window, "lo,hi per scanned axis");
  scan->add_flag("--csv", s_csv, "dump every feasible point as CSV (single-threaded)");
  scan->add_flag("--plot-data", s_plot, "dump (chsh, I) pairs for gnuplot");
  scan->add_option("--resume", s_resume, "checkpoint file to resume from");
  scan->add_option("--threads", s_threads, "worker threads (0 = all cores)");
  scan->add_option("--out", s_out, "output directory");

  // verify
  auto* verify = app.add_subcommand("verify", "run a property suite");
  std::string v_target, v_out;
  int v_d = 2, v_k = 2;
  double v_xi = 0.5;
  uint64_t v_seed = 20240801;
  verify->add_option("--target", v_target, "signal-decay|hessian|monotonic|no-signaling")
      ->required();
  verify->add_option("--d", v_d, "levels per digit");
  verify->add_option("--k", v_k, "database size");
  verify->add_option("--xi", v_xi, "noise parameter");
  verify->add_option("--seed", v_seed, "rng seed");
  verify->add_option("--out", v_out, "output directory");

  // box
  auto* boxcmd = app.add_subcommand("box", "make or check a no-signaling box");
  std::string x_action, x_kind = "noiseless", x_file, x_out;
  int x_d = 2, x_k = 2;
  double x_p = 1.0;
  boxcmd->add_option("action", x_action, "make|check")->required();
  boxcmd->add_option("--kind", x_kind, "noiseless|random|isotropic|tsirelson");
  boxcmd->add_option("--d", x_d, "levels per digit");
  boxcmd->add_option("--k", x_k, "database size");
  boxcmd->add_option("--p", x_p, "success probability for the isotropic kind");
  boxcmd->add_option("--in", x_file, "box JSON to check");
  boxcmd->add_option("--out", x_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalidArgs;
  }

  try {
    if (*bound) return cmd_bound(b_d, b_k, b_level, b_tol, b_maxdim, b_out, b_threads, line);
    if (*table)
      return cmd_table(t_levels, t_dmax, t_kmax, t_tol, t_maxdim, t_out, t_threads, line);
    if (*scan)
      return cmd_scan(s_mode, s_res, s_window, s_csv, s_plot, s_resume, s_out, s_threads, line);
    if (*verify) return cmd_verify(v_target, v_d, v_k, v_xi, v_seed, v_out, line);
    if (*boxcmd) return cmd_box(x_action, x_kind, x_d, x_k, x_p, x_file, x_out, line);
  } catch (const budget_error& e) {
    std::fprintf(stderr, "refused: %s\n", e.what());
    return kBudget;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid arguments: %s\n", e.what());
    return kInvalidArgs;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kSolverFailed;
  }
  return kInvalidArgs;
}
