// Brute-force engine for the d = 2, k = 2 scheme: grid scans over the four
// success probabilities and the two input marginals, quantum / local
// classification of every point, information-gain landscapes, and the three
// fixed-box marginal scans.
//
// Grids are endpoint-inclusive with `resolution` points per axis. Marginal
// axes are bumped to an odd point count so the uniform point 1/2 is always
// sampled; the gain maxima the scans are after sit exactly there.
#pragma once

#include "icbound/core.hpp"
#include "icbound/infotheory.hpp"
#include "icbound/nsbox.hpp"

#include <array>
#include <atomic>
#include <cmath>
#include <functional>
#include <thread>
#include <vector>

namespace icbound {

struct ScanPoint {
  std::array<double, 4> p{};  // success probabilities p00, p01, p10, p11
  double pa0 = 0.5, pa1 = 0.5;
  double chsh = 0.0;                  // primary CHSH value
  std::array<double, 3> partners{};   // the three shifted-sign partners
  bool quantum = false;
  bool local = false;
  double i0 = 0.0, i1 = 0.0, gain = 0.0;
};

struct ScanConfig {
  enum class Mode { symmetric, isotropic, case_i, case_ii, case_iii, general };
  Mode mode = Mode::symmetric;
  int resolution = 100;
  // Optional sub-box per scanned axis, inside [0,1]; empty means full range.
  std::vector<std::pair<double, double>> window;
  int threads = 1;  // 0 = hardware concurrency
  long long checkpoint_interval = 1'000'000;
  int start_chunk = 0;
};

inline int scan_axis_count(ScanConfig::Mode m) {
  switch (m) {
    case ScanConfig::Mode::symmetric:
    case ScanConfig::Mode::isotropic: return 4;
    case ScanConfig::Mode::case_i:
    case ScanConfig::Mode::case_ii:
    case ScanConfig::Mode::case_iii: return 2;
    case ScanConfig::Mode::general: return 6;
  }
  return 0;
}

struct ScanAggregate {
  long long total_points = 0;
  long long feasible_points = 0;
  long long local_points = 0;
  double max_gain = -1.0;
  std::vector<ScanPoint> argmax;  // ties within 1e-9, capped
  long long argmax_overflow = 0;
  static constexpr size_t kArgmaxCap = 10000;
  static constexpr double kTieTol = 1e-9;
  static constexpr int kChshBins = 40, kGainBins = 40;
  std::vector<long long> histogram = std::vector<long long>(kChshBins * kGainBins, 0);

  void update(const ScanPoint& pt) {
    ++total_points;
    if (!pt.quantum) return;
    ++feasible_points;
    if (pt.local) ++local_points;
    const int cb = std::min(kChshBins - 1, std::max(0, static_cast<int>(pt.chsh / 4.0 * kChshBins)));
    const int gb = std::min(kGainBins - 1, std::max(0, static_cast<int>(pt.gain * kGainBins)));
    ++histogram[cb * kGainBins + gb];
    if (pt.gain > max_gain + kTieTol) {
      max_gain = pt.gain;
      // Drop ties that fell out of the new band.
      std::vector<ScanPoint> keep;
      for (const auto& q : argmax)
        if (q.gain >= max_gain - kTieTol) keep.push_back(q);
      argmax.swap(keep);
    }
    if (pt.gain >= max_gain - kTieTol) {
      max_gain = std::max(max_gain, pt.gain);
      if (argmax.size() < kArgmaxCap)
        argmax.push_back(pt);
      else
        ++argmax_overflow;
    }
  }

  void merge(const ScanAggregate& o) {
    total_points += o.total_points;
    feasible_points += o.feasible_points;
    local_points += o.local_points;
    for (size_t i = 0; i < histogram.size(); ++i) histogram[i] += o.histogram[i];
    const double m = std::max(max_gain, o.max_gain);
    std::vector<ScanPoint> keep;
    for (const auto& q : argmax)
      if (q.gain >= m - kTieTol) keep.push_back(q);
    for (const auto& q : o.argmax)
      if (q.gain >= m - kTieTol) keep.push_back(q);
    argmax_overflow += o.argmax_overflow;
    if (keep.size() > kArgmaxCap) {
      argmax_overflow += keep.size() - kArgmaxCap;
      keep.resize(kArgmaxCap);
    }
    argmax.swap(keep);
    max_gain = m;
  }
};

// Closed-form evaluation of one d = 2, k = 2 point. The guess channels are
//   b = 0:  Pr(beta = a0)-rows built from p00, p10 mixed by Pr(a1),
//   b = 1:  rows built from p01, p11 mixed by Pr(a0);
// identical to protocol::guess_channel on the from_success_probs box.
inline ScanPoint evaluate_point_2x2(double p00, double p01, double p10, double p11,
                                    double pa0, double pa1) {
  ScanPoint pt;
  pt.p = {p00, p01, p10, p11};
  pt.pa0 = pa0;
  pt.pa1 = pa1;

  CorrelationQuad q{2.0 * p00 - 1.0, 2.0 * p01 - 1.0, 2.0 * p10 - 1.0, -(2.0 * p11 - 1.0)};
  const auto partners = chsh_values(q);
  pt.chsh = partners[0];
  pt.partners = {partners[1], partners[2], partners[3]};
  pt.quantum = is_quantum_2x2(q);
  pt.local = is_local_2x2(q);

  auto bsc_gain = [](double w, double alpha, double lambda) {
    // I(X;Z) for the 2x2 channel [[alpha, 1-alpha], [1-lambda, lambda]]
    // with Pr(X=0) = w.
    const double z0 = w * alpha + (1.0 - w) * (1.0 - lambda);
    double h_out = -xlog2x(z0) - xlog2x(1.0 - z0);
    double h_cond = w * (-xlog2x(alpha) - xlog2x(1.0 - alpha)) +
                    (1.0 - w) * (-xlog2x(lambda) - xlog2x(1.0 - lambda));
    return std::max(h_out - h_cond, 0.0);
  };
  const double a0 = pa1 * p00 + (1.0 - pa1) * p10;
  const double l0 = pa1 * p10 + (1.0 - pa1) * p00;
  const double a1 = pa0 * p01 + (1.0 - pa0) * p11;
  const double l1 = pa0 * p11 + (1.0 - pa0) * p01;
  pt.i0 = bsc_gain(pa0, a0, l0);
  pt.i1 = bsc_gain(pa1, a1, l1);
  pt.gain = pt.i0 + pt.i1;
  return pt;
}

namespace explorer_detail {

inline std::vector<double> make_axis(int resolution, bool ensure_midpoint,
                                     std::pair<double, double> range) {
  require(resolution >= 2, "scan: resolution must be >= 2");
  require(range.first >= -tol::entropy_zero && range.second <= 1.0 + tol::entropy_zero &&
              range.first <= range.second,
          "scan: window must be a sub-interval of [0,1]");
  int n = resolution;
  if (ensure_midpoint && n % 2 == 0) ++n;
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i)
    v[i] = range.first + (range.second - range.first) * i / static_cast<double>(n - 1);
  return v;
}

struct CaseBox {
  double p00, p01, p10, p11;
};

inline CaseBox case_box(ScanConfig::Mode m) {
  const double pt = 0.25 * (2.0 + std::sqrt(2.0));  // Tsirelson success probability
  switch (m) {
    case ScanConfig::Mode::case_i: return {1.0, 0.5, 1.0, 0.5};
    case ScanConfig::Mode::case_ii: return {pt, pt, pt, pt};
    case ScanConfig::Mode::case_iii: return {pt, pt, 0.5, 0.5};
    default: throw std::invalid_argument("case_box: not a fixed-box mode");
  }
}

}  // namespace explorer_detail

// Runs the configured scan. Feasible points stream through `sink` (CSV
// emission); pass nullptr for aggregate-only runs. When a sink is set the
// scan runs on one thread so rows come out in grid order. `checkpoint` is
// called with (next_chunk, aggregate so far) roughly every
// checkpoint_interval points; combined with start_chunk and a seed
// aggregate this makes long scans resumable at chunk granularity.
inline ScanAggregate run_scan(const ScanConfig& cfg,
                              const std::function<void(const ScanPoint&)>& sink = nullptr,
                              ScanAggregate seed = ScanAggregate{},
                              const std::function<void(int, const ScanAggregate&)>& checkpoint =
                                  nullptr) {
  using Mode = ScanConfig::Mode;
  const int naxes = scan_axis_count(cfg.mode);
  require(cfg.window.empty() || static_cast<int>(cfg.window.size()) == naxes,
          "scan: window must cover every scanned axis");
  auto range = [&](int axis) {
    return cfg.window.empty() ? std::pair<double, double>{0.0, 1.0} : cfg.window[axis];
  };

  std::vector<std::vector<double>> axes;
  const bool marginal_mode = cfg.mode == Mode::case_i || cfg.mode == Mode::case_ii ||
                             cfg.mode == Mode::case_iii;
  for (int a = 0; a < naxes; ++a) {
    const bool is_marginal_axis = marginal_mode || (cfg.mode == Mode::general && a >= 4);
    axes.push_back(explorer_detail::make_axis(cfg.resolution, is_marginal_axis, range(a)));
  }

  const bool isotropic = cfg.mode == Mode::isotropic;
  explorer_detail::CaseBox fixed{};
  if (marginal_mode) fixed = explorer_detail::case_box(cfg.mode);

  auto scan_chunk = [&](int c, ScanAggregate& agg, std::vector<ScanPoint>* rows) {
    auto emit = [&](const ScanPoint& pt) {
      agg.update(pt);
      if (rows && pt.quantum) rows->push_back(pt);
    };
    switch (cfg.mode) {
      case Mode::symmetric:
      case Mode::isotropic: {
        const double p00 = axes[0][c];
        for (double p01 : axes[1])
          for (double p10 : axes[2])
            for (double p11 : axes[3]) {
              if (isotropic && std::abs((p00 + p10) - (p01 + p11)) > 1e-12) continue;
              emit(evaluate_point_2x2(p00, p01, p10, p11, 0.5, 0.5));
            }
        break;
      }
      case Mode::case_i:
      case Mode::case_ii:
      case Mode::case_iii: {
        const double q0 = axes[0][c];
        for (double q1 : axes[1])
          emit(evaluate_point_2x2(fixed.p00, fixed.p01, fixed.p10, fixed.p11, q0, q1));
        break;
      }
      case Mode::general: {
        const double p00 = axes[0][c];
        for (double p01 : axes[1])
          for (double p10 : axes[2])
            for (double p11 : axes[3])
              for (double q0 : axes[4])
                for (double q1 : axes[5]) emit(evaluate_point_2x2(p00, p01, p10, p11, q0, q1));
        break;
      }
    }
  };

  const int nchunks = static_cast<int>(axes[0].size());
  ScanAggregate total = std::move(seed);
  int threads = cfg.threads == 0
                    ? static_cast<int>(std::max(1u, std::thread::hardware_concurrency()))
                    : cfg.threads;
  if (sink) threads = 1;

  long long since_checkpoint = 0;
  for (int base = cfg.start_chunk; base < nchunks; base += threads) {
    const int batch = std::min(threads, nchunks - base);
    std::vector<ScanAggregate> parts(batch);
    std::vector<std::vector<ScanPoint>> rows(sink ? batch : 0);
    if (batch == 1) {
      scan_chunk(base, parts[0], sink ? &rows[0] : nullptr);
    } else {
      std::vector<std::thread> pool;
      for (int t = 0; t < batch; ++t)
        pool.emplace_back([&, t] { scan_chunk(base + t, parts[t], sink ? &rows[t] : nullptr); });
      for (auto& th : pool) th.join();
    }
    for (int t = 0; t < batch; ++t) {
      since_checkpoint += parts[t].total_points;
      total.merge(parts[t]);
      if (sink)
        for (const auto& pt : rows[t]) sink(pt);
    }
    if (checkpoint && since_checkpoint >= cfg.checkpoint_interval) {
      checkpoint(base + batch, total);
      since_checkpoint = 0;
    }
  }
  return total;
}

}  // namespace icbound
