// Shannon quantities for the protocol: entropy, mutual information, the
// total information gain of a scheme, noise parameters, the closed form for
// unbiased channels, signal-decay bounds and the second-derivative analysis
// of the gain as a function of one box probability.
//
// Everything user-visible is in bits. The one exception is the analytic
// derivative of the unbiased gain, which is returned in natural-log units
// per digit (see gain_derivative_unbiased).
#pragma once

#include "icbound/core.hpp"
#include "icbound/nsbox.hpp"
#include "icbound/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace icbound {

// Row-stochastic conditional probability matrix Pr(out | in).
class ChannelMatrix {
 public:
  explicit ChannelMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {
    require(m_.rows() >= 1 && m_.cols() >= 1, "ChannelMatrix: empty");
    for (Eigen::Index r = 0; r < m_.rows(); ++r) {
      require(std::abs(m_.row(r).sum() - 1.0) <= tol::normalization,
              "ChannelMatrix: row not normalized");
      require(m_.row(r).minCoeff() >= -tol::entropy_zero, "ChannelMatrix: negative entry");
    }
  }

  Eigen::Index inputs() const { return m_.rows(); }
  Eigen::Index outputs() const { return m_.cols(); }
  const Eigen::MatrixXd& matrix() const { return m_; }

  // Cascade this (X -> Y) with next (Y -> Z).
  ChannelMatrix compose(const ChannelMatrix& next) const {
    require(outputs() == next.inputs(), "ChannelMatrix: cascade size mismatch");
    return ChannelMatrix(m_ * next.matrix());
  }

  // d-ary symmetric channel with diagonal ((d-1)xi + 1)/d.
  static ChannelMatrix symmetric(int d, double xi) {
    require(d >= 2, "ChannelMatrix::symmetric: d >= 2");
    require(xi >= -1.0 / (d - 1) - tol::entropy_zero && xi <= 1.0 + tol::entropy_zero,
            "ChannelMatrix::symmetric: xi out of range");
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(d, d, (1.0 - xi) / d);
    for (int i = 0; i < d; ++i) m(i, i) = ((d - 1) * xi + 1.0) / d;
    return ChannelMatrix(m);
  }

 private:
  Eigen::MatrixXd m_;
};

inline double shannon_entropy(const Eigen::VectorXd& p) {
  require(is_probability_vector(p), "shannon_entropy: not a probability vector");
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) h -= xlog2x(p[i]);
  return h;
}

// I(X;Z) = H(Z) - sum_i Pr(X=i) H(Z|X=i), in bits.
inline double mutual_information(const Eigen::VectorXd& px, const ChannelMatrix& ch) {
  require(px.size() == ch.inputs(), "mutual_information: dimension mismatch");
  require(is_probability_vector(px), "mutual_information: px not a probability vector");
  Eigen::VectorXd pz = ch.matrix().transpose() * px;
  double value = 0.0;
  for (Eigen::Index i = 0; i < pz.size(); ++i) value -= xlog2x(pz[i]);
  for (Eigen::Index r = 0; r < px.size(); ++r) {
    if (px[r] < tol::entropy_zero) continue;
    double hrow = 0.0;
    for (Eigen::Index c = 0; c < ch.outputs(); ++c) hrow -= xlog2x(ch.matrix()(r, c));
    value -= px[r] * hrow;
  }
  return std::max(value, 0.0);
}

struct GainReport {
  std::vector<double> per_setting;  // I(a_i; beta | b = i)
  double total = 0.0;
  double bound = 0.0;               // log2 d
  bool satisfied = true;            // total <= bound + tol
};

inline GainReport information_gain(const NsBox& box, const RacScheme& scheme) {
  require(box.d() == scheme.d() && box.k() == scheme.k(),
          "information_gain: scenario mismatch");
  GainReport rep;
  rep.bound = std::log2(static_cast<double>(scheme.d()));
  for (int i = 0; i < scheme.k(); ++i) {
    GuessChannel ch = guess_channel(box, scheme, i);
    double gi = mutual_information(scheme.marginals(i), ChannelMatrix(ch.matrix));
    rep.per_setting.push_back(gi);
    rep.total += gi;
  }
  rep.satisfied = rep.total <= rep.bound + tol::ic_flag;
  return rep;
}

// xi_y = (d sum_x Pr(x) Pr(B - A = x.y | x, y) - 1) / (d - 1).
inline double noise_parameter(const NsBox& box, const RacScheme& scheme, int y) {
  require(box.d() == scheme.d() && box.k() == scheme.k(),
          "noise_parameter: scenario mismatch");
  require(y >= 0 && y < scheme.k(), "noise_parameter: setting out of range");
  const Eigen::VectorXd px = scheme.setting_distribution();
  double avg = 0.0;
  for (long long x = 0; x < box.alice_settings(); ++x)
    avg += px[x] * box.success_probability(x, y);
  return (scheme.d() * avg - 1.0) / (scheme.d() - 1);
}

// Information gain of k identical d-ary symmetric guess channels with noise
// parameter xi and uniform inputs, in bits. The wrong-symbol coefficient is
// the row-stochastic one, 1 - p_c = (d-1)(1-xi)/d.
inline double gain_unbiased(int d, int k, double xi) {
  require(d >= 2 && k >= 1, "gain_unbiased: bad scenario");
  require(xi >= -tol::entropy_zero && xi <= 1.0 + tol::entropy_zero,
          "gain_unbiased: xi out of [0,1]");
  xi = std::clamp(xi, 0.0, 1.0);
  const double pc = ((d - 1) * xi + 1.0) / d;
  const double wrong = (1.0 - xi) / d;
  double per_digit = std::log2(static_cast<double>(d)) + xlog2x(pc);
  if (1.0 - pc > tol::entropy_zero) per_digit += (1.0 - pc) * std::log2(wrong);
  return k * std::max(per_digit, 0.0);
}

// d(per-digit gain)/d(xi) in natural-log units. Diverges at xi = 1.
inline double gain_derivative_unbiased(int d, double xi) {
  require(d >= 2, "gain_derivative_unbiased: bad d");
  if (xi <= 0.0 || xi >= 1.0)
    throw singular_input("gain_derivative_unbiased: xi must lie in (0,1)");
  return (d - 1.0) / d * std::log(((d - 1) * xi + 1.0) / (1.0 - xi));
}

// Upper bound on I(X;Z)/I(X;Y) for a cascade whose second stage is the
// d-ary symmetric channel with diagonal ((d-1)xi + 1)/d.
inline double signal_decay_bound(int /*d*/, double xi) { return xi * xi; }

namespace detail {
inline double relative_entropy_bits(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] < tol::entropy_zero) continue;
    s += p[i] * std::log2(p[i] / q[i]);
  }
  return s;
}
}  // namespace detail

// Numerical supremum of I(X;Z)/I(X;Y) in the weak-signal regime, where the
// ratio collapses to D((p + eps v) A || p A) / D(p + eps v || p) and no
// longer depends on Pr(X). The average distribution p is the symmetric
// channel's capacity-achieving (uniform) input, the regime in which the
// decay bound xi^2 is stated; the perturbation direction v runs over a grid
// of zero-sum vectors and the epsilon sequence {1e-2, 1e-3, 1e-4} is
// extrapolated linearly to zero. For d = 2 the average is additionally
// scanned over the (0,1) grid; the binary ratio is maximal at the uniform
// point, so this only corroborates the supremum.
inline double signal_decay_ratio_sup(int d, double xi, int grid) {
  require(d >= 2, "signal_decay_ratio_sup: bad d");
  require(grid >= 2, "signal_decay_ratio_sup: degenerate grid");
  require(xi > 0.0 && xi <= 1.0, "signal_decay_ratio_sup: xi out of (0,1]");
  const Eigen::MatrixXd A = ChannelMatrix::symmetric(d, xi).matrix();

  // Zero-sum perturbation directions: digit swaps, one-against-rest, and a
  // grid of integer-weight combinations.
  std::vector<Eigen::VectorXd> dirs;
  auto push_dir = [&](Eigen::VectorXd v) {
    const double n = v.norm();
    if (n > 1e-12) dirs.push_back(v / n);
  };
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
      v[i] = 1.0;
      v[j] = -1.0;
      push_dir(v);
    }
  if (d > 2) {
    for (int i = 0; i < d; ++i) {
      Eigen::VectorXd v = Eigen::VectorXd::Constant(d, -1.0 / (d - 1));
      v[i] = 1.0;
      push_dir(v);
    }
    // Coarse integer grid of further zero-sum directions.
    const int w = std::min(grid, 4);
    std::vector<int> comp(d, 0);
    auto rec = [&](auto&& self, int pos) -> void {
      if (pos == d) {
        long long s = 0;
        for (int c : comp) s += c;
        if (s != 0) return;
        Eigen::VectorXd v(d);
        for (int i = 0; i < d; ++i) v[i] = comp[i];
        push_dir(v);
        return;
      }
      for (int c = -w; c <= w; ++c) {
        comp[pos] = c;
        self(self, pos + 1);
      }
    };
    rec(rec, 0);
  }

  const std::vector<double> eps_seq = {1e-2, 1e-3, 1e-4};
  double sup = 0.0;
  auto ratio_at = [&](const Eigen::VectorXd& p) {
    for (const auto& v : dirs) {
      double max_step = 1e30;
      for (int i = 0; i < d; ++i)
        if (v[i] < 0.0) max_step = std::min(max_step, -p[i] / v[i]);
      std::vector<double> r(eps_seq.size());
      bool ok = true;
      for (size_t e = 0; e < eps_seq.size(); ++e) {
        double eps = eps_seq[e] * std::min(1.0, 0.5 * max_step);
        if (eps <= 0.0) {
          ok = false;
          break;
        }
        Eigen::VectorXd pp = p + eps * v;
        double denom = detail::relative_entropy_bits(pp, p);
        if (denom <= 0.0) {
          ok = false;
          break;
        }
        r[e] = detail::relative_entropy_bits(A.transpose() * pp, A.transpose() * p) / denom;
      }
      if (!ok) continue;
      // r(eps) -> r0 + c eps; extrapolate from the two smallest epsilons.
      const double e1 = eps_seq[eps_seq.size() - 2], e2 = eps_seq.back();
      double r0 = r.back() + (r.back() - r[r.size() - 2]) * e2 / (e1 - e2);
      sup = std::max(sup, r0);
    }
  };

  ratio_at(Eigen::VectorXd::Constant(d, 1.0 / d));
  if (d == 2)
    for (int i = 1; i < grid; ++i) {
      Eigen::VectorXd p(2);
      p[0] = static_cast<double>(i) / grid;
      p[1] = 1.0 - p[0];
      ratio_at(p);
    }
  return sup;
}

// Analytic second derivative of the information gain with respect to
// V = Pr(B - A = 0 | x = 0, y = 0), holding the other independent box
// probabilities fixed; the eliminated difference outcome d-1 absorbs the
// variation. Only the b = 0 term of the gain depends on V.
inline double hessian_d2I(const NsBox& box, const RacScheme& scheme) {
  require(box.d() == scheme.d() && box.k() == scheme.k(), "hessian_d2I: scenario mismatch");
  const int d = scheme.d(), k = scheme.k();

  GuessChannel ch = guess_channel(box, scheme, 0);
  Eigen::MatrixXd pjn(d, d);  // Pr(a_0 = j, beta = n | b = 0)
  for (int j = 0; j < d; ++j)
    for (int n = 0; n < d; ++n) pjn(j, n) = scheme.marginal(0, j) * ch.matrix(j, n);
  Eigen::VectorXd pn = pjn.colwise().sum();

  // P_j = prod_m Pr(a_m = j): weight of the all-equal database.
  Eigen::VectorXd pall(d);
  for (int j = 0; j < d; ++j) {
    double w = 1.0;
    for (int m = 0; m < k; ++m) w *= scheme.marginal(m, j);
    pall[j] = w;
  }

  auto dpjn = [&](int j, int n) -> double {
    const int diff = mod_pos(n - j, d);
    if (diff == 0) return pall[j];
    if (diff == d - 1) return -pall[j];
    return 0.0;
  };

  double sum = 0.0;
  for (int n = 0; n < d; ++n) {
    const double dpn = pall[n] - pall[mod_pos(n + 1, d)];
    for (int j = 0; j < d; ++j) {
      const double dj = dpjn(j, n);
      if (dj == 0.0 && dpn == 0.0) continue;
      if (pjn(j, n) < 1e-12 || pn[n] < 1e-12)
        throw singular_input("hessian_d2I: probability on the simplex boundary");
      sum += dj * dj / pjn(j, n) - 2.0 * dj * dpn / pn[n] +
             dpn * dpn * pjn(j, n) / (pn[n] * pn[n]);
    }
  }
  return sum / std::log(2.0);
}

}  // namespace icbound
