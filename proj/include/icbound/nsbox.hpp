// No-signaling box: the bipartite conditional probability table shared by
// the two parties, its canonical constructors, and the d=2, k=2 locality /
// quantum-feasibility tests (CHSH partners, arcsin inequalities, 4x4 Gram
// completion).
#pragma once

#include "icbound/core.hpp"

#include <array>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace icbound {

// Digits of an Alice setting index, little-endian in base d: the i-th digit
// is the (i+1)-th component of the setting vector.
inline std::vector<int> unpack_setting(long long x, int d, int k) {
  std::vector<int> digits(k - 1, 0);
  for (int i = 0; i < k - 1; ++i) {
    digits[i] = static_cast<int>(x % d);
    x /= d;
  }
  return digits;
}

inline long long pack_setting(const std::vector<int>& digits, int d) {
  long long x = 0;
  for (int i = static_cast<int>(digits.size()) - 1; i >= 0; --i) x = x * d + digits[i];
  return x;
}

inline long long alice_setting_count(int d, int k) {
  long long n = 1;
  for (int i = 0; i < k - 1; ++i) n *= d;
  return n;
}

// x.y for Alice setting index x and Bob setting y: zero when y = 0 (Bob's
// all-zero vector), otherwise the y-th digit of x.
inline int setting_dot(long long x, int y, int d, int k) {
  if (y == 0) return 0;
  auto digits = unpack_setting(x, d, k);
  return digits[y - 1];
}

struct NoSignalingReport {
  double alice_marginal_dev = 0.0;  // Alice's marginal varying with Bob's setting
  double bob_marginal_dev = 0.0;    // Bob's marginal varying with Alice's setting
  bool pass = true;
};

class NsBox {
 public:
  // joint[x * k + y] is the d x d table with (A, B) entry Pr(A,B|x,y).
  NsBox(int d, int k, std::vector<Eigen::MatrixXd> joint)
      : d_(d), k_(k), joint_(std::move(joint)) {
    require(d >= 2 && k >= 2, "NsBox: need d >= 2 and k >= 2");
    const long long nx = alice_setting_count(d, k);
    require(static_cast<long long>(joint_.size()) == nx * k,
            "NsBox: joint table count mismatch");
    for (const auto& t : joint_) {
      require(t.rows() == d && t.cols() == d, "NsBox: table size mismatch");
      require(t.minCoeff() >= -tol::entropy_zero, "NsBox: negative probability");
      require(std::abs(t.sum() - 1.0) <= tol::normalization,
              "NsBox: table not normalized");
    }
  }

  int d() const noexcept { return d_; }
  int k() const noexcept { return k_; }
  long long alice_settings() const { return alice_setting_count(d_, k_); }
  int bob_settings() const noexcept { return k_; }

  double pr(long long x, int y, int A, int B) const { return joint_[x * k_ + y](A, B); }
  const Eigen::MatrixXd& table(long long x, int y) const { return joint_[x * k_ + y]; }

  // Pr(B - A = c | x, y), the difference distribution of one setting pair.
  double pr_difference(long long x, int y, int c) const {
    const auto& t = joint_[x * k_ + y];
    double s = 0.0;
    for (int A = 0; A < d_; ++A) s += t(A, mod_pos(A + c, d_));
    return s;
  }

  // Pr(B - A = x.y | x, y).
  double success_probability(long long x, int y) const {
    return pr_difference(x, y, setting_dot(x, y, d_, k_));
  }

  // Box with Pr(A,B|x,y) = r[x][y][(B-A) mod d] / d. Both single-party
  // marginals come out uniform, so no-signaling holds exactly.
  static NsBox from_difference_distributions(
      int d, int k, const std::vector<std::vector<Eigen::VectorXd>>& r) {
    const long long nx = alice_setting_count(d, k);
    require(static_cast<long long>(r.size()) == nx, "from_difference_distributions: bad x count");
    std::vector<Eigen::MatrixXd> joint(nx * k);
    for (long long x = 0; x < nx; ++x) {
      require(static_cast<int>(r[x].size()) == k, "from_difference_distributions: bad y count");
      for (int y = 0; y < k; ++y) {
        const Eigen::VectorXd& rv = r[x][y];
        require(rv.size() == d, "from_difference_distributions: bad profile length");
        require(is_probability_vector(rv), "from_difference_distributions: profile not normalized");
        Eigen::MatrixXd t(d, d);
        for (int A = 0; A < d; ++A)
          for (int B = 0; B < d; ++B) t(A, B) = rv[mod_pos(B - A, d)] / d;
        joint[x * k + y] = t;
      }
    }
    return NsBox(d, k, std::move(joint));
  }

  // Box that wins with probability p(x,y): mass p spread uniformly over the
  // d pairs with B - A = x.y, the rest uniformly over the other d(d-1) pairs.
  static NsBox from_success_probs(int d, int k, const Eigen::MatrixXd& p) {
    const long long nx = alice_setting_count(d, k);
    require(p.rows() == nx && p.cols() == k, "from_success_probs: p size mismatch");
    require(p.minCoeff() >= -tol::entropy_zero && p.maxCoeff() <= 1.0 + tol::entropy_zero,
            "from_success_probs: p out of [0,1]");
    std::vector<std::vector<Eigen::VectorXd>> r(nx, std::vector<Eigen::VectorXd>(k));
    for (long long x = 0; x < nx; ++x)
      for (int y = 0; y < k; ++y) {
        Eigen::VectorXd rv = Eigen::VectorXd::Constant(d, (1.0 - p(x, y)) / (d - 1));
        rv[setting_dot(x, y, d, k)] = p(x, y);
        r[x][y] = rv;
      }
    return from_difference_distributions(d, k, r);
  }

  static NsBox noiseless(int d, int k) {
    const long long nx = alice_setting_count(d, k);
    return from_success_probs(d, k, Eigen::MatrixXd::Ones(nx, k));
  }

  static NsBox completely_random(int d, int k) {
    const long long nx = alice_setting_count(d, k);
    return from_success_probs(d, k, Eigen::MatrixXd::Constant(nx, k, 1.0 / d));
  }

 private:
  int d_, k_;
  std::vector<Eigen::MatrixXd> joint_;
};

inline NoSignalingReport check_no_signaling(const NsBox& box) {
  NoSignalingReport rep;
  const int d = box.d(), k = box.k();
  const long long nx = box.alice_settings();
  // Alice's marginal Pr(A|x) must not depend on y.
  for (long long x = 0; x < nx; ++x)
    for (int A = 0; A < d; ++A) {
      double lo = 1.0, hi = 0.0;
      for (int y = 0; y < k; ++y) {
        double m = box.table(x, y).row(A).sum();
        lo = std::min(lo, m);
        hi = std::max(hi, m);
      }
      rep.alice_marginal_dev = std::max(rep.alice_marginal_dev, hi - lo);
    }
  // Bob's marginal Pr(B|y) must not depend on x.
  for (int y = 0; y < k; ++y)
    for (int B = 0; B < d; ++B) {
      double lo = 1.0, hi = 0.0;
      for (long long x = 0; x < nx; ++x) {
        double m = box.table(x, y).col(B).sum();
        lo = std::min(lo, m);
        hi = std::max(hi, m);
      }
      rep.bob_marginal_dev = std::max(rep.bob_marginal_dev, hi - lo);
    }
  rep.pass = rep.alice_marginal_dev <= tol::no_signaling &&
             rep.bob_marginal_dev <= tol::no_signaling;
  return rep;
}

struct CorrelationQuad {
  double c00 = 0.0, c01 = 0.0, c10 = 0.0, c11 = 0.0;

  std::array<double, 4> as_array() const { return {c00, c01, c10, c11}; }
};

// C_xy = (-1)^{xy} [2 Pr(B - A = x y | x, y) - 1]; d = 2, k = 2 only.
inline CorrelationQuad correlations_2x2(const NsBox& box) {
  require(box.d() == 2 && box.k() == 2, "correlations_2x2: requires d = 2, k = 2");
  auto corr = [&](long long x, int y) {
    double sign = (x == 1 && y == 1) ? -1.0 : 1.0;
    return sign * (2.0 * box.success_probability(x, y) - 1.0);
  };
  return {corr(0, 0), corr(0, 1), corr(1, 0), corr(1, 1)};
}

// The CHSH function and its three partners obtained by moving the minus sign.
inline std::array<double, 4> chsh_values(const CorrelationQuad& q) {
  return {std::abs(q.c00 + q.c01 + q.c10 - q.c11),
          std::abs(q.c00 + q.c01 - q.c10 + q.c11),
          std::abs(q.c00 - q.c01 + q.c10 + q.c11),
          std::abs(-q.c00 + q.c01 + q.c10 + q.c11)};
}

inline bool is_local_2x2(const CorrelationQuad& q) {
  for (double v : chsh_values(q))
    if (v > 2.0 + tol::chsh_local) return false;
  return true;
}

// Necessary and sufficient test for a quantum realization of the quad with
// unbiased marginals: all four odd-sign arcsin combinations stay within pi.
inline bool is_quantum_2x2(const CorrelationQuad& q, double eps = tol::arcsin_boundary) {
  auto clamped_asin = [](double c) {
    c = std::clamp(c, -1.0 - tol::correlation_clamp, 1.0 + tol::correlation_clamp);
    return std::asin(std::clamp(c, -1.0, 1.0));
  };
  const double s00 = clamped_asin(q.c00), s01 = clamped_asin(q.c01);
  const double s10 = clamped_asin(q.c10), s11 = clamped_asin(q.c11);
  const std::array<double, 4> combos = {
      std::abs(s00 + s01 + s10 - s11), std::abs(s00 + s01 - s10 + s11),
      std::abs(s00 - s01 + s10 + s11), std::abs(-s00 + s01 + s10 + s11)};
  for (double v : combos)
    if (v > std::numbers::pi + eps) return false;
  return true;
}

// The 4x4 Gram matrix of (a0, a1, b0, b1) with the given diagonal-block
// overlaps; positive semidefiniteness witnesses a quantum realization.
inline Eigen::Matrix4d gram_matrix_2x2(const CorrelationQuad& q, double theta1, double theta2) {
  Eigen::Matrix4d g;
  g << 1.0, theta1, q.c00, q.c01,
       theta1, 1.0, q.c10, q.c11,
       q.c00, q.c10, 1.0, theta2,
       q.c01, q.c11, theta2, 1.0;
  return g;
}

inline bool gram_check_2x2(const CorrelationQuad& q, double theta1, double theta2,
                           double eps = tol::gram_psd) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(gram_matrix_2x2(q, theta1, theta2),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -eps;
}

// Best achievable minimum eigenvalue over the two free overlaps, by a
// deterministic coarse grid over [-1,1]^2 with shrinking refinement around
// the incumbent. lambda_min is concave in (theta1, theta2) but kinked, so
// plain coordinate ascent is unreliable; the nested grid is robust.
inline double gram_completion_eig_2x2(const CorrelationQuad& q) {
  auto eig = [&](double t1, double t2) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(gram_matrix_2x2(q, t1, t2),
                                                      Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  };
  double c1 = 0.0, c2 = 0.0, half = 1.0;
  double best = eig(c1, c2);
  for (int round = 0; round < 8; ++round) {
    const int n = round == 0 ? 21 : 9;
    double b1 = c1, b2 = c2;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double t1 = std::clamp(c1 - half + 2.0 * half * i / (n - 1), -1.0, 1.0);
        const double t2 = std::clamp(c2 - half + 2.0 * half * j / (n - 1), -1.0, 1.0);
        const double v = eig(t1, t2);
        if (v > best) {
          best = v;
          b1 = t1;
          b2 = t2;
        }
      }
    c1 = b1;
    c2 = b2;
    half *= 0.25;
  }
  return best;
}

}  // namespace icbound
