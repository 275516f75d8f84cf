// RAC encoding and decoding, the database description (levels, size, input
// marginals), and the per-setting guess channel Pr(beta | a_i, b = i)
// induced by a box together with the input marginals.
#pragma once

#include "icbound/core.hpp"
#include "icbound/nsbox.hpp"

#include <vector>

namespace icbound {

// A base-d digit. All arithmetic is modulo d and results are normalized
// into [0, d) immediately; negative residues are never stored.
struct Dit {
  int value = 0;
  int modulus = 2;

  Dit() = default;
  Dit(int v, int d) : value(mod_pos(v, d)), modulus(d) {
    require(d >= 2, "Dit: modulus must be >= 2");
  }

  Dit operator-(const Dit& o) const {
    require(modulus == o.modulus, "Dit: modulus mismatch");
    return Dit(value - o.value, modulus);
  }
  Dit operator+(const Dit& o) const {
    require(modulus == o.modulus, "Dit: modulus mismatch");
    return Dit(value + o.value, modulus);
  }
  bool operator==(const Dit& o) const = default;
};

// Protocol parameters: d levels, a database of k dits, and one marginal
// probability vector per database position. Positions are independent, so
// identical marginals recover the i.i.d. setting.
class RacScheme {
 public:
  RacScheme(int d, int k, std::vector<Eigen::VectorXd> marginals)
      : d_(d), k_(k), marginals_(std::move(marginals)) {
    require(d >= 2 && k >= 2, "RacScheme: need d >= 2 and k >= 2");
    require(static_cast<int>(marginals_.size()) == k, "RacScheme: need one marginal per position");
    for (const auto& m : marginals_) {
      require(m.size() == d, "RacScheme: marginal length mismatch");
      require(is_probability_vector(m), "RacScheme: marginal not normalized");
    }
  }

  static RacScheme uniform(int d, int k) {
    return RacScheme(d, k, std::vector<Eigen::VectorXd>(
                               k, Eigen::VectorXd::Constant(d, 1.0 / d)));
  }

  int d() const noexcept { return d_; }
  int k() const noexcept { return k_; }
  double marginal(int i, int v) const { return marginals_[i][v]; }
  const Eigen::VectorXd& marginals(int i) const { return marginals_[i]; }

  // Distribution over Alice's settings induced by the database: the setting
  // digits are x_i = a_i - a_0, so Pr(x) sums the database products over a_0.
  Eigen::VectorXd setting_distribution() const {
    const long long nx = alice_setting_count(d_, k_);
    Eigen::VectorXd px = Eigen::VectorXd::Zero(nx);
    for (long long x = 0; x < nx; ++x) {
      auto digits = unpack_setting(x, d_, k_);
      double s = 0.0;
      for (int a0 = 0; a0 < d_; ++a0) {
        double w = marginals_[0][a0];
        for (int i = 1; i < k_; ++i) w *= marginals_[i][mod_pos(a0 + digits[i - 1], d_)];
        s += w;
      }
      px[x] = s;
    }
    return px;
  }

 private:
  int d_, k_;
  std::vector<Eigen::VectorXd> marginals_;
};

// Alice's setting string: x_i = a_i - a_0 mod d for i = 1..k-1.
inline std::vector<Dit> encode_alice(const std::vector<Dit>& a, int d, int k) {
  require(static_cast<int>(a.size()) == k, "encode_alice: database size mismatch");
  for (const auto& dit : a) require(dit.modulus == d, "encode_alice: modulus mismatch");
  std::vector<Dit> x;
  x.reserve(k - 1);
  for (int i = 1; i < k; ++i) x.push_back(a[i] - a[0]);
  return x;
}

// Bob's setting string: the zero vector for b = 0, otherwise the indicator
// of position b.
inline std::vector<Dit> encode_bob(int b, int k) {
  require(b >= 0 && b < k, "encode_bob: b out of range");
  std::vector<Dit> y(k - 1, Dit(0, 2));
  if (b > 0) y[b - 1] = Dit(1, 2);
  return y;
}

// Bob's guess: beta = B_y - alpha mod d.
inline Dit decode_guess(const Dit& box_output, const Dit& message) {
  require(box_output.modulus == message.modulus, "decode_guess: modulus mismatch");
  return box_output - message;
}

// Conditional probability table Pr(beta = n | a_i = j, b = i), d x d and
// row-stochastic.
struct GuessChannel {
  int setting = 0;              // Bob's input b = i
  Eigen::MatrixXd matrix;       // (j, n) entry

  bool rows_stochastic(double eps = tol::normalization) const {
    for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
      if (std::abs(matrix.row(r).sum() - 1.0) > eps) return false;
      if (matrix.row(r).minCoeff() < -tol::entropy_zero) return false;
    }
    return true;
  }
};

// Exact enumeration of the d^(k-1) configurations of the unfixed database
// positions, weighted by their marginals. beta = n requires the box outputs
// to differ by n - a_0 where a_0 is taken from each configuration.
inline GuessChannel guess_channel(const NsBox& box, const RacScheme& scheme, int i) {
  require(box.d() == scheme.d() && box.k() == scheme.k(),
          "guess_channel: box and scheme scenario mismatch");
  require(i >= 0 && i < scheme.k(), "guess_channel: setting index out of range");
  const int d = scheme.d(), k = scheme.k();
  GuessChannel ch;
  ch.setting = i;
  ch.matrix = Eigen::MatrixXd::Zero(d, d);

  std::vector<int> a(k, 0);
  const long long configs = alice_setting_count(d, k);  // d^(k-1)
  for (int j = 0; j < d; ++j) {
    a[i] = j;
    for (long long c = 0; c < configs; ++c) {
      long long rest = c;
      double weight = 1.0;
      for (int m = 0; m < k; ++m) {
        if (m == i) continue;
        a[m] = static_cast<int>(rest % d);
        rest /= d;
        weight *= scheme.marginal(m, a[m]);
      }
      if (weight == 0.0) continue;
      std::vector<int> digits(k - 1);
      for (int m = 1; m < k; ++m) digits[m - 1] = mod_pos(a[m] - a[0], d);
      const long long x = pack_setting(digits, d);
      for (int n = 0; n < d; ++n)
        ch.matrix(j, n) += weight * box.pr_difference(x, i, mod_pos(n - a[0], d));
    }
  }
  return ch;
}

}  // namespace icbound
