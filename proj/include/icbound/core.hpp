// Shared vocabulary for the whole library: error types, the numeric
// tolerances used by the module contracts, and a few probability helpers.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace icbound {

// An input sits on a boundary that makes a log-argument or a derivative
// blow up. Distinct from invalid_argument: the value is in-domain but the
// requested quantity does not exist there.
class singular_input : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A requested certificate exceeds the configured size budget.
class budget_error : public std::runtime_error {
 public:
  budget_error(const std::string& msg, int dim) : std::runtime_error(msg), dim_(dim) {}
  int dim() const noexcept { return dim_; }

 private:
  int dim_;
};

namespace tol {
inline constexpr double normalization = 1e-12;     // probability vectors and tables
inline constexpr double no_signaling = 1e-10;      // marginal consistency across remote settings
inline constexpr double arcsin_boundary = 1e-9;    // slack on the pi comparison
inline constexpr double correlation_clamp = 1e-12; // clamp into [-1,1] before asin
inline constexpr double gram_psd = 1e-9;           // min eigenvalue for the 4x4 Gram test
inline constexpr double chsh_local = 1e-12;        // slack on the classical value 2
inline constexpr double ic_flag = 1e-9;            // I <= log2(d) + ic_flag
inline constexpr double entropy_zero = 1e-15;      // weights below this are exactly zero
}  // namespace tol

inline int mod_pos(long long v, int d) {
  long long r = v % d;
  return static_cast<int>(r < 0 ? r + d : r);
}

// x*log2(x) with the 0*log(0) := 0 convention.
inline double xlog2x(double x) {
  return x < tol::entropy_zero ? 0.0 : x * std::log2(x);
}

inline bool is_probability_vector(const Eigen::VectorXd& p, double eps = tol::normalization) {
  if (p.size() == 0) return false;
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] < -tol::entropy_zero) return false;
    s += p[i];
  }
  return std::abs(s - 1.0) <= eps;
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace icbound
