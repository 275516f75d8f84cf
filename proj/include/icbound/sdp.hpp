// Dense semidefinite programming in the standard primal form
//
//   min/max  Tr(C^T X)
//   s.t.     Tr(D_q^T X) = b_q          q = 1..m
//            Tr(H_w^T X) >= 0           w = 1..s
//            X  positive semidefinite,
//
// solved by an infeasible primal-dual path-following interior-point method
// with the HKM search direction. Inequality rows are lifted into the cone
// through a diagonal slack block, so the iterates live on a block cone
// (one dense PSD block plus a nonnegative diagonal block). Newton systems
// go through a dense Cholesky factorization of the Schur complement.
//
// Sized for moment matrices up to a few hundred rows and a few thousand
// constraints. Deterministic: no randomness, fixed evaluation order.
#pragma once

#include "icbound/core.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

namespace icbound {

enum class SdpSense { minimize, maximize };
enum class SdpStatus { optimal, infeasible, max_iter, numerical_failure };

inline const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::optimal: return "optimal";
    case SdpStatus::infeasible: return "infeasible";
    case SdpStatus::max_iter: return "max_iter";
    case SdpStatus::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

// Sparse symmetric matrix: entries on the upper triangle (i <= j), each
// standing for the value at (i,j) and (j,i).
struct SparseSym {
  struct Entry {
    int i, j;
    double v;
  };
  std::vector<Entry> entries;

  void add(int i, int j, double v) {
    if (v == 0.0) return;
    if (i > j) std::swap(i, j);
    entries.push_back({i, j, v});
  }

  double inner(const Eigen::MatrixXd& x) const {
    double s = 0.0;
    for (const auto& e : entries) s += (e.i == e.j ? 1.0 : 2.0) * e.v * x(e.i, e.j);
    return s;
  }

  void add_to(Eigen::MatrixXd& x, double scale) const {
    for (const auto& e : entries) {
      x(e.i, e.j) += scale * e.v;
      if (e.i != e.j) x(e.j, e.i) += scale * e.v;
    }
  }

  double frobenius() const {
    double s = 0.0;
    for (const auto& e : entries) s += (e.i == e.j ? 1.0 : 2.0) * e.v * e.v;
    return std::sqrt(s);
  }

  static SparseSym from_dense(const Eigen::MatrixXd& m, double prune = 0.0) {
    SparseSym a;
    for (int i = 0; i < m.rows(); ++i)
      for (int j = i; j < m.cols(); ++j)
        if (std::abs(m(i, j)) > prune) a.add(i, j, m(i, j));
    return a;
  }
};

struct SdpProblem {
  int n = 0;
  SdpSense sense = SdpSense::minimize;
  Eigen::MatrixXd C;
  std::vector<SparseSym> eq_mats;
  std::vector<double> eq_rhs;
  std::vector<SparseSym> ineq_mats;

  SdpProblem() : n(1), C(Eigen::MatrixXd::Zero(1, 1)) {}
  explicit SdpProblem(int dim, SdpSense s = SdpSense::minimize)
      : n(dim), sense(s), C(Eigen::MatrixXd::Zero(dim, dim)) {
    require(dim >= 1, "SdpProblem: n >= 1");
  }

  void set_objective(const Eigen::MatrixXd& obj) {
    require(obj.rows() == n && obj.cols() == n, "SdpProblem: objective size mismatch");
    require((obj - obj.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + obj.cwiseAbs().maxCoeff()),
            "SdpProblem: objective not symmetric");
    C = 0.5 * (obj + obj.transpose());
  }

  void add_equality(SparseSym a, double rhs) {
    eq_mats.push_back(std::move(a));
    eq_rhs.push_back(rhs);
  }
  void add_equality(const Eigen::MatrixXd& a, double rhs) {
    require(a.rows() == n && a.cols() == n, "SdpProblem: constraint size mismatch");
    require((a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + a.cwiseAbs().maxCoeff()),
            "SdpProblem: constraint not symmetric");
    add_equality(SparseSym::from_dense(0.5 * (a + a.transpose())), rhs);
  }
  void add_inequality(SparseSym h) { ineq_mats.push_back(std::move(h)); }
  void add_inequality(const Eigen::MatrixXd& h) {
    require(h.rows() == n && h.cols() == n, "SdpProblem: constraint size mismatch");
    add_inequality(SparseSym::from_dense(0.5 * (h + h.transpose())));
  }
};

struct SdpOptions {
  double tol = 1e-7;        // relative duality gap and feasibility target
  int max_iter = 200;
  double step_frac = 0.98;  // fraction-to-boundary factor
  bool mehrotra = false;    // predictor-corrector (off: plain path following)
  int threads = 1;          // Schur-complement assembly threads
  int dependency_check_limit = 600;  // run the equality-consistency check up to this m
};

// Dual quantities (y, ineq_y, S) are reported in the internal minimization
// convention: S = C' - sum_q y_q D_q - sum_w z_w H_w >= 0 with C' = C for a
// minimization and C' = -C for a maximization. Objective values are in the
// user's sense.
struct SdpSolution {
  SdpStatus status = SdpStatus::numerical_failure;
  Eigen::MatrixXd X;        // primal PSD block
  Eigen::MatrixXd S;        // dual slack on the PSD block (PSD at optimum)
  Eigen::VectorXd y;        // equality multipliers
  Eigen::VectorXd ineq_y;   // inequality multipliers (nonnegative at optimum)
  Eigen::VectorXd ineq_slack;  // Tr(H_w^T X)
  double primal_obj = 0.0;  // in the user's sense
  double dual_obj = 0.0;
  double rel_gap = 1.0;
  double primal_res = 1.0;
  double dual_res = 1.0;
  int iterations = 0;
  std::string message;
};

// Residuals recomputed from raw problem data, independent of the solver
// internals.
struct CertificateReport {
  double eq_residual = 0.0;    // max |Tr(D_q X) - b_q|
  double ineq_violation = 0.0; // max(0, -min_w Tr(H_w X))
  double x_min_eig = 0.0;
  double s_min_eig = 0.0;      // dual slack C - sum y D - sum z H (min-sense)
  double ineq_dual_min = 0.0;  // most negative inequality multiplier
  double gap_abs = 0.0;        // |primal - dual| objective

  bool ok(double tol) const {
    return eq_residual <= tol && ineq_violation <= tol && x_min_eig >= -tol &&
           s_min_eig >= -tol && ineq_dual_min >= -tol && gap_abs <= tol * 10.0;
  }
};

namespace sdp_detail {

struct FullEntry {
  int i, j;
  double v;
};

// Entry list with the mirror images materialized, for trace formulas that
// are not symmetric in the two indices.
inline std::vector<FullEntry> expand(const SparseSym& a) {
  std::vector<FullEntry> f;
  f.reserve(a.entries.size() * 2);
  for (const auto& e : a.entries) {
    f.push_back({e.i, e.j, e.v});
    if (e.i != e.j) f.push_back({e.j, e.i, e.v});
  }
  return f;
}

// One constraint of the lifted problem: a sparse symmetric matrix on the
// PSD block plus one optional diagonal entry on the slack block.
struct LiftedRow {
  std::vector<FullEntry> full;  // PSD-block entries, mirrors included
  int slack_index = -1;
  double slack_coeff = 0.0;
  double rhs = 0.0;
};

inline double block_inner(const LiftedRow& row, const Eigen::MatrixXd& xb,
                          const Eigen::VectorXd& xd) {
  double s = 0.0;
  for (const auto& e : row.full) s += e.v * xb(e.i, e.j);
  if (row.slack_index >= 0) s += row.slack_coeff * xd[row.slack_index];
  return s;
}

}  // namespace sdp_detail

class SdpSolver {
 public:
  SdpSolver(const SdpProblem& problem, SdpOptions options = {})
      : p_(problem), opt_(options) {}

  SdpSolution solve() {
    using namespace sdp_detail;
    const int n = p_.n;
    const int ns = static_cast<int>(p_.ineq_mats.size());
    const int meq = static_cast<int>(p_.eq_mats.size());
    const int m = meq + ns;
    require(m >= 1, "SdpSolver: need at least one constraint");

    // Internal sense: minimize.
    const double sense_sign = p_.sense == SdpSense::maximize ? -1.0 : 1.0;
    Eigen::MatrixXd Cb = sense_sign * p_.C;

    rows_.clear();
    rows_.reserve(m);
    for (int q = 0; q < meq; ++q) {
      LiftedRow r;
      r.full = expand(p_.eq_mats[q]);
      r.rhs = p_.eq_rhs[q];
      rows_.push_back(std::move(r));
    }
    for (int w = 0; w < ns; ++w) {
      LiftedRow r;
      r.full = expand(p_.ineq_mats[w]);
      r.slack_index = w;
      r.slack_coeff = -1.0;
      r.rhs = 0.0;
      rows_.push_back(std::move(r));
    }

    SdpSolution sol;
    if (meq >= 1 && meq <= opt_.dependency_check_limit) {
      if (!consistent_equalities(sol)) return sol;  // status filled in
    }

    double bmax = 1.0;
    for (const auto& r : rows_) bmax = std::max(bmax, std::abs(r.rhs));
    const double cmax = std::max(1.0, Cb.cwiseAbs().maxCoeff());

    Eigen::MatrixXd X = Eigen::MatrixXd::Identity(n, n) * (10.0 * bmax);
    Eigen::VectorXd xd = Eigen::VectorXd::Constant(std::max(ns, 1), 10.0 * bmax);
    Eigen::MatrixXd S = Eigen::MatrixXd::Identity(n, n) * (10.0 * cmax);
    Eigen::VectorXd sd = Eigen::VectorXd::Constant(std::max(ns, 1), 10.0 * cmax);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(m);

    const double nu = n + ns;
    const double x0_trace = X.trace() + (ns ? xd.head(ns).sum() : 0.0);
    double alpha_prev = 1.0;

    Eigen::MatrixXd M(m, m), Sinv(n, n), Rd(n, n), DX(n, n), DS(n, n), K(n, n), W2(n, n);
    Eigen::VectorXd rp(m), rhs(m), rd_d(ns), dxd(ns), dsd(ns), kd(ns), dy(m);

    for (int iter = 1; iter <= opt_.max_iter; ++iter) {
      // Residuals.
      for (int q = 0; q < m; ++q) rp[q] = rows_[q].rhs - block_inner(rows_[q], X, xd);
      Rd = Cb - S;
      rd_d.setZero();
      for (int q = 0; q < m; ++q) {
        const auto& r = rows_[q];
        for (const auto& e : r.full) Rd(e.i, e.j) -= y[q] * e.v;
        if (r.slack_index >= 0) rd_d[r.slack_index] -= y[q] * r.slack_coeff;
      }
      for (int w = 0; w < ns; ++w) rd_d[w] -= sd[w];

      const double mu = (X.cwiseProduct(S).sum() + (ns ? xd.head(ns).dot(sd.head(ns)) : 0.0)) / nu;
      const double pobj = Cb.cwiseProduct(X).sum();
      double dobj = 0.0;
      for (int q = 0; q < m; ++q) dobj += rows_[q].rhs * y[q];

      const double relgap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
      const double pres = rp.cwiseAbs().maxCoeff() / (1.0 + bmax);
      double dres = Rd.cwiseAbs().maxCoeff();
      if (ns) dres = std::max(dres, rd_d.cwiseAbs().maxCoeff());
      dres /= (1.0 + cmax);

      if (iteration_callback) {
        const double inner_xs = X.cwiseProduct(S).sum() +
                                (ns ? xd.head(ns).dot(sd.head(ns)) : 0.0);
        double rd_x = Rd.cwiseProduct(X).sum();
        for (int w = 0; w < ns; ++w) rd_x += rd_d[w] * xd[w];
        const double rp_y = rp.dot(y);
        iteration_callback({iter, mu, pobj * sense_sign, dobj * sense_sign, pres, dres,
                            pobj - dobj, inner_xs, rd_x, rp_y, X, S, y});
      }

      if (relgap <= opt_.tol && pres <= opt_.tol && dres <= opt_.tol) {
        fill_solution(sol, SdpStatus::optimal, X, S, y, xd, sd, pobj, dobj, relgap, pres, dres,
                      iter, sense_sign, meq, ns, "converged");
        return sol;
      }
      const double cur_trace = X.trace() + (ns ? xd.head(ns).sum() : 0.0);
      if (cur_trace > 1e8 * x0_trace && pres > 100.0 * opt_.tol) {
        fill_solution(sol, SdpStatus::infeasible, X, S, y, xd, sd, pobj, dobj, relgap, pres, dres,
                      iter, sense_sign, meq, ns, "primal iterate diverged with residual bounded away from zero");
        return sol;
      }

      // Factor S and X.
      Eigen::LLT<Eigen::MatrixXd> sllt(S);
      Eigen::LLT<Eigen::MatrixXd> xllt(X);
      if (sllt.info() != Eigen::Success || xllt.info() != Eigen::Success) {
        fill_solution(sol, SdpStatus::numerical_failure, X, S, y, xd, sd, pobj, dobj, relgap,
                      pres, dres, iter, sense_sign, meq, ns, "iterate left the cone");
        return sol;
      }
      Sinv = sllt.solve(Eigen::MatrixXd::Identity(n, n));

      assemble_schur(M, X, Sinv, xd, sd, ns);

      // Deterministic centering schedule; Mehrotra correction optional.
      double sigma = alpha_prev > 0.8 ? 0.15 : (alpha_prev < 0.3 ? 0.7 : 0.3);

      double alpha_p = 0.0, alpha_d = 0.0;
      bool ok = true;
      if (!opt_.mehrotra) {
        K = sigma * mu * Sinv - X;
        for (int w = 0; w < ns; ++w) kd[w] = sigma * mu / sd[w] - xd[w];
        ok = newton_step(M, K, kd, rp, Rd, rd_d, X, Sinv, xd, sd, ns, DX, DS, dxd, dsd, dy);
      } else {
        // Predictor (sigma = 0).
        K = -X;
        for (int w = 0; w < ns; ++w) kd[w] = -xd[w];
        ok = newton_step(M, K, kd, rp, Rd, rd_d, X, Sinv, xd, sd, ns, DX, DS, dxd, dsd, dy);
        if (ok) {
          double ap = step_length(xllt, DX, xd, dxd, ns);
          double ad = step_length_dual(S, DS, sd, dsd, ns);
          double mu_aff = ((X + ap * DX).cwiseProduct(S + ad * DS).sum() +
                           (ns ? (xd.head(ns) + ap * dxd.head(ns)).dot(sd.head(ns) + ad * dsd.head(ns)) : 0.0)) / nu;
          sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3.0);
          W2 = DX * DS;
          K = sigma * mu * Sinv - X - W2 * Sinv;
          for (int w = 0; w < ns; ++w) kd[w] = sigma * mu / sd[w] - xd[w] - dxd[w] * dsd[w] / sd[w];
          ok = newton_step(M, K, kd, rp, Rd, rd_d, X, Sinv, xd, sd, ns, DX, DS, dxd, dsd, dy);
        }
      }
      if (!ok) {
        fill_solution(sol, SdpStatus::numerical_failure, X, S, y, xd, sd, pobj, dobj, relgap,
                      pres, dres, iter, sense_sign, meq, ns, "singular Schur complement");
        return sol;
      }

      alpha_p = step_length(xllt, DX, xd, dxd, ns);
      alpha_d = step_length_dual(S, DS, sd, dsd, ns);
      alpha_prev = std::min(alpha_p, alpha_d);

      X += alpha_p * DX;
      for (int w = 0; w < ns; ++w) xd[w] += alpha_p * dxd[w];
      y += alpha_d * dy;
      S += alpha_d * DS;
      for (int w = 0; w < ns; ++w) sd[w] += alpha_d * dsd[w];
    }

    // Out of iterations: report the last iterate honestly.
    for (int q = 0; q < m; ++q) rp[q] = rows_[q].rhs - block_inner(rows_[q], X, xd);
    const double pobj = Cb.cwiseProduct(X).sum();
    double dobj = 0.0;
    for (int q = 0; q < m; ++q) dobj += rows_[q].rhs * y[q];
    const double relgap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    const double pres = rp.cwiseAbs().maxCoeff() / (1.0 + bmax);
    fill_solution(sol, SdpStatus::max_iter, X, S, y, xd, sd, pobj, dobj, relgap, pres, 1.0,
                  opt_.max_iter, sense_sign, meq, ns, "iteration limit reached");
    return sol;
  }

  // Optional per-iteration observer (weak-duality instrumentation in tests).
  struct IterateInfo {
    int iter;
    double mu, primal_obj, dual_obj, primal_res, dual_res;
    double gap_internal;  // <C',X> - b.y in the internal minimize sense
    double inner_xs;      // <X,S> over all blocks (nonnegative in the cone)
    double rd_x;          // <Rd, X>
    double rp_y;          // rp . y
    const Eigen::MatrixXd& X;
    const Eigen::MatrixXd& S;
    const Eigen::VectorXd& y;
  };
  std::function<void(const IterateInfo&)> iteration_callback;

 private:
  const SdpProblem& p_;
  SdpOptions opt_;
  std::vector<sdp_detail::LiftedRow> rows_;

  // Detect linearly dependent equality rows and check rhs consistency.
  // Returns false (filling sol with status infeasible) on contradiction.
  bool consistent_equalities(SdpSolution& sol) {
    const int meq = static_cast<int>(p_.eq_mats.size());
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(meq, meq);
    for (int a = 0; a < meq; ++a)
      for (int b = a; b < meq; ++b) {
        double s = 0.0;
        for (const auto& ea : p_.eq_mats[a].entries)
          for (const auto& eb : p_.eq_mats[b].entries)
            if (ea.i == eb.i && ea.j == eb.j) s += (ea.i == ea.j ? 1.0 : 2.0) * ea.v * eb.v;
        G(a, b) = G(b, a) = s;
      }
    // Greedy pivoted Cholesky to split rows into independent / dependent.
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(meq, meq);
    std::vector<int> basis;
    std::vector<int> dependent;
    Eigen::VectorXd diag = G.diagonal();
    const double thresh = 1e-12 * std::max(1.0, diag.maxCoeff());
    Eigen::MatrixXd Gwork = G;
    for (int q = 0; q < meq; ++q) {
      double pivot = Gwork(q, q);
      for (int b = 0; b < static_cast<int>(basis.size()); ++b) pivot -= L(q, b) * L(q, b);
      if (pivot <= thresh) {
        dependent.push_back(q);
        continue;
      }
      const int col = static_cast<int>(basis.size());
      L(q, col) = std::sqrt(pivot);
      for (int r = q + 1; r < meq; ++r) {
        double v = Gwork(r, q);
        for (int b = 0; b < col; ++b) v -= L(r, b) * L(q, b);
        L(r, col) = v / L(q, col);
      }
      basis.push_back(q);
    }
    if (dependent.empty()) return true;
    // Express each dependent row over the basis and compare right-hand sides.
    const int nb = static_cast<int>(basis.size());
    Eigen::MatrixXd Gb(nb, nb);
    for (int a = 0; a < nb; ++a)
      for (int b = 0; b < nb; ++b) Gb(a, b) = G(basis[a], basis[b]);
    Eigen::LDLT<Eigen::MatrixXd> gb(Gb);
    for (int dq : dependent) {
      Eigen::VectorXd rhs(nb);
      for (int a = 0; a < nb; ++a) rhs[a] = G(basis[a], dq);
      Eigen::VectorXd lam = gb.solve(rhs);
      double implied = 0.0;
      for (int a = 0; a < nb; ++a) implied += lam[a] * p_.eq_rhs[basis[a]];
      if (std::abs(implied - p_.eq_rhs[dq]) > 1e-8 * (1.0 + std::abs(p_.eq_rhs[dq]))) {
        sol.status = SdpStatus::infeasible;
        sol.message = "equality constraints are inconsistent";
        return false;
      }
    }
    return true;
  }

  void assemble_schur(Eigen::MatrixXd& M, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Sinv,
                      const Eigen::VectorXd& xd, const Eigen::VectorXd& sd, int ns) {
    const int m = static_cast<int>(rows_.size());
    auto fill_row = [&](int q) {
      const auto& rq = rows_[q];
      for (int r = q; r < m; ++r) {
        const auto& rr = rows_[r];
        double s = 0.0;
        for (const auto& ea : rq.full)
          for (const auto& eb : rr.full) s += ea.v * eb.v * X(ea.j, eb.i) * Sinv(eb.j, ea.i);
        if (rq.slack_index >= 0 && rq.slack_index == rr.slack_index)
          s += rq.slack_coeff * rr.slack_coeff * xd[rq.slack_index] / sd[rq.slack_index];
        M(q, r) = M(r, q) = s;
      }
    };
    if (opt_.threads <= 1) {
      for (int q = 0; q < m; ++q) fill_row(q);
    } else {
      std::vector<std::thread> pool;
      std::atomic<int> next{0};
      for (int t = 0; t < opt_.threads; ++t)
        pool.emplace_back([&] {
          for (int q = next.fetch_add(1); q < m; q = next.fetch_add(1)) fill_row(q);
        });
      for (auto& th : pool) th.join();
    }
    (void)ns;
  }

  bool newton_step(Eigen::MatrixXd& M, const Eigen::MatrixXd& K, const Eigen::VectorXd& kd,
                   const Eigen::VectorXd& rp, const Eigen::MatrixXd& Rd, const Eigen::VectorXd& rd_d,
                   const Eigen::MatrixXd& X, const Eigen::MatrixXd& Sinv, const Eigen::VectorXd& xd,
                   const Eigen::VectorXd& sd, int ns, Eigen::MatrixXd& DX, Eigen::MatrixXd& DS,
                   Eigen::VectorXd& dxd, Eigen::VectorXd& dsd, Eigen::VectorXd& dy) {
    using namespace sdp_detail;
    const int m = static_cast<int>(rows_.size());
    Eigen::MatrixXd W = X * Rd * Sinv;  // appears in every right-hand side
    Eigen::VectorXd rhs(m);
    for (int q = 0; q < m; ++q) {
      const auto& r = rows_[q];
      double tK = 0.0, tW = 0.0;
      for (const auto& e : r.full) {
        tK += e.v * K(e.j, e.i);
        tW += e.v * W(e.j, e.i);
      }
      if (r.slack_index >= 0) {
        const int w = r.slack_index;
        tK += r.slack_coeff * kd[w];
        tW += r.slack_coeff * (xd[w] * rd_d[w] / sd[w]);
      }
      rhs[q] = rp[q] - tK + tW;
    }

    // Cholesky with an escalating ridge, then a pivoting LDLT as last resort.
    bool solved = false;
    double ridge = 0.0;
    for (int attempt = 0; attempt < 4 && !solved; ++attempt) {
      Eigen::MatrixXd Mw = M;
      if (ridge > 0.0) Mw.diagonal().array() += ridge;
      Eigen::LLT<Eigen::MatrixXd> llt(Mw);
      if (llt.info() == Eigen::Success) {
        dy = llt.solve(rhs);
        solved = true;
      }
      ridge = ridge == 0.0 ? 1e-12 * std::max(1.0, M.diagonal().maxCoeff()) : ridge * 1e3;
    }
    if (!solved) {
      Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
      if (ldlt.info() != Eigen::Success) return false;
      dy = ldlt.solve(rhs);
      if (!dy.allFinite()) return false;
    }

    DS = Rd;
    dsd = rd_d;
    for (int q = 0; q < m; ++q) {
      const auto& r = rows_[q];
      for (const auto& e : r.full) DS(e.i, e.j) -= dy[q] * e.v;
      if (r.slack_index >= 0) dsd[r.slack_index] -= dy[q] * r.slack_coeff;
    }
    DS = 0.5 * (DS + DS.transpose().eval());

    DX = K - X * DS * Sinv;
    DX = 0.5 * (DX + DX.transpose().eval());
    for (int w = 0; w < ns; ++w) dxd[w] = kd[w] - xd[w] * dsd[w] / sd[w];
    return true;
  }

  double step_length(const Eigen::LLT<Eigen::MatrixXd>& xllt, const Eigen::MatrixXd& DX,
                     const Eigen::VectorXd& xd, const Eigen::VectorXd& dxd, int ns) {
    double amax = boundary_step(xllt, DX);
    for (int w = 0; w < ns; ++w)
      if (dxd[w] < 0.0) amax = std::min(amax, -xd[w] / dxd[w]);
    return std::min(1.0, opt_.step_frac * amax);
  }

  double step_length_dual(const Eigen::MatrixXd& S, const Eigen::MatrixXd& DS,
                          const Eigen::VectorXd& sd, const Eigen::VectorXd& dsd, int ns) {
    Eigen::LLT<Eigen::MatrixXd> sllt(S);
    double amax = boundary_step(sllt, DS);
    for (int w = 0; w < ns; ++w)
      if (dsd[w] < 0.0) amax = std::min(amax, -sd[w] / dsd[w]);
    return std::min(1.0, opt_.step_frac * amax);
  }

  // Largest a with P + a D >= 0, via the whitened direction L^-1 D L^-T.
  static double boundary_step(const Eigen::LLT<Eigen::MatrixXd>& llt, const Eigen::MatrixXd& D) {
    Eigen::MatrixXd W = llt.matrixL().solve(D);
    W = llt.matrixL().solve(W.transpose().eval());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (W + W.transpose().eval()),
                                                      Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
    return -1.0 / lmin;
  }

  void fill_solution(SdpSolution& sol, SdpStatus status, const Eigen::MatrixXd& X,
                     const Eigen::MatrixXd& S, const Eigen::VectorXd& y, const Eigen::VectorXd& xd,
                     const Eigen::VectorXd& sd, double pobj, double dobj, double relgap,
                     double pres, double dres, int iters, double sense_sign, int meq, int ns,
                     const std::string& msg) {
    sol.status = status;
    sol.X = X;
    sol.S = S;
    sol.y = y.head(meq);
    sol.ineq_y = y.tail(ns);
    sol.ineq_slack = xd.head(ns);
    sol.primal_obj = sense_sign * pobj;
    sol.dual_obj = sense_sign * dobj;
    sol.rel_gap = relgap;
    sol.primal_res = pres;
    sol.dual_res = dres;
    sol.iterations = iters;
    sol.message = msg;
    (void)sd;
  }
};

inline SdpSolution solve(const SdpProblem& problem, const SdpOptions& options = {}) {
  SdpSolver solver(problem, options);
  return solver.solve();
}

// Verifier decoupled from the solve path: everything is recomputed from the
// raw problem data and the returned solution.
inline CertificateReport check_certificate(const SdpProblem& p, const SdpSolution& sol) {
  CertificateReport rep;
  for (size_t q = 0; q < p.eq_mats.size(); ++q)
    rep.eq_residual = std::max(rep.eq_residual,
                               std::abs(p.eq_mats[q].inner(sol.X) - p.eq_rhs[q]));
  double ineq_min = 0.0;
  for (size_t w = 0; w < p.ineq_mats.size(); ++w)
    ineq_min = std::min(ineq_min, p.ineq_mats[w].inner(sol.X));
  rep.ineq_violation = std::max(0.0, -ineq_min);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ex(sol.X, Eigen::EigenvaluesOnly);
  rep.x_min_eig = ex.eigenvalues().minCoeff();

  const double sense_sign = p.sense == SdpSense::maximize ? -1.0 : 1.0;
  Eigen::MatrixXd S = sense_sign * p.C;
  for (size_t q = 0; q < p.eq_mats.size(); ++q)
    p.eq_mats[q].add_to(S, -sol.y[static_cast<Eigen::Index>(q)]);
  for (size_t w = 0; w < p.ineq_mats.size(); ++w)
    p.ineq_mats[w].add_to(S, -sol.ineq_y[static_cast<Eigen::Index>(w)]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  rep.s_min_eig = es.eigenvalues().minCoeff();

  if (!p.ineq_mats.empty()) rep.ineq_dual_min = sol.ineq_y.minCoeff();

  double dual_obj_internal = 0.0;
  for (size_t q = 0; q < p.eq_mats.size(); ++q)
    dual_obj_internal += p.eq_rhs[q] * sol.y[static_cast<Eigen::Index>(q)];
  const double primal_internal = sense_sign * p.C.cwiseProduct(sol.X).sum();
  rep.gap_abs = std::abs(primal_internal - dual_obj_internal);
  return rep;
}

}  // namespace icbound
