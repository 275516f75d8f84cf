#include "icbound/sdp.hpp"

#include "icbound/npa.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace icbound;
using Catch::Approx;

namespace {
SdpProblem trace_problem(double rhs) {
  SdpProblem p(2, SdpSense::minimize);
  Eigen::MatrixXd c(2, 2);
  c << 1, 0, 0, 2;
  p.set_objective(c);
  p.add_equality(Eigen::MatrixXd::Identity(2, 2), rhs);
  return p;
}

SdpProblem chsh_problem() { return npa_detail::encode_direct(build_constraints(2, 2, kLevel1)); }
}  // namespace

TEST_CASE("eigenvalue selection on the trace sphere", "[sdp]") {
  auto sol = solve(trace_problem(1.0));
  REQUIRE(sol.status == SdpStatus::optimal);
  CHECK(sol.primal_obj == Approx(1.0).margin(1e-6));
  CHECK(sol.X(0, 0) == Approx(1.0).margin(1e-5));
  CHECK(sol.X(1, 1) == Approx(0.0).margin(1e-5));
  CHECK(sol.rel_gap <= 1e-7);
}

TEST_CASE("contradictory equalities are reported infeasible", "[sdp]") {
  auto p = trace_problem(1.0);
  p.add_equality(Eigen::MatrixXd::Identity(2, 2), 2.0);
  auto sol = solve(p);
  CHECK(sol.status == SdpStatus::infeasible);
}

TEST_CASE("redundant but consistent equalities are fine", "[sdp]") {
  auto p = trace_problem(1.0);
  p.add_equality(Eigen::MatrixXd::Identity(2, 2), 1.0);
  auto sol = solve(p);
  REQUIRE(sol.status == SdpStatus::optimal);
  CHECK(sol.primal_obj == Approx(1.0).margin(1e-6));
}

TEST_CASE("chsh certificate bound", "[sdp]") {
  auto sol = solve(chsh_problem());
  REQUIRE(sol.status == SdpStatus::optimal);
  CHECK(sol.primal_obj == Approx(2.0 + std::sqrt(2.0)).margin(1e-5));

  auto rep = check_certificate(chsh_problem(), sol);
  CHECK(rep.ok(1e-6));
  CHECK(rep.s_min_eig >= -1e-7);
  CHECK(rep.x_min_eig >= -1e-9);
}

TEST_CASE("verifier flags a perturbed solution", "[sdp]") {
  auto p = chsh_problem();
  auto sol = solve(p);
  REQUIRE(sol.status == SdpStatus::optimal);
  auto clean = check_certificate(p, sol);
  CHECK(clean.eq_residual <= 1e-6);

  auto tampered = sol;
  tampered.X(0, 0) += 1e-3;
  auto rep = check_certificate(p, tampered);
  CHECK(rep.eq_residual >= 1e-4);
  CHECK_FALSE(rep.ok(1e-6));
}

TEST_CASE("scaling the objective scales the value, not the argmax", "[sdp]") {
  auto p = chsh_problem();
  auto base = solve(p);
  REQUIRE(base.status == SdpStatus::optimal);
  const double alpha = 3.5;
  auto scaled_p = p;
  scaled_p.set_objective(alpha * p.C);
  auto scaled = solve(scaled_p);
  REQUIRE(scaled.status == SdpStatus::optimal);
  CHECK(scaled.primal_obj == Approx(alpha * base.primal_obj).margin(1e-5 * alpha));
  CHECK((scaled.X - base.X).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("identical solves are bit identical", "[sdp]") {
  auto a = solve(chsh_problem());
  auto b = solve(chsh_problem());
  REQUIRE(a.status == b.status);
  CHECK(a.primal_obj == b.primal_obj);  // exact: deterministic pipeline
  CHECK(a.dual_obj == b.dual_obj);
  CHECK(a.iterations == b.iterations);
  CHECK((a.X - b.X).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("weak duality along the iteration, residual corrected", "[sdp]") {
  // On infeasible iterates the exact identity is
  //   <C,X> - b.y = <X,S> + <Rd,X> - rp.y
  // with <X,S> >= 0 inside the cone, so the gap is bounded below by the
  // residual cross terms; at the optimum those vanish.
  auto p = chsh_problem();
  SdpSolver solver(p);
  int iterations = 0;
  solver.iteration_callback = [&](const SdpSolver::IterateInfo& it) {
    ++iterations;
    CHECK(it.inner_xs >= -1e-12);
    const double lhs = it.gap_internal;
    const double rhs = it.inner_xs + it.rd_x - it.rp_y;
    CHECK(lhs == Approx(rhs).margin(1e-8 * (1.0 + std::abs(lhs))));
    CHECK(lhs >= -1e-9 - std::abs(it.rd_x) - std::abs(it.rp_y));
  };
  auto sol = solver.solve();
  REQUIRE(sol.status == SdpStatus::optimal);
  CHECK(iterations >= 5);
  // Feasible-to-tolerance at the end: plain weak duality up to tolerance.
  CHECK(sol.primal_obj - sol.dual_obj >= -1e-5);
}

TEST_CASE("mehrotra corrector agrees with plain path following", "[sdp]") {
  SdpOptions opt;
  opt.mehrotra = true;
  auto fancy = solve(chsh_problem(), opt);
  auto plain = solve(chsh_problem());
  REQUIRE(fancy.status == SdpStatus::optimal);
  CHECK(fancy.primal_obj == Approx(plain.primal_obj).margin(1e-5));
  CHECK(fancy.iterations <= plain.iterations + 2);
}

TEST_CASE("inequality rows hold at the optimum", "[sdp]") {
  // Maximize the (0,1) entry of a 2x2 PSD matrix with unit diagonal and the
  // extra linear constraint X01 + X00 >= 0 kept inactive.
  SdpProblem p(2, SdpSense::maximize);
  Eigen::MatrixXd c(2, 2);
  c << 0, 0.5, 0.5, 0;
  p.set_objective(c);
  p.add_equality([] {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
    m(0, 0) = 1;
    return m;
  }(), 1.0);
  p.add_equality([] {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
    m(1, 1) = 1;
    return m;
  }(), 1.0);
  SparseSym h;
  h.add(0, 0, 1.0);
  h.add(0, 1, 0.5);
  p.add_inequality(h);
  auto sol = solve(p);
  REQUIRE(sol.status == SdpStatus::optimal);
  CHECK(sol.primal_obj == Approx(1.0).margin(1e-6));
  CHECK(sol.ineq_slack.minCoeff() >= -1e-9);
  auto rep = check_certificate(p, sol);
  CHECK(rep.ok(1e-6));
}

TEST_CASE("solution and problem dumps are finite and self-consistent", "[sdp]") {
  auto p = trace_problem(1.0);
  auto sol = solve(p);
  REQUIRE(sol.status == SdpStatus::optimal);
  CHECK(sol.X.allFinite());
  CHECK(sol.S.allFinite());
  CHECK(sol.y.allFinite());
}
