#include "icbound/infotheory.hpp"

#include "support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace icbound;
using Catch::Approx;

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;

double binary_entropy(double p) { return -xlog2x(p) - xlog2x(1.0 - p); }

NsBox tsirelson_box() {
  return NsBox::from_success_probs(2, 2,
                                   Eigen::MatrixXd::Constant(2, 2, 0.25 * (2.0 + std::sqrt(2.0))));
}

// Box whose difference profiles are explicit, for derivative tests: the
// hessian coordinate is r[0][0][0] with r[0][0][d-1] absorbing the change.
NsBox box_from_profiles(const std::vector<std::vector<Eigen::VectorXd>>& r, int d, int k) {
  return NsBox::from_difference_distributions(d, k, r);
}
}  // namespace

TEST_CASE("shannon entropy basics", "[infotheory]") {
  Eigen::VectorXd p(2);
  p << 1.0, 0.0;
  CHECK(shannon_entropy(p) == 0.0);
  p << 0.5, 0.5;
  CHECK(shannon_entropy(p) == Approx(1.0));
  Eigen::VectorXd q = Eigen::VectorXd::Constant(3, 1.0 / 3);
  CHECK(shannon_entropy(q) == Approx(std::log2(3.0)));
  Eigen::VectorXd bad(2);
  bad << 0.4, 0.4;
  CHECK_THROWS_AS(shannon_entropy(bad), std::invalid_argument);
}

TEST_CASE("mutual information basics", "[infotheory]") {
  for (int d : {2, 3, 4}) {
    Eigen::VectorXd u = Eigen::VectorXd::Constant(d, 1.0 / d);
    CHECK(mutual_information(u, ChannelMatrix(Eigen::MatrixXd::Identity(d, d))) ==
          Approx(std::log2(double(d))));
    CHECK(mutual_information(u, ChannelMatrix(Eigen::MatrixXd::Constant(d, d, 1.0 / d))) ==
          Approx(0.0).margin(1e-12));
  }
  Eigen::VectorXd half(2);
  half << 0.5, 0.5;
  Eigen::MatrixXd bsc(2, 2);
  bsc << 0.9, 0.1, 0.1, 0.9;
  const double expected = 1.0 - binary_entropy(0.1);
  CHECK(mutual_information(half, ChannelMatrix(bsc)) == Approx(expected).margin(1e-12));
  CHECK(expected == Approx(0.53100).margin(5e-6));

  Eigen::VectorXd wrong(3);
  wrong << 0.2, 0.3, 0.5;
  CHECK_THROWS_AS(mutual_information(wrong, ChannelMatrix(bsc)), std::invalid_argument);
}

TEST_CASE("information gain of the canonical boxes", "[infotheory]") {
  auto uniform = RacScheme::uniform(2, 2);

  auto pr = information_gain(NsBox::noiseless(2, 2), uniform);
  CHECK(pr.total == Approx(2.0).margin(1e-12));
  CHECK_FALSE(pr.satisfied);

  Eigen::MatrixXd p(2, 2);
  p << 1.0, 0.5, 1.0, 0.5;
  auto case_i = information_gain(NsBox::from_success_probs(2, 2, p), uniform);
  CHECK(case_i.total == Approx(1.0).margin(1e-12));
  CHECK(case_i.per_setting[1] == Approx(0.0).margin(1e-12));
  CHECK(case_i.satisfied);

  auto ts = information_gain(tsirelson_box(), uniform);
  CHECK(ts.total == Approx(0.7982).margin(5e-5));
  CHECK(ts.satisfied);
  CHECK(ts.total == Approx(ts.per_setting[0] + ts.per_setting[1]).margin(1e-12));
}

TEST_CASE("noise parameter of the canonical boxes", "[infotheory]") {
  for (int d : {2, 3}) {
    auto scheme = RacScheme::uniform(d, 2);
    for (int y = 0; y < 2; ++y) {
      CHECK(noise_parameter(NsBox::noiseless(d, 2), scheme, y) == Approx(1.0).margin(1e-12));
      CHECK(noise_parameter(NsBox::completely_random(d, 2), scheme, y) ==
            Approx(0.0).margin(1e-12));
    }
  }
  auto scheme = RacScheme::uniform(2, 2);
  auto ts = tsirelson_box();
  for (int y = 0; y < 2; ++y)
    CHECK(noise_parameter(ts, scheme, y) == Approx(kInvSqrt2).margin(1e-12));
}

TEST_CASE("unbiased gain closed form", "[infotheory]") {
  CHECK(gain_unbiased(2, 2, 0.0) == Approx(0.0).margin(1e-12));
  CHECK(gain_unbiased(3, 4, 0.0) == Approx(0.0).margin(1e-12));
  CHECK(gain_unbiased(2, 2, 1.0) == Approx(2.0));
  CHECK(gain_unbiased(3, 2, 1.0) == Approx(2.0 * std::log2(3.0)));

  CHECK(gain_unbiased(3, 2, kInvSqrt2) == Approx(1.3547).margin(1e-3));
  CHECK(gain_unbiased(2, 2, kInvSqrt2) == Approx(0.7982).margin(5e-5));

  // Independent route: k copies of the symmetric channel with uniform input.
  for (int d : {2, 3, 5})
    for (double xi : {0.0, 0.3, 0.75, 1.0}) {
      const int k = 3;
      Eigen::VectorXd u = Eigen::VectorXd::Constant(d, 1.0 / d);
      const double per = mutual_information(u, ChannelMatrix::symmetric(d, xi));
      CHECK(gain_unbiased(d, k, xi) == Approx(k * per).margin(1e-10));
    }

  CHECK_THROWS_AS(gain_unbiased(2, 2, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(gain_unbiased(2, 2, 1.1), std::invalid_argument);
}

TEST_CASE("gain equals the unbiased closed form on isotropic boxes", "[infotheory]") {
  for (int d : {2, 3})
    for (int k : {2, 3})
      for (double xi_target : {0.1, 0.45, 0.8}) {
        const double p = ((d - 1) * xi_target + 1.0) / d;
        auto box = NsBox::from_success_probs(
            d, k, Eigen::MatrixXd::Constant(alice_setting_count(d, k), k, p));
        auto scheme = RacScheme::uniform(d, k);
        const double xi = noise_parameter(box, scheme, 0);
        CHECK(xi == Approx(xi_target).margin(1e-12));
        const double direct = information_gain(box, scheme).total;
        CHECK(direct == Approx(gain_unbiased(d, k, xi)).margin(1e-10));
      }
}

TEST_CASE("per-setting gain stays within the entropy bounds", "[infotheory]") {
  std::mt19937_64 rng(42);
  for (int rep = 0; rep < 30; ++rep) {
    const int d = 2 + static_cast<int>(rng() % 2);
    const int k = 2 + static_cast<int>(rng() % 2);
    auto box = icbound::testing::random_mixture_box(rng, d, k);
    auto scheme = icbound::testing::random_scheme(rng, d, k);
    auto rep_gain = information_gain(box, scheme);
    for (double gi : rep_gain.per_setting) {
      CHECK(gi >= 0.0);
      CHECK(gi <= std::log2(static_cast<double>(d)) + 1e-12);
    }
  }
}

TEST_CASE("derivative of the unbiased gain", "[infotheory]") {
  CHECK(gain_derivative_unbiased(2, 0.5) == Approx(0.5 * std::log(3.0)).margin(1e-12));
  CHECK(gain_derivative_unbiased(3, 1e-12) == Approx(0.0).margin(1e-9));
  CHECK_THROWS_AS(gain_derivative_unbiased(2, 1.0), singular_input);
  CHECK_THROWS_AS(gain_derivative_unbiased(2, 0.0), singular_input);

  // Finite-difference cross-check against the closed form, converting the
  // bits-per-k slope to natural-log units per digit.
  for (int d : {2, 3, 4})
    for (double xi : {0.2, 0.5, 0.8}) {
      const double h = 1e-6;
      const double fd = (gain_unbiased(d, 1, xi + h) - gain_unbiased(d, 1, xi - h)) / (2 * h);
      CHECK(gain_derivative_unbiased(d, xi) == Approx(fd * std::log(2.0)).margin(1e-6));
    }

  // Monotonicity of the gain in xi.
  for (int d : {2, 3, 4}) {
    double prev = -1.0;
    for (int i = 0; i <= 100; ++i) {
      const double g = gain_unbiased(d, 3, i / 100.0);
      CHECK(g > prev - 1e-15);
      prev = g;
    }
  }
}

TEST_CASE("signal decay bound and parameterizations", "[infotheory]") {
  CHECK(signal_decay_bound(2, 1.0) == Approx(1.0));
  CHECK(signal_decay_bound(3, 0.0) == Approx(0.0));
  // Appendix parameterization: diagonal xi_app = (2 xi + 1)/3 at d = 3 gives
  // ((3 xi_app - 1)/2)^2 = xi^2.
  for (double xi : {0.1, 0.4, 0.9}) {
    const double xi_app = (2.0 * xi + 1.0) / 3.0;
    CHECK(std::pow((3.0 * xi_app - 1.0) / 2.0, 2) == Approx(signal_decay_bound(3, xi)).margin(1e-12));
  }
}

TEST_CASE("signal decay ratio supremum", "[infotheory]") {
  CHECK(signal_decay_ratio_sup(2, 0.8, 40) == Approx(0.64).margin(1e-3));
  CHECK(signal_decay_ratio_sup(3, 0.5, 24) == Approx(0.25).margin(1e-3));
  CHECK(signal_decay_ratio_sup(2, 1.0, 10) == Approx(1.0).margin(1e-9));
  CHECK_THROWS_AS(signal_decay_ratio_sup(2, 0.5, 1), std::invalid_argument);

  for (int d : {2, 3})
    for (double xi : {0.2, 0.5, 0.8})
      CHECK(signal_decay_ratio_sup(d, xi, 24) <= signal_decay_bound(d, xi) + 2e-3);
}

TEST_CASE("data processing inequality on random cascades", "[infotheory]") {
  std::mt19937_64 rng(2718);
  for (int rep = 0; rep < 1000; ++rep) {
    const int nx = 2 + static_cast<int>(rng() % 3);
    const int ny = 2 + static_cast<int>(rng() % 3);
    const int nz = 2 + static_cast<int>(rng() % 3);
    Eigen::MatrixXd xy(nx, ny), yz(ny, nz);
    for (int r = 0; r < nx; ++r) xy.row(r) = icbound::testing::random_simplex(rng, ny);
    for (int r = 0; r < ny; ++r) yz.row(r) = icbound::testing::random_simplex(rng, nz);
    ChannelMatrix first(xy), second(yz);
    Eigen::VectorXd px = icbound::testing::random_simplex(rng, nx);
    const double ixy = mutual_information(px, first);
    const double ixz = mutual_information(px, first.compose(second));
    CHECK(ixz <= ixy + 1e-12);
  }
}

namespace {
// Central second difference of the total gain with respect to
// V = Pr(B - A = 0 | x = 0, y = 0), the last difference outcome absorbing
// the change; Richardson-extrapolated over h and h/2.
double hessian_fd(const std::vector<std::vector<Eigen::VectorXd>>& r, const RacScheme& scheme,
                  int d, int k, double h) {
  auto eval = [&](double dv) {
    auto rr = r;
    rr[0][0][0] += dv;
    rr[0][0][d - 1] -= dv;
    return information_gain(box_from_profiles(rr, d, k), scheme).total;
  };
  auto second = [&](double hh) {
    return (eval(hh) - 2.0 * eval(0.0) + eval(-hh)) / (hh * hh);
  };
  const double c1 = second(h), c2 = second(0.5 * h);
  return (4.0 * c2 - c1) / 3.0;
}
}  // namespace

TEST_CASE("analytic hessian matches finite differences", "[infotheory]") {
  // 100 random interior points; generation keeps the curvature away from
  // the double-precision floor of the second difference (tiny curvatures
  // are resampled, they stay covered by the uniform-marginal positivity
  // check below).
  std::mt19937_64 rng(31337);
  int done = 0;
  while (done < 100) {
    const int d = done % 4 == 3 ? 3 : 2;
    const int k = 2;
    std::vector<std::vector<Eigen::VectorXd>> r(
        alice_setting_count(d, k), std::vector<Eigen::VectorXd>(k));
    for (auto& row : r)
      for (auto& prof : row) prof = icbound::testing::random_simplex(rng, d, 0.1);
    auto scheme = icbound::testing::random_scheme(rng, d, k, 0.2);
    auto box = box_from_profiles(r, d, k);
    const double analytic = hessian_d2I(box, scheme);
    if (std::abs(analytic) < 5e-3) continue;
    const double fd = hessian_fd(r, scheme, d, k, 2e-4);
    CHECK(analytic == Approx(fd).epsilon(1e-5));
    ++done;
  }
}

TEST_CASE("hessian sign structure", "[infotheory]") {
  // Complementary marginals Pr(a0=0) = 1 - Pr(a1=0): non-negative.
  {
    std::vector<Eigen::VectorXd> m(2, Eigen::VectorXd(2));
    m[0] << 0.3, 0.7;
    m[1] << 0.7, 0.3;
    RacScheme scheme(2, 2, m);
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 20; ++rep) {
      auto box = icbound::testing::random_profile_box(rng, 2, 2, 0.05);
      CHECK(hessian_d2I(box, scheme) >= -1e-10);
    }
  }
  // Uniform marginals: strictly positive, and equal to the closed form
  // sum_n (1/P(a0=n, beta=n) + 1/P(a0=n+1, beta=n)) / (d^{2k} ln 2).
  std::mt19937_64 rng(9);
  for (auto [d, k] : std::vector<std::pair<int, int>>{{2, 2}, {3, 2}, {2, 3}}) {
    auto scheme = RacScheme::uniform(d, k);
    auto box = icbound::testing::random_profile_box(rng, d, k, 0.05);
    const double h = hessian_d2I(box, scheme);
    CHECK(h > 0.0);

    // Pr(a0=j, beta=n | b=0) = channel(j,n)/d at uniform marginals.
    auto ch = guess_channel(box, scheme, 0);
    double expected = 0.0;
    for (int n = 0; n < d; ++n) {
      const double pnn = ch.matrix(n, n) / d;
      const double pn1 = ch.matrix(mod_pos(n + 1, d), n) / d;
      expected += 1.0 / pnn + 1.0 / pn1;
    }
    expected /= std::pow(static_cast<double>(d), 2 * k) * std::log(2.0);
    CHECK(h == Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("hessian rejects boundary inputs", "[infotheory]") {
  Eigen::MatrixXd p(2, 2);
  p << 1.0, 0.5, 1.0, 0.5;  // deterministic sub-channel: joint mass hits zero
  auto box = NsBox::from_success_probs(2, 2, p);
  CHECK_THROWS_AS(hessian_d2I(box, RacScheme::uniform(2, 2)), singular_input);
}
