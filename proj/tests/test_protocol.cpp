#include "icbound/protocol.hpp"

#include "icbound/infotheory.hpp"
#include "support.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace icbound;
using Catch::Approx;

namespace {
std::vector<Dit> dits(std::initializer_list<int> vals, int d) {
  std::vector<Dit> out;
  for (int v : vals) out.emplace_back(v, d);
  return out;
}
}  // namespace

TEST_CASE("alice encoding subtracts the first dit", "[protocol]") {
  auto x = encode_alice(dits({0, 1, 2}, 3), 3, 3);
  REQUIRE(x.size() == 2);
  CHECK(x[0].value == 1);
  CHECK(x[1].value == 2);

  x = encode_alice(dits({2, 2, 2}, 3), 3, 3);
  CHECK(x[0].value == 0);
  CHECK(x[1].value == 0);

  x = encode_alice(dits({1, 0}, 2), 2, 2);
  CHECK(x[0].value == 1);

  CHECK_THROWS_AS(encode_alice(dits({0, 1}, 3), 3, 3), std::invalid_argument);
}

TEST_CASE("bob encoding is the position indicator", "[protocol]") {
  auto y = encode_bob(0, 3);
  REQUIRE(y.size() == 2);
  CHECK(y[0].value == 0);
  CHECK(y[1].value == 0);

  y = encode_bob(2, 3);
  CHECK(y[0].value == 0);
  CHECK(y[1].value == 1);

  y = encode_bob(1, 2);
  REQUIRE(y.size() == 1);
  CHECK(y[0].value == 1);

  CHECK_THROWS_AS(encode_bob(3, 3), std::invalid_argument);
  CHECK_THROWS_AS(encode_bob(-1, 3), std::invalid_argument);
}

TEST_CASE("guess decoding", "[protocol]") {
  CHECK(decode_guess(Dit(2, 3), Dit(2, 3)).value == 0);
  CHECK(decode_guess(Dit(0, 3), Dit(1, 3)).value == 2);
  CHECK_THROWS_AS(decode_guess(Dit(0, 3), Dit(0, 2)), std::invalid_argument);
}

TEST_CASE("noiseless box decodes every database exactly", "[protocol]") {
  // B - A = x.y recovers a_b for every database, every b, and every box
  // output value, exhaustively for d <= 3, k <= 3.
  for (int d : {2, 3})
    for (int k : {2, 3}) {
      long long ndb = 1;
      for (int i = 0; i < k; ++i) ndb *= d;
      for (long long db = 0; db < ndb; ++db) {
        std::vector<Dit> a;
        long long rest = db;
        for (int i = 0; i < k; ++i) {
          a.emplace_back(static_cast<int>(rest % d), d);
          rest /= d;
        }
        auto xv = encode_alice(a, d, k);
        std::vector<int> digits;
        for (const auto& dit : xv) digits.push_back(dit.value);
        const long long x = pack_setting(digits, d);
        for (int b = 0; b < k; ++b) {
          const int target = setting_dot(x, b, d, k);
          for (int box_a = 0; box_a < d; ++box_a) {
            const Dit box_b(box_a + target, d);
            const Dit alpha = Dit(box_a, d) - a[0];
            CHECK(decode_guess(box_b, alpha) == a[b]);
          }
        }
      }
    }
}

TEST_CASE("perfect box example: a=(1,2,0), b=1 recovers a_1 = 2", "[protocol]") {
  auto a = dits({1, 2, 0}, 3);
  auto xv = encode_alice(a, 3, 3);
  const long long x = pack_setting({xv[0].value, xv[1].value}, 3);
  const int target = setting_dot(x, 1, 3, 3);
  for (int lambda = 0; lambda < 3; ++lambda) {
    const Dit alpha = Dit(lambda, 3) - a[0];
    CHECK(decode_guess(Dit(lambda + target, 3), alpha).value == 2);
  }
}

TEST_CASE("guess channel of the noiseless and random boxes", "[protocol]") {
  auto scheme = RacScheme::uniform(2, 2);
  auto noiseless = NsBox::noiseless(2, 2);
  for (int i = 0; i < 2; ++i) {
    auto ch = guess_channel(noiseless, scheme, i);
    CHECK(ch.matrix.isApprox(Eigen::MatrixXd::Identity(2, 2), 1e-14));
  }
  auto random = NsBox::completely_random(2, 2);
  for (int i = 0; i < 2; ++i) {
    auto ch = guess_channel(random, scheme, i);
    CHECK(ch.matrix.isApprox(Eigen::MatrixXd::Constant(2, 2, 0.5), 1e-14));
  }
}

TEST_CASE("guess channel of the half-deterministic box", "[protocol]") {
  // Pr(B-A=0 | x, y=0) = 1 and Pr(B-A=xy | x, y=1) = 1/2: the b=0 channel
  // is the identity, the b=1 channel is uniform.
  Eigen::MatrixXd p(2, 2);
  p << 1.0, 0.5, 1.0, 0.5;
  auto box = NsBox::from_success_probs(2, 2, p);
  auto scheme = RacScheme::uniform(2, 2);
  CHECK(guess_channel(box, scheme, 0).matrix.isApprox(Eigen::MatrixXd::Identity(2, 2), 1e-14));
  CHECK(guess_channel(box, scheme, 1).matrix.isApprox(Eigen::MatrixXd::Constant(2, 2, 0.5), 1e-14));
}

TEST_CASE("guess channel scenario mismatch", "[protocol]") {
  CHECK_THROWS_AS(guess_channel(NsBox::noiseless(2, 2), RacScheme::uniform(3, 2), 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(guess_channel(NsBox::noiseless(2, 2), RacScheme::uniform(2, 2), 2),
                  std::invalid_argument);
}

TEST_CASE("guess channel rows are stochastic for random boxes", "[protocol]") {
  std::mt19937_64 rng(20240811);
  for (int rep = 0; rep < 40; ++rep) {
    const int d = 2 + static_cast<int>(rng() % 2);
    const int k = 2 + static_cast<int>(rng() % 2);
    auto box = icbound::testing::random_mixture_box(rng, d, k);
    auto scheme = icbound::testing::random_scheme(rng, d, k);
    for (int i = 0; i < k; ++i) CHECK(guess_channel(box, scheme, i).rows_stochastic());
  }
}

TEST_CASE("equal success probabilities give the symmetric channel", "[protocol]") {
  // All settings sharing success probability p with uniform marginals must
  // produce the d-ary symmetric channel whose diagonal is ((d-1)xi+1)/d
  // with xi the noise parameter.
  for (int d : {2, 3})
    for (double p : {0.35, 0.6, 0.9}) {
      const int k = 2;
      auto box = NsBox::from_success_probs(
          d, k, Eigen::MatrixXd::Constant(alice_setting_count(d, k), k, p));
      auto scheme = RacScheme::uniform(d, k);
      for (int y = 0; y < k; ++y) {
        const double xi = noise_parameter(box, scheme, y);
        CHECK(xi == Approx((d * p - 1.0) / (d - 1)).margin(1e-12));
        auto ch = guess_channel(box, scheme, y);
        auto expected = ChannelMatrix::symmetric(d, xi).matrix();
        CHECK(ch.matrix.isApprox(expected, 1e-12));
      }
    }
}

TEST_CASE("setting distribution is the a0-sum of database products", "[protocol]") {
  std::mt19937_64 rng(7);
  auto scheme = icbound::testing::random_scheme(rng, 3, 3);
  auto px = scheme.setting_distribution();
  CHECK(px.sum() == Approx(1.0).margin(1e-12));
  // Uniform marginals give uniform settings.
  auto uni = RacScheme::uniform(3, 3).setting_distribution();
  for (Eigen::Index i = 0; i < uni.size(); ++i) CHECK(uni[i] == Approx(1.0 / 9).margin(1e-14));
}
