// Shared helpers for the test suites: seeded generators for probability
// vectors, boxes and schemes. Everything is deterministic under a fixed
// seed.
#pragma once

#include "icbound/nsbox.hpp"
#include "icbound/protocol.hpp"

#include <random>
#include <vector>

namespace icbound::testing {

inline Eigen::VectorXd random_simplex(std::mt19937_64& rng, int n, double interior_floor = 0.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd v(n);
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    v[i] = -std::log(std::max(u(rng), 1e-300));
    s += v[i];
  }
  v /= s;
  if (interior_floor > 0.0) {
    v = (1.0 - n * interior_floor) * v;
    v.array() += interior_floor;
  }
  return v;
}

// Box with uniform single-party marginals built from random difference
// profiles; passes no-signaling exactly.
inline NsBox random_profile_box(std::mt19937_64& rng, int d, int k, double interior_floor = 0.0) {
  const long long nx = alice_setting_count(d, k);
  std::vector<std::vector<Eigen::VectorXd>> r(nx, std::vector<Eigen::VectorXd>(k));
  for (long long x = 0; x < nx; ++x)
    for (int y = 0; y < k; ++y) r[x][y] = random_simplex(rng, d, interior_floor);
  return NsBox::from_difference_distributions(d, k, r);
}

// Local deterministic box: A = f(x), B = g(y).
inline NsBox deterministic_box(std::mt19937_64& rng, int d, int k) {
  const long long nx = alice_setting_count(d, k);
  std::uniform_int_distribution<int> pick(0, d - 1);
  std::vector<int> fa(nx), gb(k);
  for (auto& v : fa) v = pick(rng);
  for (auto& v : gb) v = pick(rng);
  std::vector<Eigen::MatrixXd> joint(nx * k);
  for (long long x = 0; x < nx; ++x)
    for (int y = 0; y < k; ++y) {
      Eigen::MatrixXd t = Eigen::MatrixXd::Zero(d, d);
      t(fa[x], gb[y]) = 1.0;
      joint[x * k + y] = t;
    }
  return NsBox(d, k, std::move(joint));
}

// Convex mixture of profile boxes and deterministic boxes; general valid
// no-signaling box with typically biased marginals.
inline NsBox random_mixture_box(std::mt19937_64& rng, int d, int k) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double w = u(rng);
  NsBox a = random_profile_box(rng, d, k);
  NsBox b = deterministic_box(rng, d, k);
  const long long nx = alice_setting_count(d, k);
  std::vector<Eigen::MatrixXd> joint;
  joint.reserve(nx * k);
  for (long long x = 0; x < nx; ++x)
    for (int y = 0; y < k; ++y) joint.push_back(w * a.table(x, y) + (1.0 - w) * b.table(x, y));
  return NsBox(d, k, std::move(joint));
}

inline RacScheme random_scheme(std::mt19937_64& rng, int d, int k, double interior_floor = 0.0) {
  std::vector<Eigen::VectorXd> m;
  for (int i = 0; i < k; ++i) m.push_back(random_simplex(rng, d, interior_floor));
  return RacScheme(d, k, std::move(m));
}

}  // namespace icbound::testing
