// Hierarchical moment-matrix certificates for the protocol's correlations:
// operator sets S_1 and S_1+AB, the cell identification map (orthogonality
// zeros, idempotence, product identifications), non-negativity rows for all
// d^2 joint probabilities per setting pair, the success-probability
// objective, bound solving through the sdp module, and the rank-loop
// stopping report.
#pragma once

#include "icbound/core.hpp"
#include "icbound/infotheory.hpp"
#include "icbound/nsbox.hpp"
#include "icbound/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

namespace icbound {

struct Level {
  int n = 1;
  bool plus_ab = false;

  static Level parse(const std::string& s) {
    std::string body = s;
    bool ab = false;
    if (body.size() > 3 && body.substr(body.size() - 3) == "+AB") {
      ab = true;
      body = body.substr(0, body.size() - 3);
    }
    try {
      size_t used = 0;
      int n = std::stoi(body, &used);
      require(used == body.size() && n >= 1, "Level: cannot parse '" + s + "'");
      return Level{n, ab};
    } catch (const std::invalid_argument&) {
      throw;
    } catch (...) {
      throw std::invalid_argument("Level: cannot parse '" + s + "'");
    }
  }

  std::string str() const { return std::to_string(n) + (plus_ab ? "+AB" : ""); }
  bool operator==(const Level&) const = default;
};

inline const Level kLevel1{1, false};
inline const Level kLevel1AB{1, true};

struct OperatorLabel {
  enum class Kind { identity, alice, bob, product };
  Kind kind = Kind::identity;
  long long x = -1;  // Alice setting
  int a = -1;        // Alice outcome (retained: 0..d-2)
  int y = -1;        // Bob setting
  int b = -1;        // Bob outcome (retained: 0..d-2)
};

// Deterministic ordering: identity, Alice by (x, a), Bob by (y, b),
// products lexicographic by ((x, a), (y, b)).
inline std::vector<OperatorLabel> build_operator_set(int d, int k, Level level) {
  require(d >= 2 && k >= 2, "build_operator_set: bad scenario");
  if (!(level == kLevel1 || level == kLevel1AB))
    throw std::invalid_argument("build_operator_set: unsupported level " + level.str());
  const long long D = alice_setting_count(d, k);
  std::vector<OperatorLabel> ops;
  ops.push_back({OperatorLabel::Kind::identity, -1, -1, -1, -1});
  for (long long x = 0; x < D; ++x)
    for (int a = 0; a < d - 1; ++a) ops.push_back({OperatorLabel::Kind::alice, x, a, -1, -1});
  for (int y = 0; y < k; ++y)
    for (int b = 0; b < d - 1; ++b) ops.push_back({OperatorLabel::Kind::bob, -1, -1, y, b});
  if (level.plus_ab)
    for (long long x = 0; x < D; ++x)
      for (int a = 0; a < d - 1; ++a)
        for (int y = 0; y < k; ++y)
          for (int b = 0; b < d - 1; ++b)
            ops.push_back({OperatorLabel::Kind::product, x, a, y, b});
  return ops;
}

struct CellRef {
  enum class Kind { zero, one, variable };
  Kind kind = Kind::variable;
  int id = -1;
};

// Linear form c0 + sum coeff * variable over certificate variables.
struct LinearForm {
  double constant = 0.0;
  std::vector<std::pair<int, double>> terms;

  void add_var(int id, double c) {
    for (auto& t : terms)
      if (t.first == id) {
        t.second += c;
        return;
      }
    terms.emplace_back(id, c);
  }

  void add(const LinearForm& o, double scale = 1.0) {
    constant += scale * o.constant;
    for (const auto& t : o.terms) add_var(t.first, scale * t.second);
  }

  double eval(const Eigen::VectorXd& vals) const {
    double s = constant;
    for (const auto& t : terms) s += t.second * vals[t.first];
    return s;
  }
};

enum class VarSemantic { alice_marginal, bob_marginal, joint, aux };

struct NpaBuildOptions {
  // Identify the two pairings of a cross-setting product quadruple whenever
  // the two Alice outcomes or the two Bob outcomes coincide. The published
  // 1+AB variable counts correspond to this convention, but the resulting
  // constraint set is strictly stronger than the operator algebra warrants:
  // it pushes the d=2 certificate bound below the exact quantum value. Off
  // by default; the faithful identification list is what the published
  // bounds reproduce.
  bool product_swap_identification = false;
};

class MomentProblem {
 public:
  int d = 0, k = 0;
  Level level;
  int dim = 0;         // certificate size
  int dim_level1 = 0;  // size of the embedded S_1 block
  std::vector<OperatorLabel> ops;

  CellRef cell_ref(int s, int t) const {
    if (s > t) std::swap(s, t);
    return cells_[static_cast<size_t>(s) * dim + t];
  }
  int variable_count() const { return static_cast<int>(class_cells_.size()); }
  const std::vector<std::pair<int, int>>& class_cells(int var) const { return class_cells_[var]; }
  std::pair<int, int> representative(int var) const { return reps_[var]; }
  VarSemantic semantic(int var) const { return semantics_[var]; }
  int zero_cell_count() const { return zero_cells_; }

  int alice_index(long long x, int a) const { return 1 + static_cast<int>(x) * (d - 1) + a; }
  int bob_index(int y, int b) const {
    return 1 + static_cast<int>(alice_setting_count(d, k)) * (d - 1) + y * (d - 1) + b;
  }
  int product_index(long long x, int a, int y, int b) const {
    return dim_level1 +
           static_cast<int>(((x * (d - 1) + a) * k + y) * (d - 1) + b);
  }

  int alice_marginal_var(long long x, int a) const { return mvar_a_[x * (d - 1) + a]; }
  int bob_marginal_var(int y, int b) const { return mvar_b_[y * (d - 1) + b]; }
  int joint_var(long long x, int a, int y, int b) const {
    return jvar_[((x * (d - 1) + a) * k + y) * (d - 1) + b];
  }

  // Reconstructed joint probability Pr(A, B | x, y); eliminated outcomes are
  // rewritten through the completeness relations.
  LinearForm joint_form(long long x, int y, int A, int B) const {
    LinearForm f;
    const bool ea = A == d - 1, eb = B == d - 1;
    if (!ea && !eb) {
      f.add_var(joint_var(x, A, y, B), 1.0);
    } else if (ea && !eb) {
      f.add_var(bob_marginal_var(y, B), 1.0);
      for (int a2 = 0; a2 < d - 1; ++a2) f.add_var(joint_var(x, a2, y, B), -1.0);
    } else if (!ea && eb) {
      f.add_var(alice_marginal_var(x, A), 1.0);
      for (int b2 = 0; b2 < d - 1; ++b2) f.add_var(joint_var(x, A, y, b2), -1.0);
    } else {
      f.constant = 1.0;
      for (int a2 = 0; a2 < d - 1; ++a2) f.add_var(alice_marginal_var(x, a2), -1.0);
      for (int b2 = 0; b2 < d - 1; ++b2) f.add_var(bob_marginal_var(y, b2), -1.0);
      for (int a2 = 0; a2 < d - 1; ++a2)
        for (int b2 = 0; b2 < d - 1; ++b2) f.add_var(joint_var(x, a2, y, b2), 1.0);
    }
    return f;
  }

  LinearForm success_form(long long x, int y) const {
    const int t = setting_dot(x, y, d, k);
    LinearForm f;
    for (int A = 0; A < d; ++A) f.add(joint_form(x, y, A, mod_pos(A + t, d)));
    return f;
  }

  LinearForm objective_form() const {
    LinearForm f;
    for (long long x = 0; x < alice_setting_count(d, k); ++x)
      for (int y = 0; y < k; ++y) f.add(success_form(x, y));
    return f;
  }

  // Lower a linear form over variables to a sparse symmetric matrix: the
  // constant lands on the (0,0) cell (Gamma_11 = 1), each variable on its
  // representative cell with the 1/2 symmetrization on off-diagonal cells.
  SparseSym lower(const LinearForm& f) const {
    SparseSym m;
    if (f.constant != 0.0) m.add(0, 0, f.constant);
    for (const auto& [var, w] : f.terms) {
      auto [s, t] = reps_[var];
      m.add(s, t, s == t ? w : 0.5 * w);
    }
    return m;
  }

  Eigen::MatrixXd objective_matrix() const {
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(dim, dim);
    lower(objective_form()).add_to(c, 1.0);
    return c;
  }

  // Structural equalities in standard form: Gamma_11 = 1, every orthogonal
  // cell pinned to zero, and one chain of pair identifications per class.
  std::vector<std::pair<SparseSym, double>> equalities() const {
    std::vector<std::pair<SparseSym, double>> eqs;
    {
      SparseSym one;
      one.add(0, 0, 1.0);
      eqs.emplace_back(std::move(one), 1.0);
    }
    for (int s = 0; s < dim; ++s)
      for (int t = s; t < dim; ++t)
        if (cell_ref(s, t).kind == CellRef::Kind::zero) {
          SparseSym z;
          z.add(s, t, s == t ? 1.0 : 0.5);
          eqs.emplace_back(std::move(z), 0.0);
        }
    for (int v = 0; v < variable_count(); ++v) {
      const auto& cells = class_cells_[v];
      for (size_t i = 1; i < cells.size(); ++i) {
        SparseSym f;
        auto [rs, rt] = cells[0];
        auto [cs, ct] = cells[i];
        f.add(rs, rt, rs == rt ? 1.0 : 0.5);
        f.add(cs, ct, cs == ct ? -1.0 : -0.5);
        eqs.emplace_back(std::move(f), 0.0);
      }
    }
    return eqs;
  }

  // One non-negativity row per reconstructed joint probability.
  std::vector<LinearForm> inequality_forms() const {
    std::vector<LinearForm> rows;
    for (long long x = 0; x < alice_setting_count(d, k); ++x)
      for (int y = 0; y < k; ++y)
        for (int A = 0; A < d; ++A)
          for (int B = 0; B < d; ++B) rows.push_back(joint_form(x, y, A, B));
    return rows;
  }

  std::vector<SparseSym> inequality_mats() const {
    std::vector<SparseSym> rows;
    for (const auto& f : inequality_forms()) rows.push_back(lower(f));
    return rows;
  }

  // Moment matrix of a classical box: semantic cells take the box values,
  // cross-setting moments are left at zero. Sufficient for evaluating any
  // form or objective supported on semantic cells.
  Eigen::MatrixXd gamma_from_box(const NsBox& box) const {
    require(box.d() == d && box.k() == k, "gamma_from_box: scenario mismatch");
    Eigen::VectorXd vals = Eigen::VectorXd::Zero(variable_count());
    for (long long x = 0; x < alice_setting_count(d, k); ++x)
      for (int a = 0; a < d - 1; ++a) {
        double m = 0.0;
        for (int B = 0; B < d; ++B) m += box.pr(x, 0, a, B);
        vals[alice_marginal_var(x, a)] = m;
      }
    for (int y = 0; y < k; ++y)
      for (int b = 0; b < d - 1; ++b) {
        double m = 0.0;
        for (int A = 0; A < d; ++A) m += box.pr(0, y, A, b);
        vals[bob_marginal_var(y, b)] = m;
      }
    for (long long x = 0; x < alice_setting_count(d, k); ++x)
      for (int a = 0; a < d - 1; ++a)
        for (int y = 0; y < k; ++y)
          for (int b = 0; b < d - 1; ++b) vals[joint_var(x, a, y, b)] = box.pr(x, y, a, b);
    return gamma_from_values(vals);
  }

  Eigen::MatrixXd gamma_from_values(const Eigen::VectorXd& vals) const {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(dim, dim);
    g(0, 0) = 1.0;
    for (int v = 0; v < variable_count(); ++v)
      for (auto [s, t] : class_cells_[v]) {
        g(s, t) = vals[v];
        g(t, s) = vals[v];
      }
    return g;
  }

  // Rank-one certificate of a local deterministic strategy.
  Eigen::MatrixXd deterministic_gamma(const std::vector<int>& alice_outcome,
                                      const std::vector<int>& bob_outcome) const {
    const long long D = alice_setting_count(d, k);
    require(static_cast<long long>(alice_outcome.size()) == D,
            "deterministic_gamma: alice assignment size");
    require(static_cast<int>(bob_outcome.size()) == k, "deterministic_gamma: bob assignment size");
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
    v[0] = 1.0;
    for (long long x = 0; x < D; ++x)
      for (int a = 0; a < d - 1; ++a) v[alice_index(x, a)] = alice_outcome[x] == a ? 1.0 : 0.0;
    for (int y = 0; y < k; ++y)
      for (int b = 0; b < d - 1; ++b) v[bob_index(y, b)] = bob_outcome[y] == b ? 1.0 : 0.0;
    if (level.plus_ab)
      for (long long x = 0; x < D; ++x)
        for (int a = 0; a < d - 1; ++a)
          for (int y = 0; y < k; ++y)
            for (int b = 0; b < d - 1; ++b)
              v[product_index(x, a, y, b)] = v[alice_index(x, a)] * v[bob_index(y, b)];
    return v * v.transpose();
  }

  friend MomentProblem build_constraints(int, int, Level, NpaBuildOptions);

 private:
  std::vector<CellRef> cells_;
  std::vector<std::vector<std::pair<int, int>>> class_cells_;
  std::vector<std::pair<int, int>> reps_;
  std::vector<VarSemantic> semantics_;
  std::vector<int> mvar_a_, mvar_b_, jvar_;
  int zero_cells_ = 0;
};

namespace npa_detail {

class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<int> parent_;
};

}  // namespace npa_detail

inline MomentProblem build_constraints(int d, int k, Level level,
                                       NpaBuildOptions build = {}) {
  MomentProblem mp;
  mp.d = d;
  mp.k = k;
  mp.level = level;
  mp.ops = build_operator_set(d, k, level);
  const long long D = alice_setting_count(d, k);
  mp.dim_level1 = 1 + (d - 1) * (static_cast<int>(D) + k);
  mp.dim = static_cast<int>(mp.ops.size());

  const int dim = mp.dim;
  const int ZERO = dim * dim, ONE = dim * dim + 1;
  npa_detail::UnionFind uf(dim * dim + 2);
  auto cell = [&](int s, int t) {
    if (s > t) std::swap(s, t);
    return s * dim + t;
  };

  uf.unite(cell(0, 0), ONE);

  // Level-1 block: idempotence on the diagonal, orthogonality zeros between
  // distinct outcomes of one setting.
  for (int i = 1; i < mp.dim_level1; ++i) uf.unite(cell(i, i), cell(0, i));
  for (long long x = 0; x < D; ++x)
    for (int a = 0; a < d - 1; ++a)
      for (int a2 = a + 1; a2 < d - 1; ++a2)
        uf.unite(cell(mp.alice_index(x, a), mp.alice_index(x, a2)), ZERO);
  for (int y = 0; y < k; ++y)
    for (int b = 0; b < d - 1; ++b)
      for (int b2 = b + 1; b2 < d - 1; ++b2)
        uf.unite(cell(mp.bob_index(y, b), mp.bob_index(y, b2)), ZERO);

  if (level.plus_ab) {
    // Rows against product columns.
    for (long long x = 0; x < D; ++x)
      for (int a = 0; a < d - 1; ++a)
        for (int y = 0; y < k; ++y)
          for (int b = 0; b < d - 1; ++b) {
            const int ia = mp.alice_index(x, a), ib = mp.bob_index(y, b);
            const int ip = mp.product_index(x, a, y, b);
            uf.unite(cell(0, ip), cell(ia, ib));
            uf.unite(cell(ia, ip), cell(ia, ib));
            uf.unite(cell(ib, ip), cell(ia, ib));
            uf.unite(cell(ip, ip), cell(ia, ib));
            // Other Alice labels against this product.
            for (long long x2 = 0; x2 < D; ++x2)
              for (int a2 = 0; a2 < d - 1; ++a2) {
                if (x2 == x && a2 == a) continue;
                const int ia2 = mp.alice_index(x2, a2);
                if (x2 == x)
                  uf.unite(cell(ia2, ip), ZERO);
                else
                  uf.unite(cell(ia2, ip), cell(ia, mp.product_index(x2, a2, y, b)));
              }
            // Other Bob labels against this product.
            for (int y2 = 0; y2 < k; ++y2)
              for (int b2 = 0; b2 < d - 1; ++b2) {
                if (y2 == y && b2 == b) continue;
                const int ib2 = mp.bob_index(y2, b2);
                if (y2 == y)
                  uf.unite(cell(ib2, ip), ZERO);
                else
                  uf.unite(cell(ib2, ip), cell(ib, mp.product_index(x, a, y2, b2)));
              }
          }
    // Product against product.
    for (long long x = 0; x < D; ++x)
      for (int a = 0; a < d - 1; ++a)
        for (int y = 0; y < k; ++y)
          for (int b = 0; b < d - 1; ++b) {
            const int ip = mp.product_index(x, a, y, b);
            for (long long x2 = 0; x2 < D; ++x2)
              for (int a2 = 0; a2 < d - 1; ++a2)
                for (int y2 = 0; y2 < k; ++y2)
                  for (int b2 = 0; b2 < d - 1; ++b2) {
                    const int iq = mp.product_index(x2, a2, y2, b2);
                    if (iq <= ip) continue;
                    const bool same_a = x2 == x && a2 == a;
                    const bool same_b = y2 == y && b2 == b;
                    if (same_a) {
                      if (y2 == y)
                        uf.unite(cell(ip, iq), ZERO);
                      else
                        uf.unite(cell(ip, iq), cell(mp.bob_index(y, b), iq));
                    } else if (same_b) {
                      if (x2 == x)
                        uf.unite(cell(ip, iq), ZERO);
                      else
                        uf.unite(cell(ip, iq), cell(mp.alice_index(x, a), iq));
                    } else if (x2 == x || y2 == y) {
                      uf.unite(cell(ip, iq), ZERO);
                    } else if (build.product_swap_identification && (a2 == a || b2 == b)) {
                      uf.unite(cell(ip, iq),
                               cell(mp.product_index(x, a, y2, b2),
                                    mp.product_index(x2, a2, y, b)));
                    }
                  }
          }
  }

  // Compress into cell references, scanning the upper triangle row-major so
  // variable ids are stable across runs.
  mp.cells_.assign(static_cast<size_t>(dim) * dim, CellRef{});
  std::map<int, int> root_to_var;
  const int zero_root = uf.find(ZERO), one_root = uf.find(ONE);
  require(zero_root != one_root, "build_constraints: contradictory identifications");
  for (int s = 0; s < dim; ++s)
    for (int t = s; t < dim; ++t) {
      const int root = uf.find(cell(s, t));
      CellRef ref;
      if (root == zero_root) {
        ref.kind = CellRef::Kind::zero;
        ++mp.zero_cells_;
      } else if (root == one_root) {
        ref.kind = CellRef::Kind::one;
      } else {
        auto it = root_to_var.find(root);
        if (it == root_to_var.end()) {
          it = root_to_var.emplace(root, static_cast<int>(mp.class_cells_.size())).first;
          mp.class_cells_.emplace_back();
        }
        ref.kind = CellRef::Kind::variable;
        ref.id = it->second;
        mp.class_cells_[ref.id].emplace_back(s, t);
      }
      mp.cells_[static_cast<size_t>(s) * dim + t] = ref;
    }

  // Representative for lowering: prefer a cell inside the S_1 block.
  mp.reps_.resize(mp.class_cells_.size());
  for (size_t v = 0; v < mp.class_cells_.size(); ++v) {
    const auto& cells = mp.class_cells_[v];
    mp.reps_[v] = cells.front();
    for (const auto& c : cells)
      if (c.first < mp.dim_level1 && c.second < mp.dim_level1) {
        mp.reps_[v] = c;
        break;
      }
  }

  // Semantics and the marginal / joint variable tables.
  mp.semantics_.assign(mp.class_cells_.size(), VarSemantic::aux);
  mp.mvar_a_.assign(static_cast<size_t>(D) * (d - 1), -1);
  mp.mvar_b_.assign(static_cast<size_t>(k) * (d - 1), -1);
  mp.jvar_.assign(static_cast<size_t>(D) * (d - 1) * k * (d - 1), -1);
  for (long long x = 0; x < D; ++x)
    for (int a = 0; a < d - 1; ++a) {
      const auto ref = mp.cell_ref(0, mp.alice_index(x, a));
      mp.mvar_a_[x * (d - 1) + a] = ref.id;
      mp.semantics_[ref.id] = VarSemantic::alice_marginal;
    }
  for (int y = 0; y < k; ++y)
    for (int b = 0; b < d - 1; ++b) {
      const auto ref = mp.cell_ref(0, mp.bob_index(y, b));
      mp.mvar_b_[y * (d - 1) + b] = ref.id;
      mp.semantics_[ref.id] = VarSemantic::bob_marginal;
    }
  for (long long x = 0; x < D; ++x)
    for (int a = 0; a < d - 1; ++a)
      for (int y = 0; y < k; ++y)
        for (int b = 0; b < d - 1; ++b) {
          const auto ref = mp.cell_ref(mp.alice_index(x, a), mp.bob_index(y, b));
          mp.jvar_[((x * (d - 1) + a) * k + y) * (d - 1) + b] = ref.id;
          mp.semantics_[ref.id] = VarSemantic::joint;
        }
  return mp;
}

inline Eigen::MatrixXd build_objective(int d, int k, Level level) {
  return build_constraints(d, k, level).objective_matrix();
}

struct NpaOptions {
  double tol = 1e-7;
  int max_iter = 200;
  int max_dim = 300;  // certificate size budget; larger must be forced explicitly
  bool mehrotra = false;
  int threads = 1;
  enum class Encoding { automatic, direct, reduced } encoding = Encoding::automatic;
  NpaBuildOptions build;
};

struct BoundResult {
  int d = 0, k = 0;
  Level level;
  SdpStatus status = SdpStatus::numerical_failure;
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> xi;
  double xi_mean = std::numeric_limits<double>::quiet_NaN();
  double isotropy_dev = std::numeric_limits<double>::quiet_NaN();
  double gain = std::numeric_limits<double>::quiet_NaN();
  double rel_gap = 1.0;
  int iterations = 0;
  std::string encoding;
};

struct SolveArtifacts {
  BoundResult bound;
  MomentProblem problem;
  SdpProblem sdp;
  SdpSolution solution;
  Eigen::MatrixXd gamma;       // optimal certificate
  Eigen::VectorXd var_values;  // certificate variables at the optimum
};

namespace npa_detail {

// Direct encoding: X is the certificate itself (plus the solver's internal
// slacks); equalities are the structural pinnings and pairings.
inline SdpProblem encode_direct(const MomentProblem& mp) {
  SdpProblem p(mp.dim, SdpSense::maximize);
  p.set_objective(mp.objective_matrix());
  for (auto& [f, g] : mp.equalities()) p.add_equality(f, g);
  for (auto& h : mp.inequality_mats()) p.add_inequality(h);
  return p;
}

// Reduced encoding: the certificate appears as the dual slack of
//   min <G0, X>  s.t.  <G_i, X> = -c_i,  X >= 0,
// whose dual is  max c^T u  s.t.  G0 + sum_i u_i G_i >= 0: exactly the
// certificate LMI with the non-negativity rows carried on an appended
// diagonal block.
struct ReducedEncoding {
  SdpProblem problem;
  double objective_constant = 0.0;
  int gamma_dim = 0;
};

inline ReducedEncoding encode_reduced(const MomentProblem& mp) {
  const auto ineq = mp.inequality_forms();
  const int nvar = mp.variable_count();
  const int n = mp.dim + static_cast<int>(ineq.size());
  const LinearForm obj = mp.objective_form();

  ReducedEncoding enc{SdpProblem(n, SdpSense::minimize), obj.constant, mp.dim};
  SdpProblem& p = enc.problem;

  // G0: constant parts.
  Eigen::MatrixXd g0 = Eigen::MatrixXd::Zero(n, n);
  g0(0, 0) = 1.0;
  for (size_t w = 0; w < ineq.size(); ++w)
    g0(mp.dim + static_cast<int>(w), mp.dim + static_cast<int>(w)) = ineq[w].constant;
  p.set_objective(g0);

  // Objective coefficients per variable.
  Eigen::VectorXd c = Eigen::VectorXd::Zero(nvar);
  for (const auto& [var, w] : obj.terms) c[var] += w;

  // G_i is the exact indicator of class i (value 1 at every member cell,
  // both triangles) so that Gamma(u) = G0 + sum u_i G_i reproduces the
  // certificate cell for cell; plus the coefficients of u_i in the
  // non-negativity rows on the diagonal block.
  for (int v = 0; v < nvar; ++v) {
    SparseSym g;
    for (auto [s, t] : mp.class_cells(v)) g.add(s, t, 1.0);
    for (size_t w = 0; w < ineq.size(); ++w)
      for (const auto& [var, coeff] : ineq[w].terms)
        if (var == v) g.add(mp.dim + static_cast<int>(w), mp.dim + static_cast<int>(w), coeff);
    p.add_equality(std::move(g), -c[v]);
  }
  return enc;
}

}  // namespace npa_detail

inline SolveArtifacts solve_level_detailed(int d, int k, Level level, NpaOptions opt = {}) {
  MomentProblem mp = build_constraints(d, k, level, opt.build);
  if (mp.dim > opt.max_dim)
    throw budget_error("solve_level: certificate dimension " + std::to_string(mp.dim) +
                           " exceeds the budget of " + std::to_string(opt.max_dim),
                       mp.dim);

  const long long D = alice_setting_count(d, k);
  const int n_ineq = static_cast<int>(d) * d * static_cast<int>(D) * k;
  long long m_direct = 1 + mp.zero_cell_count() + n_ineq;
  for (int v = 0; v < mp.variable_count(); ++v)
    m_direct += static_cast<long long>(mp.class_cells(v).size()) - 1;
  const long long m_reduced = mp.variable_count();

  bool use_reduced = false;
  switch (opt.encoding) {
    case NpaOptions::Encoding::automatic: use_reduced = m_reduced < m_direct; break;
    case NpaOptions::Encoding::direct: use_reduced = false; break;
    case NpaOptions::Encoding::reduced: use_reduced = true; break;
  }

  SdpOptions sopt;
  sopt.tol = opt.tol;
  sopt.max_iter = opt.max_iter;
  sopt.mehrotra = opt.mehrotra;
  sopt.threads = opt.threads;

  SolveArtifacts art;
  art.problem = mp;
  art.bound.d = d;
  art.bound.k = k;
  art.bound.level = level;
  art.bound.encoding = use_reduced ? "reduced" : "direct";

  if (use_reduced) {
    auto enc = npa_detail::encode_reduced(mp);
    art.sdp = std::move(enc.problem);
    art.solution = solve(art.sdp, sopt);
    if (art.solution.status == SdpStatus::optimal) {
      art.var_values = -art.solution.y;
      art.gamma = art.solution.S.topLeftCorner(mp.dim, mp.dim);
    }
  } else {
    art.sdp = npa_detail::encode_direct(mp);
    art.solution = solve(art.sdp, sopt);
    if (art.solution.status == SdpStatus::optimal) {
      art.gamma = art.solution.X;
      art.var_values.resize(mp.variable_count());
      for (int v = 0; v < mp.variable_count(); ++v) {
        auto [s, t] = mp.class_cells(v).front();
        art.var_values[v] = art.gamma(s, t);
      }
    }
  }

  art.bound.status = art.solution.status;
  art.bound.rel_gap = art.solution.rel_gap;
  art.bound.iterations = art.solution.iterations;
  if (art.solution.status != SdpStatus::optimal) return art;

  art.bound.objective = 0.0;
  art.bound.xi.assign(k, 0.0);
  for (int y = 0; y < k; ++y) {
    double avg = 0.0;
    for (long long x = 0; x < D; ++x) {
      const double pxy = mp.success_form(x, y).eval(art.var_values);
      art.bound.objective += pxy;
      avg += pxy / static_cast<double>(D);
    }
    art.bound.xi[y] = (d * avg - 1.0) / (d - 1);
  }
  art.bound.xi_mean = std::accumulate(art.bound.xi.begin(), art.bound.xi.end(), 0.0) / k;
  art.bound.isotropy_dev = 0.0;
  for (double v : art.bound.xi)
    art.bound.isotropy_dev = std::max(art.bound.isotropy_dev, std::abs(v - art.bound.xi_mean));
  art.bound.gain = gain_unbiased(d, k, std::clamp(art.bound.xi_mean, 0.0, 1.0));
  return art;
}

inline BoundResult solve_level(int d, int k, Level level, NpaOptions opt = {}) {
  return solve_level_detailed(d, k, level, opt).bound;
}

// Numerical rank data for the stopping criterion at level 1+AB.
struct StoppingReport {
  double rank_tol = 1e-6;
  int full_rank = 0;
  std::vector<std::tuple<long long, int, int>> block_ranks;  // (X, Y, rank)
  bool loop = false;
};

namespace npa_detail {
inline int numerical_rank(const Eigen::MatrixXd& m, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()),
                                                    Eigen::EigenvaluesOnly);
  const Eigen::VectorXd sv = es.eigenvalues().cwiseAbs();
  const double smax = sv.maxCoeff();
  if (smax <= 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > rel_tol * smax) ++r;
  return r;
}
}  // namespace npa_detail

inline StoppingReport stopping_criterion(const MomentProblem& mp, const Eigen::MatrixXd& gamma,
                                         double rank_tol = 1e-6) {
  require(mp.level == kLevel1AB, "stopping_criterion: requires a 1+AB certificate");
  require(gamma.rows() == mp.dim && gamma.cols() == mp.dim,
          "stopping_criterion: certificate size mismatch or unsolved input");
  StoppingReport rep;
  rep.rank_tol = rank_tol;
  rep.full_rank = npa_detail::numerical_rank(gamma, rank_tol);
  rep.loop = true;
  const long long D = alice_setting_count(mp.d, mp.k);
  for (long long X = 0; X < D; ++X)
    for (int Y = 0; Y < mp.k; ++Y) {
      std::vector<int> idx(mp.dim_level1);
      std::iota(idx.begin(), idx.end(), 0);
      for (int a = 0; a < mp.d - 1; ++a)
        for (int b = 0; b < mp.d - 1; ++b) idx.push_back(mp.product_index(X, a, Y, b));
      Eigen::MatrixXd sub(idx.size(), idx.size());
      for (size_t i = 0; i < idx.size(); ++i)
        for (size_t j = 0; j < idx.size(); ++j) sub(i, j) = gamma(idx[i], idx[j]);
      const int r = npa_detail::numerical_rank(sub, rank_tol);
      rep.block_ranks.emplace_back(X, Y, r);
      if (r != rep.full_rank) rep.loop = false;
    }
  return rep;
}

// Closed form for the level-1 optimum with uniform settings.
inline double level1_closed_form(int d, int k) {
  const double D = static_cast<double>(alice_setting_count(d, k));
  return D * (k + (d - 1) * std::sqrt(static_cast<double>(k))) / d;
}

// Free-variable count under the published counting convention for the
// 1+AB certificates (outcome-matched product-pair identification applied).
inline int published_variable_count(int d, int k, Level level) {
  NpaBuildOptions opts;
  opts.product_swap_identification = true;
  return build_constraints(d, k, level, opts).variable_count();
}

}  // namespace icbound
