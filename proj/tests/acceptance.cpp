// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "acnum/expander.hpp"
#include "acnum/gap_unitaries.hpp"
#include "acnum/linalg.hpp"
#include "acnum/nearcomm.hpp"
#include "acnum/random.hpp"
#include "acnum/subalgebra.hpp"
#include "acnum/witness.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

using namespace acnum;

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream note;

  void expect(bool cond, const std::string& what) {
    if (!cond && ok) note << "first failure: " << what << "; ";
    ok = ok && cond;
  }
};

int failures = 0;

void criterion(int id, const char* title, double budget_s, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.ok = false;
    o.note << "threw: " << e.what() << "; ";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.expect(secs < budget_s, "runtime over budget");
  if (!o.ok) ++failures;
  std::printf("%s %2d %s [%.1f s of %.0f s] %s\n", o.ok ? "PASS" : "FAIL", id, title, secs, budget_s,
              o.note.str().c_str());
  std::fflush(stdout);
}

CMatrix diag_of(const Eigen::VectorXcd& v) { return CMatrix(v.asDiagonal()); }

double sq(double x) { return x * x; }

// sum_{i <= floor(delta n)} C(n, i) with 64-bit arithmetic, fine for n <= 20.
std::uint64_t ball_size(std::size_t n, double delta) {
  std::uint64_t sum = 0, c = 1;
  for (std::size_t i = 0; i <= n; ++i) {
    if (static_cast<double>(i) > delta * static_cast<double>(n) + 1e-9) break;
    sum += c;
    c = c * (n - i) / (i + 1);
  }
  return sum;
}

double direct_average_sq(const std::vector<CMatrix>& us, const std::vector<CMatrix>& vs) {
  double s = 0;
  for (const CMatrix& u : us)
    for (const CMatrix& v : vs) s += sq(hs_norm(u * v - v * u));
  return s / static_cast<double>(us.size() * vs.size());
}

}  // namespace

int main() {
  criterion(1, "almost-commutation cap, n <= 5, t in {0.05, 0.1, 0.2}", 60, [](Outcome& o) {
    const double slack = 1e-9;
    for (std::size_t n = 1; n <= 5; ++n)
      for (double t : {0.05, 0.1, 0.2})
        for (bool dense : {true, false}) {
          const AlmostCommuteAudit a = almost_commute_audit(build_witness_family(n, t), dense);
          o.expect(!a.records.empty(), "no audited pairs");
          for (const CommutatorRecord& r : a.records) {
            o.expect(r.comm_op <= 4 * t + slack, "||[U,V]|| <= 4t");
            o.expect(r.comm_hs <= r.comm_op + slack, "||[U,V]||_2 <= ||[U,V]||");
          }
        }
  });

  criterion(2, "deformation identities and theta norm identity", 120, [](Outcome& o) {
    Rng rng(Seed{1002});
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
      const double t = (2 * rng.uniform() - 1) * M_PI;
      const DeformResiduals r = deform_identity_checks(t, gaussian_matrix(2, rng), gaussian_matrix(2, rng));
      worst = std::max({worst, r.singlet_compression, r.trace_formula, r.expectation});
    }
    o.expect(worst <= 1e-12, "2x2 residuals <= 1e-12");
    o.note << "max 2x2 residual " << worst << "; ";
    for (std::size_t n = 1; n <= 4; ++n)
      for (int i = 0; i < 100; ++i) {
        const double t = (2 * rng.uniform() - 1) * M_PI;
        const ThetaExpectation e = cond_expect_theta(n, t, gaussian_matrix(Index{1} << n, rng));
        o.expect(e.value.size() > 0, "expectation materialized");
        o.expect(std::abs(e.norm_sq - e.formula_sq) <= 1e-9 * std::max(1.0, e.formula_sq), "norm identity");
        o.expect(e.min_bound_slack >= -1e-9, "deformation bound");
      }
  });

  criterion(3, "theta expectation vs generic subalgebra projection, n = 2", 30, [](Outcome& o) {
    const std::size_t n = 2;
    const Index dim = 4;
    Rng rng(Seed{1003});
    double worst = 0;
    for (double t : {0.05, 0.4, 1.3}) {
      std::vector<CMatrix> spanning;
      for (Index i = 0; i < dim; ++i)
        for (Index j = 0; j < dim; ++j)
          spanning.push_back(theta_apply(n, t, kron(matrix_unit(dim, i, j), identity(dim))));
      const SubalgebraBasis q = SubalgebraBasis::from_spanning(dim * dim, spanning);
      o.expect(q.size() == dim * dim, "image algebra has dim 16");
      for (int i = 0; i < 100; ++i) {
        const CMatrix x = gaussian_matrix(dim, rng);
        const ThetaExpectation e = cond_expect_theta(n, t, x);
        worst = std::max(worst, hs_norm(e.value - cond_expect(kron(x, identity(dim)), q)));
      }
    }
    o.expect(worst <= 1e-9, "agreement to 1e-9");
    o.note << "max deviation " << worst << "; ";
  });

  criterion(4, "expander search n in {8, 16, 32}, eps = 0.05, certificate on 1e3 samples", 600, [](Outcome& o) {
    const double eps = 0.05;
    for (Index n : {8, 16, 32}) {
      bool done = false;
      for (std::uint64_t seed = 1; seed <= 4 && !done; ++seed) {
        const GapSearchResult r = find_gap_pair(n, eps, 200, Seed{seed});
        if (!r.found) continue;
        done = true;
        o.expect(r.best_norm <= 2 * std::sqrt(2.0) + 2 * eps, "restricted norm <= 2 sqrt 2 + 0.1");
        const CertificateCheck c = gap_certificate_check(r.u1, r.u2, r.certificate.kappa, 1000, Seed{seed + 100});
        o.expect(c.samples >= 1000 && c.violations == 0, "certificate check without violations");
        o.note << "n=" << n << " seed " << seed << " trials " << r.trials_used << " norm " << r.best_norm
               << " kappa " << r.certificate.kappa << " violations " << c.violations << "/" << c.samples
               << " margin " << c.worst_margin << "; ";
      }
      o.expect(done, "pair found within 4 seeds");
    }
  });

  criterion(5, "two Haar unitaries saturate: restricted norm 2 at n = 16", 60, [](Outcome& o) {
    Rng rng(Seed{1005});
    double worst = 0;
    for (int i = 0; i < 20; ++i) {
      const UnitaryTuple u{16, {haar_unitary(16, rng), haar_unitary(16, rng)}};
      worst = std::max(worst, std::abs(restricted_norm(u).value - 2.0));
    }
    o.expect(worst <= 1e-6, "within 1e-6 of 2");
    o.note << "max |norm - 2| " << worst << "; ";
  });

  criterion(6, "reduction identities 1/km and 1/9km, off-index commutators exactly 0", 60, [](Outcome& o) {
    Rng rng(Seed{1006});
    auto haar_list = [&](std::size_t c, Index d) {
      std::vector<CMatrix> v;
      for (std::size_t i = 0; i < c; ++i) v.push_back(haar_unitary(d, rng));
      return v;
    };
    double worst = 0;
    for (std::size_t k = 1; k <= 3; ++k)
      for (std::size_t m = 1; m <= 3; ++m)
        for (Index n = 1; n <= 4; ++n) {
          const auto us = haar_list(k, n), vs = haar_list(m, n);
          const double avg = direct_average_sq(us, vs);
          const GapPair pk{haar_unitary(static_cast<Index>(k), rng), haar_unitary(static_cast<Index>(k), rng), 0};
          const GapPair pm{haar_unitary(static_cast<Index>(m), rng), haar_unitary(static_cast<Index>(m), rng), 0};
          for (int cyclic = 0; cyclic < 2; ++cyclic) {
            const ReductionAssembly r =
                cyclic ? cyclic_reduction_assembly(us, vs, pk, pm) : product_reduction_assembly(us, vs, pk, pm);
            const CMatrix z(r.z[r.coupled_z]), t(r.t[r.coupled_t]);
            const double lhs = sq(hs_norm(z * t - t * z));
            worst = std::max(worst, std::abs(lhs - (cyclic ? avg / 9.0 : avg)));
            for (const CommutatorEntry& e : commutator_table(r))
              if (e.alpha != r.coupled_z || e.beta != r.coupled_t) o.expect(e.exactly_zero, "off-index exactly zero");
            o.expect(max_unitarity_defect(r) <= 1e-10, "assembly unitary");
          }
        }
    o.expect(worst <= 1e-10, "identities to 1e-10");
    o.note << "max residual " << worst << "; ";
  });

  criterion(7, "Powers-Stormer and projection-trace inequalities", 30, [](Outcome& o) {
    Rng rng(Seed{1007});
    for (int i = 0; i < 1000; ++i) {
      const Index d = 1 + static_cast<Index>(rng.below(16));
      const CMatrix h = random_positive_contraction(d, rng), k = random_positive_contraction(d, rng);
      const double mid = trace_norm(h * h - k * k);
      o.expect(sq(hs_norm(h - k)) <= mid + 1e-9, "||h-k||_2^2 <= ||h^2-k^2||_1");
      o.expect(mid <= hs_norm(h - k) * hs_norm(h + k) + 1e-9, "||h^2-k^2||_1 <= ||h-k||_2 ||h+k||_2");
    }
    for (int i = 0; i < 1000; ++i) {
      const Index d = 1 + static_cast<Index>(rng.below(16));
      const CMatrix p = random_projection(d, rng), q = random_projection(d, rng);
      o.expect(std::abs(normalized_trace(p) - normalized_trace(q)) <= sq(hs_norm(p - q)) + 1e-9,
               "|tau(p)-tau(q)| <= ||p-q||_2^2");
    }
  });

  criterion(8, "basic-construction averaging identity", 30, [](Outcome& o) {
    double worst = 0;
    auto check = [&](const std::vector<CMatrix>& g, const SubalgebraBasis& q) {
      const BasicConstruction bc = basic_construction(q);
      const CMatrix f = group_average_projection(g, bc);
      double rhs = 0;
      for (const CMatrix& u : g) rhs += sq(hs_norm(u - q.project(u)));
      rhs /= static_cast<double>(g.size());
      worst = std::max(worst, std::abs(sq(bc.hs_norm(f - bc.e_q)) - rhs));
    };
    const auto p1 = pauli_group(1);
    check(p1, SubalgebraBasis::scalars(2));
    check(p1, SubalgebraBasis::diagonal(2));
    Rng rng(Seed{1008});
    for (std::size_t qubits : {1, 2, 3}) {
      const Index d = Index{1} << qubits;
      const auto g = pauli_group(qubits);
      check(g, SubalgebraBasis::diagonal(d));
      for (int i = 0; i < 5; ++i) {
        std::vector<int> labels(static_cast<std::size_t>(d));
        for (int& l : labels) l = static_cast<int>(rng.below(3));
        check(g, SubalgebraBasis::diagonal_partition(labels));
      }
    }
    o.expect(worst <= 1e-9, "identity to 1e-9");
    o.note << "max residual " << worst << "; ";
  });

  criterion(9, "Hamming-ball bound n <= 20 and diagonal expectation identity at dim 64", 30, [](Outcome& o) {
    for (std::size_t n = 1; n <= 20; ++n)
      for (int j = 1; j <= 10; ++j) {
        const double delta = 0.05 * j;
        const HammingCheck h = hamming_bound_check(n, delta);
        o.expect(h.sum == ball_size(n, delta), "exact ball size");
        o.expect(h.holds && static_cast<double>(h.sum) <= std::pow(2.0, entropy_h(delta) * n) * (1 + 1e-12),
                 "ball size <= 2^{H(delta) n}");
      }
    Rng rng(Seed{1009});
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
      std::vector<int> p(64), labels(64);
      const int cells = 1 + static_cast<int>(rng.below(16));
      for (std::size_t j = 0; j < 64; ++j) {
        p[j] = static_cast<int>(rng.below(2));
        labels[j] = static_cast<int>(rng.below(static_cast<std::uint64_t>(cells)));
      }
      worst = std::max(worst, diag_expect_identity(p, labels).residual);
    }
    o.expect(worst <= 1e-12, "expectation identity to 1e-12");
    o.note << "max residual " << worst << "; ";
  });

  criterion(10, "dimension-bound crossing exists for t = 0.2, eps = 1/32", 10, [](Outcome& o) {
    const std::size_t n = crossing_search(0.2, 1.0 / 32.0, 100000);
    o.expect(n > 0, "finite crossing");
    o.note << "first crossing n = " << n << "; ";
  });

  criterion(11, "alternating descent contracts", 300, [](Outcome& o) {
    // Exactly commuting normal pair: distance 0 after one sweep.
    Rng rng(Seed{1011});
    for (Index d : {3, 8, 16}) {
      const CMatrix u = haar_unitary(d, rng);
      Eigen::VectorXcd da(d), db(d);
      for (Index i = 0; i < d; ++i) da(i) = Complex(rng.normal(), rng.normal()), db(i) = Complex(rng.normal(), 0);
      const CMatrix a = u * diag_of(da) * u.adjoint(), b = u * diag_of(db) * u.adjoint();
      const DescentTrace t = alternating_descent(a, b, 50, 4, Seed{static_cast<std::uint64_t>(d)});
      o.expect(t.sweeps_used == 1 && t.distance_sq <= 1e-20, "commuting input: 0 in one sweep");
      o.expect(t.monotone_ok, "monotone");
    }
    // Normal pair plus a perturbation of size delta on each.
    double worst_ratio = 0;
    for (Index d : {4, 8, 16, 32})
      for (double delta : {1e-3, 1e-2}) {
        const CMatrix u = haar_unitary(d, rng);
        Eigen::VectorXcd da(d), db(d);
        for (Index i = 0; i < d; ++i)
          da(i) = 0.5 * Complex(rng.normal(), rng.normal()), db(i) = 0.5 * Complex(rng.normal(), rng.normal());
        const CMatrix e1 = gaussian_matrix(d, rng), e2 = gaussian_matrix(d, rng);
        const CMatrix a = u * diag_of(da) * u.adjoint() + (delta / hs_norm(e1)) * e1;
        const CMatrix b = u * diag_of(db) * u.adjoint() + (delta / hs_norm(e2)) * e2;
        const DescentTrace t = alternating_descent(a, b, 100, 4, Seed{static_cast<std::uint64_t>(d)});
        o.expect(t.monotone_ok, "monotone");
        o.expect(t.distance_sum <= 5 * delta, "distance <= 5 delta");
        worst_ratio = std::max(worst_ratio, t.distance_sum / delta);
      }
    o.note << "max distance/delta " << worst_ratio << "; ";
    // Contractions with no structure, and a witness-derived pair.
    for (std::uint64_t s = 0; s < 10; ++s) {
      Rng r(Seed{2000 + s});
      const Index d = 2 + static_cast<Index>(r.below(15));
      const DescentTrace t =
          alternating_descent(random_unit_ball(d, r), random_unit_ball(d, r), 30, 6, Seed{3000 + s});
      o.expect(t.monotone_ok, "monotone on random contractions");
    }
    const ContractionPair w = witness_contraction_pair(1, 0.05, 1, 3, Seed{1});
    o.expect(alternating_descent(w.a, w.b, 100, 4, Seed{1}).monotone_ok, "monotone on the witness pair");
  });

  criterion(12, "unitary logarithm round trip and contraction pairs", 60, [](Outcome& o) {
    Rng rng(Seed{1012});
    const Index dims[] = {2, 4, 8, 16, 32, 64};
    double worst_exp = 0, worst_norm = 0;
    for (int i = 0; i < 100; ++i) {
      const Index d = dims[i % 6];
      const CMatrix u = haar_unitary(d, rng);
      const CMatrix h = unitary_log(u);
      const CMatrix back = (Complex(0, 2 * M_PI) * h).exp();
      worst_exp = std::max(worst_exp, hs_norm(back - u));
      const Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
      worst_norm = std::max(worst_norm, es.eigenvalues().cwiseAbs().maxCoeff());
      o.expect(is_hermitian(h, 1e-12), "logarithm Hermitian");
    }
    o.expect(worst_exp <= 1e-10, "exp(2 pi i h) = u to 1e-10");
    o.expect(worst_norm <= 0.5 + 1e-12, "||h|| <= 1/2 (rounding 1e-12)");
    o.note << "max round trip " << worst_exp << ", max ||h|| " << worst_norm << "; ";
    for (Index d : {2, 8, 32, 64}) {
      const ContractionPair p = contraction_pair_from_unitaries(haar_unitary(d, rng), haar_unitary(d, rng),
                                                    haar_unitary(d, rng), haar_unitary(d, rng));
      o.expect(op_norm(p.a, 1e-12) <= 1 + 1e-8 && op_norm(p.b, 1e-12) <= 1 + 1e-8, "||A||, ||B|| <= 1");
    }
    const ContractionPair w = witness_contraction_pair(1, 0.05, 1, 3, Seed{1});
    o.expect(op_norm(w.a, 1e-12) <= 1 + 1e-8 && op_norm(w.b, 1e-12) <= 1 + 1e-8, "witness pair contractions");
  });

  std::printf("%s: %d of 12 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
