#include "acnum/experiment.hpp"

#include "acnum/cmat_io.hpp"
#include "acnum/expander.hpp"
#include "acnum/gap_unitaries.hpp"
#include "acnum/nearcomm.hpp"
#include "acnum/subalgebra.hpp"
#include "acnum/witness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace acnum {

namespace {

struct CommandInfo {
  Command command;
  const char* name;
};

constexpr CommandInfo kCommands[] = {
    {Command::GapSearch, "gap-search"},   {Command::WitnessAudit, "witness-audit"},
    {Command::DeformCheck, "deform-check"}, {Command::DimBounds, "dim-bounds"},
    {Command::Reduction, "reduction"},    {Command::Nearcomm, "nearcomm"},
    {Command::Invariants, "invariants"},
};

enum class Kind { Int, Real, Text };

struct ParamSpec {
  const char* name;
  Kind kind;
  bool required;
};

std::vector<ParamSpec> param_specs(Command c) {
  switch (c) {
    case Command::GapSearch:
      return {{"n", Kind::Int, true}, {"eps", Kind::Real, false}, {"trials", Kind::Int, false},
              {"check_samples", Kind::Int, false}};
    case Command::WitnessAudit:
      return {{"n", Kind::Int, true}, {"t", Kind::Real, true}, {"dense", Kind::Int, false}};
    case Command::DeformCheck:
      return {{"t", Kind::Real, false}, {"pairs", Kind::Int, false}, {"samples", Kind::Int, false},
              {"nmax", Kind::Int, false}};
    case Command::DimBounds:
      return {{"t", Kind::Real, true}, {"eps", Kind::Real, true}, {"nmax", Kind::Int, true}};
    case Command::Reduction:
      return {{"k", Kind::Int, true}, {"m", Kind::Int, true}, {"n", Kind::Int, true},
              {"t", Kind::Real, false}, {"mode", Kind::Text, false}};
    case Command::Nearcomm:
      return {{"input", Kind::Text, false}, {"sweeps", Kind::Int, false}, {"restarts", Kind::Int, false},
              {"n", Kind::Int, false}, {"t", Kind::Real, false}, {"k", Kind::Int, false},
              {"m", Kind::Int, false}};
    case Command::Invariants:
      return {};
  }
  return {};
}

bool parse_int(const std::string& s, long long& out) {
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && p == end;
}

bool parse_real(const std::string& s, double& out) {
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && p == end && std::isfinite(out);
}

class Params {
 public:
  explicit Params(const ExperimentConfig& c) : c_(c) {}
  bool has(const std::string& k) const { return c_.params.count(k) != 0; }
  long long integer(const std::string& k, long long def) const {
    if (!has(k)) return def;
    long long v = 0;
    parse_int(c_.params.at(k), v);
    return v;
  }
  double real(const std::string& k, double def) const {
    if (!has(k)) return def;
    double v = 0;
    parse_real(c_.params.at(k), v);
    return v;
  }
  std::string text(const std::string& k, const std::string& def) const {
    return has(k) ? c_.params.at(k) : def;
  }
  double tol(const std::string& k) const {
    const auto it = c_.tolerances.find(k);
    return it != c_.tolerances.end() ? it->second : default_tolerances(c_.command).at(k);
  }

 private:
  const ExperimentConfig& c_;
};

void require(bool cond, const std::string& what) {
  if (!cond) throw UsageError(what);
}

class Builder {
 public:
  explicit Builder(ExperimentRecord& r) : r_(r) {}
  void real(const std::string& name, double v) { r_.measurements.push_back({name, v}); }
  void integer(const std::string& name, std::int64_t v) { r_.measurements.push_back({name, v}); }
  void flag(const std::string& name, bool ok) { r_.pass_flags.push_back({name, ok}); }

 private:
  ExperimentRecord& r_;
};

void run_gap_search(const ExperimentConfig& c, ExperimentRecord& r) {
  const Params p(c);
  Builder b(r);
  const Index n = p.integer("n", 0);
  const double eps = p.real("eps", 0.05);
  const int trials = static_cast<int>(p.integer("trials", 200));
  const auto samples = static_cast<std::size_t>(p.integer("check_samples", 1000));
  const GapSearchResult g = find_gap_pair(n, eps, trials, c.seed, p.tol("lanczos"));
  b.integer("n", n);
  b.real("eps", eps);
  b.integer("found", g.found ? 1 : 0);
  b.real("restricted_norm", g.best_norm);
  b.real("kappa", g.found ? g.certificate.kappa : 0.0);
  b.integer("trials_used", g.trials_used);
  b.flag("found", g.found);
  if (g.found) {
    const CertificateCheck chk = gap_certificate_check(g.u1, g.u2, g.certificate.kappa, samples, c.seed.child(0x636572));
    b.integer("certificate_violations", static_cast<std::int64_t>(chk.violations));
    b.real("certificate_worst_margin", chk.worst_margin);
    b.flag("certificate", chk.violations == 0);
  }
}

void run_witness_audit(const ExperimentConfig& c, ExperimentRecord& r) {
  const Params p(c);
  Builder b(r);
  const auto n = static_cast<std::size_t>(p.integer("n", 0));
  const double t = p.real("t", 0.0);
  const long long dense_flag = p.integer("dense", -1);
  const bool dense_path = dense_flag < 0 ? n <= kWitnessDenseCap : dense_flag != 0;
  const double slack = p.tol("slack");
  const WitnessFamily fam = build_witness_family(n, t);
  const AlmostCommuteAudit a = almost_commute_audit(fam, dense_path);
  r.table_header = {"u_index", "v_index", "comm_hs", "comm_op", "bound_4t"};
  bool cap = true, hs_op = true;
  for (const CommutatorRecord& rec : a.records) {
    r.table_rows.push_back({std::to_string(rec.u_index), std::to_string(rec.v_index), format_double(rec.comm_hs),
                            format_double(rec.comm_op), format_double(rec.bound_4t)});
    cap = cap && rec.comm_op <= rec.bound_4t + slack;
    hs_op = hs_op && rec.comm_hs <= rec.comm_op + slack;
  }
  b.integer("n", static_cast<std::int64_t>(n));
  b.real("t", t);
  b.integer("dense", a.dense ? 1 : 0);
  b.integer("pairs", static_cast<std::int64_t>(a.records.size()));
  b.real("max_comm_hs", a.max_hs);
  b.real("max_comm_op", a.max_op);
  b.real("core_norm", a.core_norm);
  b.flag("op_le_4t", cap);
  b.flag("hs_le_op", hs_op);
  b.flag("core_le_2t", a.core_norm <= 2.0 * std::abs(t) + slack);
}

void run_deform_check(const ExperimentConfig& c, ExperimentRecord& r) {
  const Params p(c);
  Builder b(r);
  const double t = p.real("t", 0.1);
  const auto pairs = static_cast<std::size_t>(p.integer("pairs", 1000));
  const auto samples = static_cast<std::size_t>(p.integer("samples", 100));
  const auto nmax = static_cast<std::size_t>(p.integer("nmax", 4));
  Rng rng(c.seed);
  double s1 = 0, s2 = 0, s3 = 0;
  for (std::size_t i = 0; i < pairs; ++i) {
    const CMatrix x = gaussian_matrix(2, rng);
    const CMatrix y = gaussian_matrix(2, rng);
    const DeformResiduals d = deform_identity_checks(t, x, y);
    s1 = std::max(s1, d.singlet_compression);
    s2 = std::max(s2, d.trace_formula);
    s3 = std::max(s3, d.expectation);
  }
  double norm_id = 0.0;
  double slack = std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n <= nmax; ++n) {
    Rng nr(c.seed.child(n));
    for (std::size_t i = 0; i < samples; ++i) {
      const CMatrix x = gaussian_matrix(Index{1} << n, nr);
      const ThetaExpectation e = cond_expect_theta(n, t, x);
      if (n <= kWitnessDenseCap) norm_id = std::max(norm_id, std::abs(e.norm_sq - e.formula_sq));
      slack = std::min(slack, e.min_bound_slack);
    }
  }
  const double dt = p.tol("deform");
  const double tt = p.tol("theta");
  b.real("t", t);
  b.real("max_singlet_compression", s1);
  b.real("max_trace_formula", s2);
  b.real("max_expectation", s3);
  b.real("max_norm_identity", norm_id);
  b.real("min_bound_slack", nmax > 0 ? slack : 0.0);
  b.flag("singlet_compression", s1 <= dt);
  b.flag("trace_formula", s2 <= dt);
  b.flag("expectation", s3 <= dt);
  b.flag("norm_identity", norm_id <= tt);
  b.flag("length_bound", nmax == 0 || slack >= -tt);
}

void run_dim_bounds(const ExperimentConfig& c, ExperimentRecord& r) {
  const Params p(c);
  Builder b(r);
  const double t = p.real("t", 0.0);
  const double eps = p.real("eps", 0.0);
  const auto nmax = static_cast<std::size_t>(p.integer("nmax", 0));
  r.table_header = {"n", "l", "log2_upper", "log2_lower", "crossed"};
  std::size_t first = 0;
  bool within = true;
  std::size_t l = 0;
  for (std::size_t n = 1; n <= nmax; ++n) {
    const DimBoundReport d = dim_bounds(n, t, eps);
    r.table_rows.push_back({std::to_string(n), std::to_string(d.l), format_double(d.log2_upper),
                            format_double(d.log2_lower), d.crossed ? "1" : "0"});
    if (d.crossed && first == 0) first = n;
    within = within && static_cast<double>(d.l) <= d.l_cap;
    l = d.l;
  }
  b.real("t", t);
  b.real("eps", eps);
  b.integer("nmax", static_cast<std::int64_t>(nmax));
  b.integer("l", static_cast<std::int64_t>(l));
  b.integer("first_crossing", static_cast<std::int64_t>(first));
  b.flag("l_within_cap", within);
}

void run_reduction(const ExperimentConfig& c, ExperimentRecord& r) {
  const Params p(c);
  Builder b(r);
  const auto k = static_cast<std::size_t>(p.integer("k", 0));
  const auto m = static_cast<std::size_t>(p.integer("m", 0));
  const auto n = static_cast<std::size_t>(p.integer("n", 0));
  const std::string mode = p.text("mode", "f2");
  std::vector<CMatrix> us, vs;
  if (p.has("t")) {
    require(n <= kWitnessDenseCap, "reduction: with --t, n is the qubit count and must be <= 5");
    require(k <= n && m <= 3 * n, "reduction: with --t, need k <= n and m <= 3n");
    const WitnessFamily fam = build_witness_family(n, p.real("t", 0.0));
    const auto du = fam.dense_u();
    const auto dv = fam.deformed_generators();
    for (std::size_t i = 0; i < k; ++i) us.push_back(du[i]);
    for (std::size_t j = 0; j < m; ++j) vs.push_back(dv[j].dense(n));
  } else {
    for (std::size_t i = 0; i < k; ++i) us.push_back(haar_unitary(static_cast<Index>(n), c.seed.child(16 + i)));
    for (std::size_t j = 0; j < m; ++j) vs.push_back(haar_unitary(static_cast<Index>(n), c.seed.child(1024 + j)));
  }
  const GapPair ga{haar_unitary(static_cast<Index>(k), c.seed.child(1)), haar_unitary(static_cast<Index>(k), c.seed.child(2)), 0.0};
  const GapPair gc{haar_unitary(static_cast<Index>(m), c.seed.child(3)), haar_unitary(static_cast<Index>(m), c.seed.child(4)), 0.0};
  const bool f2 = mode == "f2";
  const ReductionAssembly a = f2 ? cyclic_reduction_assembly(us, vs, ga, gc) : product_reduction_assembly(us, vs, ga, gc);
  const auto table = commutator_table(a);
  r.table_header = {"alpha", "beta", "commutator_hs_norm"};
  double coupled_sq = 0.0, off_max = 0.0;
  bool exact = true;
  for (const CommutatorEntry& e : table) {
    r.table_rows.push_back({std::to_string(e.alpha), std::to_string(e.beta), format_double(e.hs_norm)});
    if (e.alpha == a.coupled_z && e.beta == a.coupled_t) {
      coupled_sq = e.hs_norm * e.hs_norm;
    } else {
      off_max = std::max(off_max, e.hs_norm);
      exact = exact && e.exactly_zero;
    }
  }
  const double predicted = averaged_commutator_sq(us, vs) / (f2 ? 9.0 : 1.0);
  const double residual = std::abs(coupled_sq - predicted);
  const double unit = max_unitarity_defect(a);
  b.integer("k", static_cast<std::int64_t>(k));
  b.integer("m", static_cast<std::int64_t>(m));
  b.integer("n", static_cast<std::int64_t>(n));
  b.integer("ambient_dim", static_cast<std::int64_t>(a.legs.total()));
  b.real("coupled_commutator_sq", coupled_sq);
  b.real("predicted_sq", predicted);
  b.real("identity_residual", residual);
  b.real("max_off_index_hs", off_max);
  b.real("unitarity_defect", unit);
  b.flag("averaging_identity", residual <= p.tol("identity"));
  b.flag("off_index_exact_zero", exact);
  b.flag("unitary", unit <= p.tol("unitarity"));
}

void run_nearcomm(const ExperimentConfig& c, ExperimentRecord& r) {
  const Params p(c);
  Builder b(r);
  CMatrix a, bm;
  if (p.has("input")) {
    std::tie(a, bm) = load_cmat_pair(p.text("input", ""));
    require(a.rows() == bm.rows(), "nearcomm: the two matrices differ in dimension");
  } else {
    const ContractionPair pair = witness_contraction_pair(static_cast<std::size_t>(p.integer("n", 1)), p.real("t", 0.05),
                                                       static_cast<std::size_t>(p.integer("k", 1)),
                                                       static_cast<std::size_t>(p.integer("m", 3)), c.seed);
    a = pair.a;
    bm = pair.b;
  }
  const DescentTrace tr = alternating_descent(a, bm, static_cast<std::size_t>(p.integer("sweeps", 100)),
                                              static_cast<std::size_t>(p.integer("restarts", 4)), c.seed);
  b.integer("dim", a.rows());
  b.real("defect", defect(a, bm));
  b.real("distance_upper_sq", tr.distance_sq);
  b.real("distance_upper_sum", tr.distance_sum);
  b.integer("sweeps_used", static_cast<std::int64_t>(tr.sweeps_used));
  b.integer("restarts", static_cast<std::int64_t>(tr.restarts));
  b.integer("monotone_ok", tr.monotone_ok ? 1 : 0);
  b.integer("converged", tr.converged ? 1 : 0);
  b.flag("monotone", tr.monotone_ok);
}

// Quick property suite touching every module.
void run_invariants(const ExperimentConfig& c, ExperimentRecord& r) {
  Builder b(r);
  const Seed s = c.seed;
  std::vector<std::pair<std::string, std::function<bool()>>> checks;

  checks.emplace_back("linalg.unitary_log_round_trip", [&] {
    for (std::uint64_t i = 0; i < 5; ++i) {
      const CMatrix u = haar_unitary(8, s.child(i));
      const CMatrix h = unitary_log(u);
      if (hs_norm(exp_i_hermitian(h, 2.0 * M_PI) - u) > 1e-10 || op_norm(h, 1e-12) > 0.5 + 1e-9) return false;
    }
    return true;
  });
  checks.emplace_back("linalg.hs_le_op", [&] {
    Rng rng(s.child(10));
    for (int i = 0; i < 5; ++i) {
      const CMatrix x = gaussian_matrix(6, rng);
      if (hs_norm(x) > op_norm(x, 1e-12) + 1e-9) return false;
    }
    return true;
  });
  checks.emplace_back("linalg.polar_unitary", [&] {
    Rng rng(s.child(11));
    return is_unitary(polar_unitary(gaussian_matrix(6, rng)), 1e-10);
  });
  checks.emplace_back("subalgebra.cond_expect", [&] {
    Rng rng(s.child(20));
    const SubalgebraBasis q = generate_subalgebra({random_hermitian(4, rng), identity(4)});
    const CMatrix x = gaussian_matrix(4, rng);
    const CMatrix e = q.project(x);
    return hs_norm(q.project(e) - e) <= 1e-10 && std::abs(normalized_trace(e) - normalized_trace(x)) <= 1e-10;
  });
  checks.emplace_back("subalgebra.double_commutant", [&] {
    Rng rng(s.child(21));
    const SubalgebraBasis q = generate_subalgebra({random_hermitian(4, rng), identity(4)});
    const SubalgebraBasis qq = commutant_basis(commutant_basis(q.basis()).basis());
    if (qq.size() != q.size()) return false;
    for (const CMatrix& x : q.basis())
      if (!qq.contains(x)) return false;
    return true;
  });
  checks.emplace_back("subalgebra.basic_construction_pauli", [&] {
    const SubalgebraBasis q = SubalgebraBasis::diagonal(2);
    const BasicConstruction bc = basic_construction(q);
    const auto g = pauli_group(1);
    const CMatrix f = group_average_projection(g, bc);
    const double lhs = std::pow(bc.hs_norm(f - bc.e_q), 2);
    double rhs = 0.0;
    for (const CMatrix& u : g) rhs += std::pow(hs_norm(u - q.project(u)), 2);
    rhs /= static_cast<double>(g.size());
    return std::abs(lhs - rhs) <= 1e-9;
  });
  checks.emplace_back("expander.two_unitaries_saturate", [&] {
    const UnitaryTuple u{8, {haar_unitary(8, s.child(30)), haar_unitary(8, s.child(31))}};
    return std::abs(restricted_norm(u).value - 2.0) <= 1e-6;
  });
  checks.emplace_back("expander.traceless_preserved", [&] {
    const UnitaryTuple u{6, {haar_unitary(6, s.child(32)), haar_unitary(6, s.child(33)), identity(6)}};
    Rng rng(s.child(34));
    CMatrix x = gaussian_matrix(6, rng);
    x.diagonal().array() -= normalized_trace(x);
    return std::abs(normalized_trace(moment_apply(u, x))) <= 1e-12;
  });
  checks.emplace_back("gap.block_commutator_relation", [&] {
    Rng rng(s.child(40));
    std::vector<CMatrix> d{haar_unitary(3, rng), haar_unitary(3, rng), haar_unitary(3, rng)};
    const BlockCommutatorParts parts = block_commutator_parts(d, gaussian_matrix(9, rng));
    return std::abs(parts.commutator_sq - parts.block_sum_sq / 3.0) <= 1e-10 * (1.0 + parts.commutator_sq);
  });
  auto assembly_check = [&](bool f2) {
    std::vector<CMatrix> us{haar_unitary(2, s.child(50)), haar_unitary(2, s.child(51))};
    std::vector<CMatrix> vs{haar_unitary(2, s.child(52)), haar_unitary(2, s.child(53))};
    const GapPair g{haar_unitary(2, s.child(54)), haar_unitary(2, s.child(55)), 0.0};
    const ReductionAssembly a = f2 ? cyclic_reduction_assembly(us, vs, g, g) : product_reduction_assembly(us, vs, g, g);
    const double coupled = sparse_hs_norm(sparse_commutator(a.z[a.coupled_z], a.t[a.coupled_t]));
    const double pred = averaged_commutator_sq(us, vs) / (f2 ? 9.0 : 1.0);
    bool ok = std::abs(coupled * coupled - pred) <= 1e-10;
    for (const CommutatorEntry& e : commutator_table(a))
      if (!(e.alpha == a.coupled_z && e.beta == a.coupled_t)) ok = ok && e.exactly_zero;
    return ok;
  };
  checks.emplace_back("gap.product_assembly_identity", [&] { return assembly_check(false); });
  checks.emplace_back("gap.cyclic_assembly_identity", [&] { return assembly_check(true); });
  checks.emplace_back("witness.audit_n2", [&] { return almost_commute_audit(build_witness_family(2, 0.1)).all_ok; });
  checks.emplace_back("witness.deform_identities", [&] {
    Rng rng(s.child(60));
    for (int i = 0; i < 20; ++i) {
      const DeformResiduals d = deform_identity_checks(0.3, gaussian_matrix(2, rng), gaussian_matrix(2, rng));
      if (std::max({d.singlet_compression, d.trace_formula, d.expectation}) > 1e-12) return false;
    }
    return true;
  });
  checks.emplace_back("witness.theta_norm_identity", [&] {
    Rng rng(s.child(61));
    const ThetaExpectation e = cond_expect_theta(2, 0.2, gaussian_matrix(4, rng));
    return std::abs(e.norm_sq - e.formula_sq) <= 1e-9 && e.min_bound_slack >= -1e-9;
  });
  checks.emplace_back("witness.hamming_bound", [&] {
    for (std::size_t n = 1; n <= 12; ++n)
      for (int k = 1; k <= 10; ++k)
        if (!hamming_bound_check(n, 0.05 * k).holds) return false;
    return true;
  });
  checks.emplace_back("nearcomm.projection", [&] {
    Rng rng(s.child(70));
    const CMatrix w = haar_unitary(6, rng);
    CMatrix dg = CMatrix::Zero(6, 6);
    dg.diagonal() << 1.0, 1.0, Complex(0, 1), Complex(0, 1), -1.0, 2.0;
    const CMatrix bm = w * dg * w.adjoint();
    const CMatrix a = gaussian_matrix(6, rng);
    const CMatrix x = commutant_projection(a, bm);
    return hs_norm(commutant_projection(x, bm) - x) <= 1e-10 && hs_norm(commutator(x, bm)) <= 1e-10 &&
           hs_norm(commutator(x, bm.adjoint())) <= 1e-10;
  });
  checks.emplace_back("nearcomm.descent_monotone", [&] {
    Rng rng(s.child(71));
    const CMatrix a = random_unit_ball(5, rng);
    const CMatrix bm = random_unit_ball(5, rng);
    return alternating_descent(a, bm, 20, 2, s.child(72)).monotone_ok;
  });
  checks.emplace_back("io.cmat_round_trip", [&] {
    Rng rng(s.child(80));
    const CMatrix x = gaussian_matrix(3, rng);
    std::stringstream ss;
    write_cmat(ss, x);
    return read_cmat(ss) == x;
  });

  std::int64_t failed = 0;
  for (auto& [name, fn] : checks) {
    bool ok = false;
    try {
      ok = fn();
    } catch (const std::exception&) {
      ok = false;
    }
    b.flag(name, ok);
    if (!ok) ++failed;
  }
  b.integer("checks", static_cast<std::int64_t>(checks.size()));
  b.integer("failed", failed);
}

bool is_table_command(Command c) {
  return c == Command::WitnessAudit || c == Command::DimBounds || c == Command::Reduction;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << text;
}

nlohmann::json measurement_value(const Measurement& m) {
  if (const auto* i = std::get_if<std::int64_t>(&m.value)) return *i;
  return std::get<double>(m.value);
}

std::string measurement_text(const Measurement& m) {
  if (const auto* i = std::get_if<std::int64_t>(&m.value)) return std::to_string(*i);
  return format_double(std::get<double>(m.value));
}

}  // namespace

std::string command_name(Command c) {
  for (const auto& info : kCommands)
    if (info.command == c) return info.name;
  return "?";
}

Command parse_command(const std::string& name) {
  for (const auto& info : kCommands)
    if (name == info.name) return info.command;
  throw UsageError("unknown command '" + name + "'");
}

double Measurement::as_double() const {
  if (const auto* i = std::get_if<std::int64_t>(&value)) return static_cast<double>(*i);
  return std::get<double>(value);
}

bool ExperimentRecord::all_pass() const {
  return std::all_of(pass_flags.begin(), pass_flags.end(), [](const PassFlag& f) { return f.ok; });
}

const Measurement* ExperimentRecord::find(const std::string& name) const {
  for (const Measurement& m : measurements)
    if (m.name == name) return &m;
  return nullptr;
}

std::map<std::string, double> default_tolerances(Command c) {
  switch (c) {
    case Command::GapSearch: return {{"lanczos", 1e-10}};
    case Command::WitnessAudit: return {{"slack", 1e-9}};
    case Command::DeformCheck: return {{"deform", 1e-12}, {"theta", 1e-9}};
    case Command::Reduction: return {{"identity", 1e-10}, {"unitarity", 1e-10}};
    default: return {};
  }
}

void validate(const ExperimentConfig& config) {
  const auto specs = param_specs(config.command);
  const std::string cmd = command_name(config.command);
  for (const auto& [key, value] : config.params) {
    const auto it = std::find_if(specs.begin(), specs.end(), [&](const ParamSpec& s) { return key == s.name; });
    require(it != specs.end(), cmd + ": unknown parameter '" + key + "'");
    long long iv = 0;
    double rv = 0;
    if (it->kind == Kind::Int) require(parse_int(value, iv), cmd + ": --" + key + " needs an integer, got '" + value + "'");
    if (it->kind == Kind::Real) require(parse_real(value, rv), cmd + ": --" + key + " needs a number, got '" + value + "'");
  }
  for (const ParamSpec& s : specs)
    require(!s.required || config.params.count(s.name), cmd + ": missing required --" + s.name);
  const auto defaults = default_tolerances(config.command);
  for (const auto& [key, value] : config.tolerances) {
    require(defaults.count(key) != 0, cmd + ": unknown tolerance '" + key + "'");
    require(std::isfinite(value) && value >= 0.0, cmd + ": tolerance '" + key + "' must be a finite non-negative number");
  }

  const Params p(config);
  auto positive = [&](const char* k) {
    if (p.has(k)) require(p.integer(k, 0) > 0, cmd + ": --" + std::string(k) + " must be positive");
  };
  switch (config.command) {
    case Command::GapSearch:
      require(p.integer("n", 0) >= 2, cmd + ": --n must be at least 2");
      require(p.real("eps", 0.05) > 0.0 && 2.0 * std::sqrt(2.0) + 2.0 * p.real("eps", 0.05) < 3.0,
              cmd + ": --eps must satisfy 0 < eps < (3 - 2 sqrt 2) / 2");
      positive("trials");
      positive("check_samples");
      break;
    case Command::WitnessAudit:
      require(p.integer("n", 0) >= 1 && p.integer("n", 0) <= static_cast<long long>(kWitnessLegLocalCap),
              cmd + ": --n must lie in [1, 10]");
      require(p.integer("dense", 0) != 1 || p.integer("n", 0) <= static_cast<long long>(kWitnessDenseCap),
              cmd + ": --dense 1 needs n <= 5");
      break;
    case Command::DeformCheck:
      require(p.integer("nmax", 4) >= 0 && p.integer("nmax", 4) <= static_cast<long long>(kWitnessDenseCap),
              cmd + ": --nmax must lie in [0, 5]");
      positive("pairs");
      positive("samples");
      break;
    case Command::DimBounds:
      require(p.real("t", 0) > 0.0 && p.real("t", 0) <= M_PI / 4.0, cmd + ": --t must lie in (0, pi/4]");
      require(p.real("eps", 0) > 0.0 && p.real("eps", 0) < 1.0 / 16.0, cmd + ": --eps must lie in (0, 1/16)");
      positive("nmax");
      break;
    case Command::Reduction:
      positive("k");
      positive("m");
      positive("n");
      require(p.text("mode", "f2") == "f2" || p.text("mode", "f2") == "f3", cmd + ": --mode must be f2 or f3");
      break;
    case Command::Nearcomm:
      positive("sweeps");
      if (p.has("restarts")) require(p.integer("restarts", 0) >= 0, cmd + ": --restarts must be non-negative");
      if (!p.has("input")) {
        positive("n");
        positive("k");
        positive("m");
      }
      break;
    case Command::Invariants:
      break;
  }
}

ExperimentRecord run(const ExperimentConfig& config) {
  validate(config);
  ExperimentRecord r;
  r.config = config;
  const auto start = std::chrono::steady_clock::now();
  try {
    switch (config.command) {
      case Command::GapSearch: run_gap_search(config, r); break;
      case Command::WitnessAudit: run_witness_audit(config, r); break;
      case Command::DeformCheck: run_deform_check(config, r); break;
      case Command::DimBounds: run_dim_bounds(config, r); break;
      case Command::Reduction: run_reduction(config, r); break;
      case Command::Nearcomm: run_nearcomm(config, r); break;
      case Command::Invariants: run_invariants(config, r); break;
    }
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  } catch (const DimensionError& e) {
    throw UsageError(e.what());
  } catch (const FormatError& e) {
    throw UsageError(e.what());
  }
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!config.out_path.empty())
    write_text(config.out_path, is_table_command(config.command) ? table_csv(r) : output_json(r).dump(2) + "\n");
  return r;
}

int exit_code(const ExperimentRecord& r) { return r.all_pass() ? 0 : 1; }

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["command"] = command_name(c.command);
  j["params"] = c.params;
  j["seed"] = c.seed.value;
  j["out"] = c.out_path;
  j["tolerances"] = c.tolerances;
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  try {
    ExperimentConfig c;
    c.command = parse_command(j.at("command").get<std::string>());
    if (j.contains("params")) {
      for (const auto& [k, v] : j.at("params").items()) c.params[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
    if (j.contains("seed")) c.seed.value = j.at("seed").get<std::uint64_t>();
    if (j.contains("out")) c.out_path = j.at("out").get<std::string>();
    if (j.contains("tolerances"))
      for (const auto& [k, v] : j.at("tolerances").items()) c.tolerances[k] = v.get<double>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
}

nlohmann::json to_json(const ExperimentRecord& r) {
  nlohmann::json j;
  j["config"] = to_json(r.config);
  j["measurements"] = nlohmann::json::array();
  for (const Measurement& m : r.measurements) j["measurements"].push_back({{"name", m.name}, {"value", measurement_value(m)}});
  j["pass_flags"] = nlohmann::json::array();
  for (const PassFlag& f : r.pass_flags) j["pass_flags"].push_back({{"name", f.name}, {"ok", f.ok}});
  j["wall_time"] = r.wall_time;
  if (!r.table_header.empty()) j["table"] = {{"header", r.table_header}, {"rows", r.table_rows}};
  return j;
}

ExperimentRecord record_from_json(const nlohmann::json& j) {
  try {
    ExperimentRecord r;
    r.config = config_from_json(j.at("config"));
    for (const auto& m : j.at("measurements")) {
      const auto& v = m.at("value");
      if (v.is_number_integer()) r.measurements.push_back({m.at("name").get<std::string>(), v.get<std::int64_t>()});
      else r.measurements.push_back({m.at("name").get<std::string>(), v.get<double>()});
    }
    for (const auto& f : j.at("pass_flags")) r.pass_flags.push_back({f.at("name").get<std::string>(), f.at("ok").get<bool>()});
    r.wall_time = j.at("wall_time").get<double>();
    if (j.contains("table")) {
      r.table_header = j.at("table").at("header").get<std::vector<std::string>>();
      r.table_rows = j.at("table").at("rows").get<std::vector<std::vector<std::string>>>();
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("record: ") + e.what());
  }
}

nlohmann::json output_json(const ExperimentRecord& r) {
  nlohmann::json j = nlohmann::json::object();
  auto copy = [&](const char* name) {
    if (const Measurement* m = r.find(name)) j[name] = measurement_value(*m);
  };
  switch (r.config.command) {
    case Command::GapSearch:
      copy("n");
      copy("eps");
      j["found"] = r.find("found") && r.find("found")->as_double() != 0.0;
      copy("restricted_norm");
      copy("kappa");
      copy("trials_used");
      break;
    case Command::Nearcomm:
      copy("defect");
      copy("distance_upper_sq");
      copy("distance_upper_sum");
      copy("sweeps_used");
      copy("restarts");
      j["monotone_ok"] = r.find("monotone_ok") && r.find("monotone_ok")->as_double() != 0.0;
      break;
    default:
      for (const Measurement& m : r.measurements) j[m.name] = measurement_value(m);
      break;
  }
  if (r.config.command == Command::Invariants || r.config.command == Command::DeformCheck) {
    nlohmann::json checks = nlohmann::json::object();
    for (const PassFlag& f : r.pass_flags) checks[f.name] = f.ok;
    j["checks"] = checks;
  }
  j["pass"] = r.all_pass();
  return j;
}

std::string table_csv(const ExperimentRecord& r) {
  std::ostringstream os;
  for (std::size_t i = 0; i < r.table_header.size(); ++i) os << (i ? "," : "") << r.table_header[i];
  os << "\n";
  for (const auto& row : r.table_rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << "\n";
  }
  return os.str();
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

ReportOutput report(const std::vector<ExperimentRecord>& records, const std::string& x_column,
                    const std::string& y_column) {
  ReportOutput out;
  if (records.empty()) {
    out.csv = "command,seed\n";
    return out;
  }
  const ExperimentRecord& first = records.front();
  std::vector<std::string> params, meas;
  for (const auto& [k, v] : first.config.params) params.push_back(k);
  for (const Measurement& m : first.measurements) meas.push_back(m.name);
  for (const ExperimentRecord& r : records) {
    if (r.config.command != first.config.command) throw SchemaError("report: records mix commands");
    std::vector<std::string> pk, mk;
    for (const auto& [k, v] : r.config.params) pk.push_back(k);
    for (const Measurement& m : r.measurements) mk.push_back(m.name);
    if (pk != params || mk != meas) throw SchemaError("report: records differ in parameters or measurements");
  }
  std::ostringstream csv;
  csv << "command,seed";
  for (const auto& k : params) csv << "," << k;
  for (const auto& k : meas) csv << "," << k;
  csv << "\n";
  for (const ExperimentRecord& r : records) {
    csv << command_name(r.config.command) << "," << r.config.seed.value;
    for (const auto& k : params) csv << "," << r.config.params.at(k);
    for (const Measurement& m : r.measurements) csv << "," << measurement_text(m);
    csv << "\n";
  }
  out.csv = csv.str();
  if (!x_column.empty() && !y_column.empty()) {
    auto cell = [&](const ExperimentRecord& r, const std::string& col) -> std::string {
      if (const Measurement* m = r.find(col)) return measurement_text(*m);
      const auto it = r.config.params.find(col);
      if (it != r.config.params.end()) return it->second;
      throw SchemaError("report: no column '" + col + "'");
    };
    std::ostringstream plot;
    for (const ExperimentRecord& r : records) plot << cell(r, x_column) << " " << cell(r, y_column) << "\n";
    out.plot = plot.str();
  }
  return out;
}

}  // namespace acnum
