#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "thermoform/builtins.hpp"
#include "thermoform/classify.hpp"
#include "thermoform/kusuoka.hpp"
#include "thermoform/pressure.hpp"
#include "thermoform/random.hpp"
#include "thermoform/structure.hpp"

// The twelve acceptance criteria as executable checks.
namespace thermoform::acceptance {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0;
};

struct Criterion {
  int id;
  std::string title;
  std::function<Outcome()> run;
};

namespace detail {

inline std::string fmt(double x, int prec = 10) {
  std::ostringstream os;
  os.precision(prec);
  os << x;
  return os.str();
}

/// Tuples from the built-in registry with a well-defined Kusuoka measure.
inline std::vector<MatrixTuple<Rational>> irreducible_builtins() { return builtins::reproduction_set(); }

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Alternating Bernoulli oracle for notmix2: odd positions draw symbol 1 with
// probability 1/5, even positions with 4/5; the measure averages this with
// the parity-swapped copy.
inline double notmix_block_oracle(const Word& w) {
  double p1 = 1, p2 = 1;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const bool odd = i % 2 == 0;  // 1-based position i+1
    const double a = odd ? 0.2 : 0.8;
    p1 *= w[i] == 1 ? a : 1 - a;
    p2 *= w[i] == 1 ? 1 - a : a;
  }
  return 0.5 * (p1 + p2);
}

inline Outcome pressure_identity() {
  const auto t = builtins::notmix2();
  const double log5 = std::log(5.0);
  const double exact = pressure_exact_even(t, 1);
  const auto t0 = std::chrono::steady_clock::now();
  EnumerationOptions opt;
  opt.threads = 1;
  const auto b = pressure_bracket(t, 2.0, 10, opt);
  const double secs = seconds_since(t0);
  const bool exact_ok = std::fabs(exact - log5) <= 1e-12;
  const bool contains = b.periodic_lower <= log5 + 1e-12 && log5 <= b.upper + 1e-12;
  const bool close = b.upper - log5 <= 0.05;
  const bool fast = secs < 10.0;
  std::string d = "exact-log5=" + fmt(exact - log5, 3) + " upper-log5=" + fmt(b.upper - log5, 8) +
                  " (needs <= 0.05) bracket=[" + fmt(b.periodic_lower) + "," + fmt(b.upper) +
                  "] contains=" + (contains ? "yes" : "no") + " runtime=" + fmt(secs, 3) + "s";
  return {exact_ok && contains && close && fast, d};
}

inline Outcome cylinder_exactness() {
  const auto kd = kusuoka_measure(builtins::notmix2());
  const double e11 = std::fabs(cylinder_measure(kd, Word{1, 1}) - 4.0 / 25);
  const double e12 = std::fabs(cylinder_measure(kd, Word{1, 2}) - 17.0 / 50);
  const double e21 = std::fabs(cylinder_measure(kd, Word{2, 1}) - 17.0 / 50);
  const double e22 = std::fabs(cylinder_measure(kd, Word{2, 2}) - 4.0 / 25);
  const double worst2 = std::max({e11, e12, e21, e22});
  double worst = 0;
  std::size_t count = 0;
  for_each_cylinder(kd, 8, [&](const CylinderVisit<Rational>& v) {
    worst = std::max(worst, std::fabs(v.measure - notmix_block_oracle(v.word)));
    ++count;
  });
  return {worst2 <= 1e-10 && worst <= 1e-10,
          "length-2 error " + fmt(worst2, 3) + ", two-block construction error " + fmt(worst, 3) + " over " +
              std::to_string(count) + " cylinders"};
}

inline Outcome measure_consistency() {
  double worst = 0;
  std::string names;
  for (const auto& t : irreducible_builtins()) {
    const auto c = consistency_check(kusuoka_measure(t), 8);
    worst = std::max(worst, c.max());
    names += (names.empty() ? "" : ",") + t.label();
  }
  return {worst <= 1e-10, "max stationarity/mass defect " + fmt(worst, 3) + " over " + names};
}

inline Outcome gibbs_sandwich() {
  bool ok = true;
  std::string d;
  for (const auto& t : irreducible_builtins()) {
    const auto kd = kusuoka_measure(t);
    const auto g = gibbs_verify(kd, 10);
    ok = ok && g.ok();
    if (!g.ok()) d += t.label() + " violated at " + to_string(*g.violation) + "; ";
    if (t.label() == "notmix2") {
      const bool bounds = std::fabs(g.constants.lower - 0.5) <= 1e-9 && std::fabs(g.constants.upper - 1.0) <= 1e-9;
      ok = ok && bounds;
      d += "notmix2 bounds [" + fmt(g.constants.lower) + "," + fmt(g.constants.upper) + "] observed [" +
           fmt(g.min_ratio) + "," + fmt(g.max_ratio) + "]; ";
    }
  }
  return {ok, d + "all built-ins, lengths <= 10"};
}

inline Outcome non_mixing_evidence() {
  const auto t = builtins::notmix2();
  const auto ps = peripheral_spectrum(t);
  bool spec_ok = ps.values.size() == 2;
  if (spec_ok) {
    double hi = -1e300, lo = 1e300;
    for (const auto& z : ps.values) {
      spec_ok = spec_ok && std::fabs(z.imag()) <= 1e-9;
      hi = std::max(hi, z.real());
      lo = std::min(lo, z.real());
    }
    spec_ok = spec_ok && std::fabs(hi - 5) <= 1e-9 && std::fabs(lo + 5) <= 1e-9;
  }
  const auto kd = kusuoka_measure(t);
  const double mu1 = cylinder_measure(kd, Word{1});
  const double target = mu1 * mu1;
  bool odd_ok = true;
  double cesaro = 0, min_odd_gap = 1e300;
  for (std::size_t n = 1; n <= 20; ++n) {
    const double c = correlation(kd, Word{1}, Word{1}, n);
    cesaro += c;
    if (n % 2 == 1) {
      min_odd_gap = std::min(min_odd_gap, std::fabs(c - target));
      odd_ok = odd_ok && std::fabs(c - target) > 0.01;
    }
  }
  cesaro /= 20;
  const bool cesaro_ok = std::fabs(cesaro - target) <= 0.01;
  const auto ob = mixing_obstruction_scan(t, 3);
  bool scan_ok = ob.has_value() && ob->n == 2;
  if (scan_ok) {
    const auto e1 = Subspace<Rational>::span({unit_vector<Rational>(2, 0)}, 2);
    const auto e2 = Subspace<Rational>::span({unit_vector<Rational>(2, 1)}, 2);
    scan_ok = ob->witness == e1 || ob->witness == e2;
  }
  return {spec_ok && odd_ok && cesaro_ok && scan_ok,
          std::string("peripheral ") + (spec_ok ? "{5,-5}" : "mismatch") + ", min odd-n gap " + fmt(min_odd_gap, 4) +
              ", Cesaro " + fmt(cesaro, 6) + " vs " + fmt(target, 6) + ", obstruction " +
              (ob ? "n=" + std::to_string(ob->n) : std::string("none")) + (scan_ok ? " on a coordinate axis" : "")};
}

inline Outcome zero_entropy() {
  const auto t = builtins::nilpotent2();
  const auto ps = zero_entropy_structure(t);
  const bool ps_ok = ps && ps->n == 2 && ps->r == 1 && ps->omega == Word{1, 2} && thermoform::detail::verify_periodic(t, *ps);
  const double p = pressure_exact_even(t, 1);
  const auto ent = entropy_estimate(kusuoka_measure(t), 10);
  const double h = ent.back().conditional;
  return {ps_ok && std::fabs(p) <= 1e-12 && h <= 1e-9,
          std::string("periodic structure ") + (ps_ok ? "n=2 r=1 omega=(1,2) verified" : "missing") +
              ", P(2)=" + fmt(p, 3) + ", H_10-H_9=" + fmt(h, 3) + " (H_10/10=" + fmt(ent.back().shannon, 4) + ")"};
}

inline Outcome jsr_bracket_check() {
  const auto a = jsr_bracket(builtins::notmix2(), 2);
  const auto b = jsr_bracket(builtins::nilpotent2(), 2);
  const bool ok = std::fabs(a.lower - 2) <= 1e-12 && std::fabs(a.upper - 2) <= 1e-12 &&
                  std::fabs(b.lower - 1) <= 1e-12 && std::fabs(b.upper - 1) <= 1e-12;
  return {ok, "notmix2 [" + fmt(a.lower, 15) + "," + fmt(a.upper, 15) + "], nilpotent2 [" + fmt(b.lower, 15) + "," +
                  fmt(b.upper, 15) + "] at N=2"};
}

inline Outcome bernoulli_counterexample() {
  const auto v = multiplicative_sr_check(builtins::alpha(Rational(3, 5), Rational(4, 5)), 3);
  if (!v.counterexample) return {false, "no counterexample found up to L=3"};
  const auto& c = *v.counterexample;
  const bool ok = c.w1 == Word{1} && c.w2 == Word{2} && std::fabs(c.rho_product - 16.0 / 25) <= 1e-12 &&
                  std::fabs(c.rho_w1 * c.rho_w2 - 12.0 / 25) <= 1e-12;
  return {ok, "pair " + to_string(c.w1) + "," + to_string(c.w2) + " rho(product)=" + fmt(c.rho_product, 15) +
                  " rho*rho=" + fmt(c.rho_w1 * c.rho_w2, 15)};
}

inline Outcome conformal_round_trip() {
  std::mt19937_64 rng(20240917);
  std::size_t recovered = 0;
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t d = 2 + static_cast<std::size_t>(k % 2);
    std::vector<Matrix<Rational>> ms;
    for (int i = 0; i < 2; ++i) {
      Rational c = random::random_rational(rng, 3, 3);
      while (c == 0) c = random::random_rational(rng, 3, 3);
      ms.push_back(random::random_rational_orthogonal(rng, d) * c);
    }
    Matrix<Rational> b = random::random_matrix(rng, d, 3, 3);
    while (determinant(b) == 0) b = random::random_matrix(rng, d, 3, 3);
    const auto v = conformal_conjugacy_check(conjugate_tuple(MatrixTuple<Rational>(ms), b));
    if (v.found() && v.residual <= 1e-8) ++recovered;
    worst = std::max(worst, v.residual);
  }
  const auto nm = conformal_conjugacy_check(builtins::notmix2());
  const bool nm_ok = !nm.found() && nm.fixed_space_dim == 1;
  return {recovered == 100 && nm_ok, std::to_string(recovered) + "/100 recovered, worst residual " + fmt(worst, 3) +
                                         "; notmix2 " + (nm.found() ? "conjugator" : "None") + " with fixed space dim " +
                                         std::to_string(nm.fixed_space_dim)};
}

inline Outcome s_independence() {
  const auto r4 = s_independence_check(builtins::rankone4(), 6);
  const auto nil = s_independence_check(builtins::nilpotent2(), 6);
  const auto nm = s_independence_check(builtins::notmix2(), 6);
  const bool ok = r4.lambda && std::fabs(*r4.lambda) <= 1e-12 && nil.lambda && std::fabs(*nil.lambda) <= 1e-12 &&
                  !nm.lambda && nm.violation.has_value();
  std::string d = "rankone4 lambda=" + (r4.lambda ? fmt(*r4.lambda, 3) : std::string("None")) +
                  ", nilpotent2 lambda=" + (nil.lambda ? fmt(*nil.lambda, 3) : std::string("None")) + ", notmix2 ";
  d += nm.violation ? "None, witness " + to_string(nm.violation->first) + " vs " + to_string(nm.violation->second)
                    : std::string("no witness");
  return {ok, d};
}

inline Outcome correlation_oracle() {
  std::mt19937_64 rng(424242);
  std::size_t done = 0, skipped = 0;
  double worst = 0;
  while (done < 200) {
    std::uniform_int_distribution<int> dd(1, 3), mm(2, 3), len(1, 2);
    const auto d = static_cast<std::size_t>(dd(rng));
    const auto M = static_cast<std::size_t>(mm(rng));
    const auto t = random::random_tuple(rng, M, d);
    const Word x = random::random_word(rng, M, static_cast<std::size_t>(len(rng)));
    const Word y = random::random_word(rng, M, static_cast<std::size_t>(len(rng)));
    const auto n = static_cast<std::size_t>(std::uniform_int_distribution<int>(static_cast<int>(x.size()), 6)(rng));
    try {
      const auto kd = kusuoka_measure(t);
      worst = std::max(worst, std::fabs(correlation(kd, x, y, n) - correlation_bruteforce(kd, x, y, n)));
      ++done;
    } catch (const DegenerateEigenmatrix&) {
      ++skipped;
    }
  }
  return {worst <= 1e-10, "max |closed form - brute force| = " + fmt(worst, 3) + " over 200 tuples (" +
                              std::to_string(skipped) + " reducible draws replaced)"};
}

inline Outcome eigen_quality() {
  double worst_res = 0, min_eig = 1e300;
  for (const auto& t : irreducible_builtins()) {
    const auto kd = kusuoka_measure(t);
    worst_res = std::max({worst_res, kd.residual, kd.residual_hat});
    min_eig = std::min({min_eig, min_eigenvalue_symmetric(kd.Q), min_eigenvalue_symmetric(kd.Qhat)});
  }
  bool raised = false;
  try {
    kusuoka_measure(builtins::diagpair());
  } catch (const DegenerateEigenmatrix&) {
    raised = true;
  }
  return {worst_res <= 1e-10 && min_eig > 0 && raised,
          "max residual " + fmt(worst_res, 3) + ", min eigenvalue " + fmt(min_eig, 4) + ", diagpair " +
              (raised ? "raised DegenerateEigenmatrix" : "did not raise")};
}

}  // namespace detail

inline std::vector<Criterion> criteria() {
  return {
      {1, "pressure identity (notmix2)", detail::pressure_identity},
      {2, "Kusuoka cylinder exactness", detail::cylinder_exactness},
      {3, "measure consistency", detail::measure_consistency},
      {4, "Gibbs sandwich", detail::gibbs_sandwich},
      {5, "non-mixing evidence (notmix2)", detail::non_mixing_evidence},
      {6, "zero entropy (nilpotent2)", detail::zero_entropy},
      {7, "JSR bracket", detail::jsr_bracket_check},
      {8, "Bernoulli counterexample (alpha)", detail::bernoulli_counterexample},
      {9, "conformal round trip", detail::conformal_round_trip},
      {10, "s-independence", detail::s_independence},
      {11, "correlation oracle", detail::correlation_oracle},
      {12, "eigen quality", detail::eigen_quality},
  };
}

inline CriterionResult run(const Criterion& c) {
  CriterionResult r{c.id, c.title, false, {}, 0};
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const auto o = c.run();
    r.pass = o.pass;
    r.detail = o.detail;
  } catch (const std::exception& e) {
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = detail::seconds_since(t0);
  return r;
}

inline std::vector<CriterionResult> run_all() {
  std::vector<CriterionResult> out;
  for (const auto& c : criteria()) out.push_back(run(c));
  return out;
}

inline std::string format_line(const CriterionResult& r) {
  std::ostringstream os;
  os << (r.pass ? "PASS" : "FAIL") << "  criterion " << r.id << ": " << r.title << " | " << r.detail << " ["
     << detail::fmt(r.seconds, 3) << "s]";
  return os.str();
}

}  // namespace thermoform::acceptance
