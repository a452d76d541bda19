#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "thermoform/kusuoka.hpp"
#include "thermoform/pressure.hpp"
#include "thermoform/structure.hpp"

namespace thermoform {

// ---------------------------------------------------------------------------
// Zero-entropy periodic structure

template <Scalar T>
struct PeriodicStructure {
  std::size_t n = 0;  ///< period, divides d
  std::size_t r = 0;  ///< dim R_j, n·r = d
  Word omega;
  std::vector<Subspace<T>> R;
};

namespace detail {

inline Word rotate(const Word& w, std::size_t k) {
  Word out;
  for (std::size_t i = 0; i < w.size(); ++i) out.symbols.push_back(w[(i + k) % w.size()]);
  return out;
}

template <Scalar T>
Matrix<T> matrix_power(const Matrix<T>& a, std::size_t k) {
  Matrix<T> out = Matrix<T>::identity(a.rows());
  for (std::size_t i = 0; i < k; ++i) out = a * out;
  return out;
}

template <Scalar T>
Subspace<T> column_space(const Matrix<T>& m) {
  std::vector<Vector<T>> cols;
  for (std::size_t j = 0; j < m.cols(); ++j) cols.push_back(m.column(j));
  return Subspace<T>::span(cols, m.rows());
}

template <Scalar T>
bool verify_periodic(const MatrixTuple<T>& t, const PeriodicStructure<T>& ps) {
  const std::size_t n = ps.n;
  for (std::size_t j = 0; j < n; ++j) {
    const auto& Rj = ps.R[j];
    if (Rj.dim() != ps.r) return false;
    for (int i = 1; i <= static_cast<int>(t.size()); ++i) {
      const auto img = Rj.image(t.symbol(i));
      if (i == ps.omega[j]) {
        if (!(img == ps.R[(j + 1) % n])) return false;
      } else if (img.dim() != 0) {
        return false;
      }
    }
    // the return product restricted to R_j is onto R_j
    const auto ret = word_product(t, rotate(ps.omega, j));
    if (!(Rj.image(ret) == Rj)) return false;
  }
  return ps.n * ps.r == t.dim();
}

}  // namespace detail

/// Periodic-orbit structure of a zero-entropy equilibrium state, searched over
/// periods n dividing d in increasing order; every clause is re-verified.
template <Scalar T>
std::optional<PeriodicStructure<T>> zero_entropy_structure(const MatrixTuple<T>& t, const Budget& budget = {}) {
  const std::size_t d = t.dim();
  for (std::size_t n = 1; n <= d; ++n) {
    if (d % n) continue;
    std::set<Word> nonzero;
    for (const Word& w : enumerate_words(t.size(), n, budget))
      if (!is_zero_word(t, w, word_product(t, w))) nonzero.insert(w);
    if (nonzero.empty()) continue;
    const Word omega = *nonzero.begin();
    std::set<Word> cyclic;
    for (std::size_t k = 0; k < n; ++k) cyclic.insert(detail::rotate(omega, k));
    if (cyclic != nonzero) continue;

    PeriodicStructure<T> ps;
    ps.n = n;
    ps.omega = omega;
    for (std::size_t j = 0; j < n; ++j) {
      // the rotation starting at ω_j ends with A_{ω_{j-1}}, whose image is R_j
      const auto ret = word_product(t, detail::rotate(omega, j));
      ps.R.push_back(detail::column_space(detail::matrix_power(ret, d)));
    }
    ps.r = ps.R.front().dim();
    if (ps.r == 0) continue;
    if (detail::verify_periodic(t, ps)) return ps;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Multiplicativity of the spectral radius

struct CounterexamplePair {
  Word w1, w2;
  double defect = 0;  ///< relative |ρ(A_{w1}A_{w2}) − ρ(A_{w1})ρ(A_{w2})|
  double rho_product = 0, rho_w1 = 0, rho_w2 = 0;
};

struct MultiplicativeVerdict {
  std::optional<CounterexamplePair> counterexample;
  std::size_t L = 0;
  std::size_t pairs_tested = 0;

  bool holds() const { return !counterexample.has_value(); }
};

/// All ordered pairs with 1 ≤ |w1|, |w2| ≤ L in shortlex order; the first
/// violation of ρ(A_{w1}A_{w2}) = ρ(A_{w1})ρ(A_{w2}) is returned.
template <Scalar T>
MultiplicativeVerdict multiplicative_sr_check(const MatrixTuple<T>& t, std::size_t L, double tol = 1e-9,
                                              const Budget& budget = {}) {
  if (L < 1) throw InvalidInput("multiplicative_sr_check needs L >= 1");
  const double nw = word_count(t.size(), 1, L);
  require_budget("multiplicative spectral radius pairs", nw * nw, budget);
  std::vector<std::pair<Word, Matrix<T>>> words;
  for (std::size_t n = 1; n <= L; ++n)
    for (const Word& w : enumerate_words(t.size(), n)) words.emplace_back(w, word_product(t, w));
  std::vector<double> rho;
  for (const auto& [w, p] : words) rho.push_back(spectral_radius(p));

  MultiplicativeVerdict v;
  v.L = L;
  for (std::size_t i = 0; i < words.size(); ++i)
    for (std::size_t j = 0; j < words.size(); ++j) {
      ++v.pairs_tested;
      const double prod = spectral_radius(Matrix<T>(words[i].second * words[j].second));
      const double expect = rho[i] * rho[j];
      const double scale = std::max(prod, expect);
      const double defect = scale > 0 ? std::fabs(prod - expect) / scale : 0.0;
      if (defect > tol) {
        v.counterexample = CounterexamplePair{words[i].first, words[j].first, defect, prod, rho[i], rho[j]};
        return v;
      }
    }
  return v;
}

/// max |μ([w]) − Π μ([w_k])| over 1 ≤ |w| ≤ L.
template <Scalar T>
double bernoulli_defect(const KusuokaData<T>& kd, std::size_t L, const Budget& budget = {}) {
  const auto tab = cylinder_table(kd, L, budget);
  double worst = 0;
  for (std::size_t n = 1; n <= L; ++n)
    for (const Word& w : enumerate_words(kd.size(), n)) {
      double prod = 1;
      for (int s : w.symbols) prod *= tab.mass[1][static_cast<std::size_t>(s - 1)];
      worst = std::max(worst, std::fabs(tab.at(w) - prod));
    }
  return worst;
}

// ---------------------------------------------------------------------------
// Conformal conjugacy

struct ConformalVerdict {
  std::optional<Matrix<double>> conjugator;  ///< B with |det A_i|^{-1/d}B⁻¹A_iB orthogonal
  std::string reason;                        ///< why no conjugator was returned
  std::size_t fixed_space_dim = 0;
  bool exact_kernel = false;
  double residual = 0;

  bool found() const { return conjugator.has_value(); }
};

namespace detail {

/// Unnormalized symmetric basis E_ii, E_ij + E_ji.
inline std::vector<std::pair<std::size_t, std::size_t>> sym_index(std::size_t d) {
  std::vector<std::pair<std::size_t, std::size_t>> idx;
  for (std::size_t i = 0; i < d; ++i) idx.emplace_back(i, i);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) idx.emplace_back(i, j);
  return idx;
}

template <Scalar T>
Matrix<T> sym_element(std::size_t d, std::size_t i, std::size_t j) {
  Matrix<T> e(d, d);
  e(i, j) = T(1);
  e(j, i) = T(1);
  return e;
}

/// Rational c with c^d = x when it exists.
inline std::optional<Rational> rational_root(const Rational& x, std::size_t d) {
  if (x < 0) return std::nullopt;
  if (x == 0) return Rational(0);
  const double guess = std::pow(to_double(x), 1.0 / static_cast<double>(d));
  const Rational c = rationalize(guess);
  Rational p(1);
  for (std::size_t k = 0; k < d; ++k) p *= c;
  if (p == x) return c;
  return std::nullopt;
}

inline bool positive_definite(const Matrix<double>& g) {
  const double fro = frobenius_norm(g);
  return fro > 0 && min_eigenvalue_symmetric(g) > 1e-10 * fro;
}

inline std::optional<Matrix<double>> find_positive_definite(const std::vector<Matrix<double>>& basis,
                                                             std::uint64_t seed = 0xc0ffeeULL) {
  for (const auto& b : basis) {
    if (positive_definite(b)) return b;
    if (positive_definite(b * -1.0)) return b * -1.0;
  }
  const std::size_t k = basis.size();
  const std::size_t d = basis.front().rows();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 256; ++trial) {
    Matrix<double> m(d, d);
    for (const auto& b : basis) m += b * g(rng);
    if (positive_definite(m)) return m;
  }
  constexpr int kSteps = 360;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j)
      for (int s = 0; s < kSteps; ++s) {
        const double th = 2 * 3.14159265358979323846 * s / kSteps;
        Matrix<double> m = basis[i] * std::cos(th) + basis[j] * std::sin(th);
        if (positive_definite(m)) return m;
      }
  return std::nullopt;
}

}  // namespace detail

/// Joint fixed space of G ↦ |det A_i|^{-2/d}A_iᵀGA_i, a positive-definite G in
/// it, and B = G^{-1/2}, verified by the orthogonality residual.
template <Scalar T>
ConformalVerdict conformal_conjugacy_check(const MatrixTuple<T>& t, double tol = 1e-8) {
  ConformalVerdict v;
  const std::size_t d = t.dim();
  const auto idx = detail::sym_index(d);
  const std::size_t m = idx.size();

  std::vector<T> dets;
  for (const auto& a : t) {
    dets.push_back(determinant(a));
    if (dets.back() == T(0) || (!is_exact_v<T> && std::fabs(to_double(dets.back())) < 1e-300)) {
      v.reason = "NotInvertible";
      return v;
    }
  }

  std::vector<Matrix<double>> fixed;
  bool exact_done = false;
  if constexpr (is_exact_v<T>) {
    std::vector<Rational> scale;
    for (const auto& det : dets) {
      auto c = detail::rational_root(Rational(det * det), d);
      if (!c) break;
      scale.push_back(*c);
    }
    if (scale.size() == t.size()) {
      Matrix<Rational> sys(m * t.size(), m);
      for (std::size_t i = 0; i < t.size(); ++i)
        for (std::size_t col = 0; col < m; ++col) {
          const auto e = detail::sym_element<Rational>(d, idx[col].first, idx[col].second);
          const Matrix<Rational> img = t[i].transpose() * e * t[i] - scale[i] * e;
          // coordinates in the unnormalized basis: diagonal entries and upper entries
          for (std::size_t row = 0; row < m; ++row) sys(i * m + row, col) = img(idx[row].first, idx[row].second);
        }
      for (const auto& vec : nullspace(sys)) {
        Matrix<double> g(d, d);
        for (std::size_t k = 0; k < m; ++k) {
          const double c = to_double(vec[k]);
          g(idx[k].first, idx[k].second) += c;
          if (idx[k].first != idx[k].second) g(idx[k].second, idx[k].first) += c;
        }
        fixed.push_back(g);
      }
      exact_done = true;
      v.exact_kernel = true;
    }
  }
  if (!exact_done) {
    Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m * t.size()), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < t.size(); ++i) {
      const Matrix<double> a = to_double(t[i]);
      const double c = std::pow(std::fabs(to_double(dets[i])), 2.0 / static_cast<double>(d));
      for (std::size_t col = 0; col < m; ++col) {
        const auto e = detail::sym_element<double>(d, idx[col].first, idx[col].second);
        const Matrix<double> img = (a.transpose() * e * a) * (1.0 / c) - e;
        for (std::size_t row = 0; row < m; ++row)
          sys(static_cast<Eigen::Index>(i * m + row), static_cast<Eigen::Index>(col)) =
              img(idx[row].first, idx[row].second);
      }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double smax = s.size() ? std::max(s(0), 1.0) : 1.0;
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(m); ++k) {
      const double sk = k < s.size() ? s(k) : 0.0;
      if (sk > 1e-10 * smax) continue;
      Matrix<double> g(d, d);
      for (std::size_t q = 0; q < m; ++q) {
        const double c = svd.matrixV()(static_cast<Eigen::Index>(q), k);
        g(idx[q].first, idx[q].second) += c;
        if (idx[q].first != idx[q].second) g(idx[q].second, idx[q].first) += c;
      }
      fixed.push_back(g);
    }
  }
  v.fixed_space_dim = fixed.size();
  if (fixed.empty()) {
    v.reason = "joint fixed space is {0}";
    return v;
  }
  auto g = detail::find_positive_definite(fixed);
  if (!g) {
    v.reason = "NoPositiveDefiniteElement";
    return v;
  }
  *g *= static_cast<double>(d) / g->trace();
  const Matrix<double> b = inverse_sqrt_symmetric(*g);
  const Matrix<double> b_inv = inverse(b);
  double residual = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double c = std::pow(std::fabs(to_double(dets[i])), -1.0 / static_cast<double>(d));
    const Matrix<double> o = (b_inv * to_double(t[i]) * b) * c;
    residual = std::max(residual, to_double(max_abs(Matrix<double>(o.transpose() * o - Matrix<double>::identity(d)))));
  }
  v.residual = residual;
  if (residual > tol) {
    v.reason = "orthogonality residual " + std::to_string(residual) + " exceeds tolerance";
    return v;
  }
  v.conjugator = b;
  return v;
}

// ---------------------------------------------------------------------------
// Equality of equilibrium states, s-independence, maximal entropy

namespace detail {

/// P(A, s): exact when s is even or d = 1, else the bracket midpoint when the
/// bracket is narrower than tol.
template <Scalar T>
double pressure_value(const MatrixTuple<T>& t, double s, std::size_t N, double tol, const Budget& budget) {
  EnumerationOptions o;
  o.budget = budget;
  const auto b = pressure_bracket(t, s, N, o);
  if (b.exact) return *b.exact;
  if (b.width() < tol) return 0.5 * (b.upper + b.periodic_lower);
  throw UnsupportedPrecision("pressure at s = " + std::to_string(s) + " is only bracketed to width " +
                             std::to_string(b.width()));
}

}  // namespace detail

struct EqualityVerdict {
  bool equal = true;
  std::optional<Word> violation;
  double pressure_a = 0, pressure_b = 0;
  double max_defect = 0;
};

/// e^{−nP(A,s)}ρ(A_w)^s = e^{−nP(B,t)}ρ(B_w)^t for all |w| ≤ N.
template <Scalar TA, Scalar TB>
EqualityVerdict equilibrium_equality_check(const MatrixTuple<TA>& a, double s, const MatrixTuple<TB>& b, double t,
                                           std::size_t N, double tol = 1e-9, const Budget& budget = {}) {
  if (a.size() != b.size()) throw InvalidInput("tuples must have the same number of matrices");
  EqualityVerdict v;
  v.pressure_a = detail::pressure_value(a, s, N, tol, budget);
  v.pressure_b = detail::pressure_value(b, t, N, tol, budget);
  require_budget("equality check", word_count(a.size(), 1, N), budget);
  for (std::size_t n = 1; n <= N; ++n)
    for (const Word& w : enumerate_words(a.size(), n)) {
      const double dn = static_cast<double>(n);
      const double ra = spectral_radius(word_product(a, w));
      const double rb = spectral_radius(word_product(b, w));
      const double xa = ra > 0 ? std::exp(s * std::log(ra) - dn * v.pressure_a) : 0.0;
      const double xb = rb > 0 ? std::exp(t * std::log(rb) - dn * v.pressure_b) : 0.0;
      const double defect = std::fabs(xa - xb) / std::max({1e-300, xa, xb});
      v.max_defect = std::max(v.max_defect, defect);
      if (defect > tol && !v.violation) {
        v.equal = false;
        v.violation = w;
      }
    }
  return v;
}

struct SIndependenceVerdict {
  std::optional<double> lambda;  ///< log of the common value of ρ(A_w)^{1/|w|}
  std::optional<std::pair<Word, Word>> violation;
  std::size_t N = 0;
};

/// Nonzero ρ(A_w)^{1/|w|} over |w| ≤ N all equal (within tol) to e^λ.
template <Scalar T>
SIndependenceVerdict s_independence_check(const MatrixTuple<T>& t, std::size_t N, double tol = 1e-9,
                                          const Budget& budget = {}) {
  if (N < 1) throw InvalidInput("s_independence_check needs N >= 1");
  require_budget("s-independence scan", word_count(t.size(), 1, N), budget);
  SIndependenceVerdict v;
  v.N = N;
  std::optional<std::pair<Word, double>> ref;
  for (std::size_t n = 1; n <= N; ++n)
    for (const Word& w : enumerate_words(t.size(), n)) {
      const auto p = word_product(t, w);
      const double rho = spectral_radius(p);
      // floating nilpotent products leave ρ at the square root of roundoff
      const bool zero = is_exact_v<T> ? rho == 0.0 : rho <= 1e-7 * std::max(operator_norm(p), 1e-300);
      if (zero) continue;
      const double val = std::pow(rho, 1.0 / static_cast<double>(n));
      if (!ref) {
        ref = std::make_pair(w, val);
      } else if (std::fabs(val - ref->second) > tol * ref->second) {
        v.violation = std::make_pair(ref->first, w);
        return v;
      }
    }
  if (ref) v.lambda = std::log(ref->second);
  return v;
}

struct MaximalEntropyVerdict {
  bool maximal = false;
  double max_defect = 0;
  std::optional<Word> witness;
};

/// μ([w]) = M^{−|w|} for all |w| ≤ n_max.
template <Scalar T>
MaximalEntropyVerdict maximal_entropy_check(const KusuokaData<T>& kd, std::size_t n_max, double tol = 1e-9,
                                            const Budget& budget = {}) {
  MaximalEntropyVerdict v;
  const double M = static_cast<double>(kd.size());
  for_each_cylinder(
      kd, n_max,
      [&](const CylinderVisit<T>& c) {
        const double defect = std::fabs(c.measure - std::pow(M, -static_cast<double>(c.word.size())));
        if (defect > v.max_defect) {
          v.max_defect = defect;
          if (defect > tol) v.witness = c.word;
        }
      },
      budget);
  v.maximal = v.max_defect <= tol;
  return v;
}

// ---------------------------------------------------------------------------
// Aggregate report

struct ClassificationOptions {
  std::size_t support_N = 8;
  std::size_t mixing_N = 3;
  std::size_t bernoulli_L = 3;
  std::size_t s_independence_N = 6;
  std::size_t n_max = 6;
  double tol = 1e-9;
  Budget budget{};
  SearchBudget search{};
};

struct CrossCheck {
  std::string name;
  bool ok = true;
  std::string detail;
};

template <Scalar T>
struct ClassificationReport {
  // each field is empty when its sub-check raised; the message is in `errors`
  std::optional<std::optional<Word>> support;
  std::optional<IrreducibilityVerdict<T>> irreducibility;
  std::optional<std::optional<MixingObstruction<T>>> mixing_obstruction;
  std::optional<std::optional<PeriodicStructure<T>>> zero_entropy;
  std::optional<MultiplicativeVerdict> bernoulli;
  std::optional<ConformalVerdict> conformal;
  std::optional<SIndependenceVerdict> s_independence;
  std::optional<MaximalEntropyVerdict> maximal_entropy;
  std::optional<PeripheralSpectrum> peripheral;
  std::map<std::string, std::string> errors;
  std::vector<CrossCheck> cross_checks;
  ClassificationOptions options;

  bool consistent() const {
    return std::all_of(cross_checks.begin(), cross_checks.end(), [](const CrossCheck& c) { return c.ok; });
  }
};

template <Scalar T>
ClassificationReport<T> classification_report(const MatrixTuple<T>& t, const ClassificationOptions& opt = {}) {
  ClassificationReport<T> r;
  r.options = opt;
  auto guard = [&](const char* name, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      r.errors[name] = e.what();
    }
  };
  guard("support", [&] { r.support = zero_product_search(t, opt.support_N, opt.budget); });
  guard("irreducibility", [&] { r.irreducibility = find_invariant_subspace(t, opt.search); });
  guard("mixing_obstruction",
        [&] { r.mixing_obstruction = mixing_obstruction_scan(t, opt.mixing_N, opt.budget, opt.search); });
  guard("zero_entropy", [&] { r.zero_entropy = zero_entropy_structure(t, opt.budget); });
  guard("bernoulli", [&] { r.bernoulli = multiplicative_sr_check(t, opt.bernoulli_L, opt.tol, opt.budget); });
  guard("conformal", [&] { r.conformal = conformal_conjugacy_check(t); });
  guard("s_independence", [&] { r.s_independence = s_independence_check(t, opt.s_independence_N, opt.tol, opt.budget); });
  guard("peripheral", [&] { r.peripheral = peripheral_spectrum(t, 1e-9, opt.budget); });

  std::optional<KusuokaData<T>> kd;
  guard("kusuoka", [&] { kd = kusuoka_measure(t); });
  if (kd) {
    guard("maximal_entropy", [&] { r.maximal_entropy = maximal_entropy_check(*kd, opt.n_max, opt.tol, opt.budget); });

    if (r.conformal && r.conformal->found()) {
      CrossCheck c{"conformal => equal Lyapunov exponents", true, {}};
      guard("lyapunov_spectrum", [&] {
        const std::size_t n = std::min<std::size_t>(4, opt.n_max);
        const auto spec = lyapunov_spectrum(*kd, n, opt.budget);
        const auto& row = spec.back();
        const double spread = *std::max_element(row.begin(), row.end()) - *std::min_element(row.begin(), row.end());
        // conjugation distorts singular values of every product by at most κ(B)²
        const auto sv = singular_values(*r.conformal->conjugator);
        const double allowance = 2.0 * std::log(sv.front() / sv.back()) / static_cast<double>(n);
        c.ok = spread <= allowance + 1e-9;
        c.detail = "exponent spread " + std::to_string(spread) + " allowance " + std::to_string(allowance);
      });
      r.cross_checks.push_back(c);
    }
    if (r.zero_entropy && r.zero_entropy->has_value()) {
      CrossCheck c{"zero-entropy structure => entropy estimate near 0", true, {}};
      guard("entropy", [&] {
        const std::size_t n = 2 * (*r.zero_entropy)->n;
        const auto ent = entropy_estimate(*kd, n, opt.budget);
        c.ok = ent.back().conditional <= 1e-9;
        c.detail = "conditional entropy at n=" + std::to_string(n) + ": " + std::to_string(ent.back().conditional);
      });
      r.cross_checks.push_back(c);
    }
    if (r.bernoulli && !r.bernoulli->holds() && r.maximal_entropy) {
      const bool orthogonal_case = r.conformal && r.conformal->found();
      r.cross_checks.push_back({"counterexample pair => not maximal entropy",
                                !r.maximal_entropy->maximal || orthogonal_case,
                                r.maximal_entropy->maximal ? "maximal entropy despite counterexample" : "consistent"});
    }
    if (r.bernoulli && r.bernoulli->holds()) {
      CrossCheck c{"multiplicative spectral radius => Bernoulli cylinders", true, {}};
      guard("bernoulli_cylinders", [&] {
        const double def = bernoulli_defect(*kd, opt.bernoulli_L, opt.budget);
        c.ok = def <= 1e-8;
        c.detail = "max defect " + std::to_string(def);
      });
      r.cross_checks.push_back(c);
    }
  }
  return r;
}

}  // namespace thermoform
