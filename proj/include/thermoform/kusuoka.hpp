#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "thermoform/pressure.hpp"
#include "thermoform/spectral.hpp"
#include "thermoform/tuple.hpp"

namespace thermoform {

enum class Side {
  Transpose,  ///< L: B ↦ Σ A_iᵀ B A_i
  Plain,      ///< L̂: B ↦ Σ A_i B A_iᵀ
};

inline const char* to_string(Side s) { return s == Side::Transpose ? "transpose" : "plain"; }

/// Linear map on symmetric d×d matrices, stored in the Frobenius-orthonormal
/// basis E_ii, (E_ij + E_ji)/√2 (i < j).
struct SymOperator {
  Eigen::MatrixXd matrix;
  std::size_t d = 0;
  Side side = Side::Transpose;

  std::size_t size() const { return d * (d + 1) / 2; }

  Eigen::VectorXd coords(const Matrix<double>& b) const {
    Eigen::VectorXd v(size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < d; ++i) v(k++) = b(i, i);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i + 1; j < d; ++j) v(k++) = std::sqrt(2.0) * 0.5 * (b(i, j) + b(j, i));
    return v;
  }

  Matrix<double> matrix_of(const Eigen::VectorXd& v) const {
    Matrix<double> b(d, d);
    std::size_t k = 0;
    for (std::size_t i = 0; i < d; ++i) b(i, i) = v(k++);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i + 1; j < d; ++j) b(i, j) = b(j, i) = v(k++) / std::sqrt(2.0);
    return b;
  }

  Matrix<double> apply(const Matrix<double>& b) const { return matrix_of(matrix * coords(b)); }
};

template <Scalar T>
Matrix<double> apply_transfer(const MatrixTuple<T>& t, const Matrix<double>& b, Side side) {
  Matrix<double> out(t.dim(), t.dim());
  for (const auto& a_exact : t) {
    const Matrix<double> a = to_double(a_exact);
    out += side == Side::Transpose ? Matrix<double>(a.transpose() * b * a) : Matrix<double>(a * b * a.transpose());
  }
  return out;
}

template <Scalar T>
SymOperator build_transfer_operator(const MatrixTuple<T>& t, Side side) {
  SymOperator op;
  op.d = t.dim();
  op.side = side;
  const std::size_t m = op.size();
  op.matrix = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < m; ++k) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    e(static_cast<Eigen::Index>(k)) = 1.0;
    op.matrix.col(static_cast<Eigen::Index>(k)) = op.coords(apply_transfer(t, op.matrix_of(e), side));
  }
  return op;
}

struct PerronResult {
  double eigenvalue = 0;
  Matrix<double> eigenmatrix;  ///< unit Frobenius norm, positive trace
  double residual = 0;         ///< ‖L Q − λ Q‖_F for the unit-norm Q
  std::size_t iterations = 0;
};

namespace detail {

/// Positive root of Σ_{k<d} λ^k = target.
inline double deflate_accelerated(double target, std::size_t d) {
  if (d == 1) return target;  // 𝓛 = Id; caller never uses this branch
  auto f = [&](double x) {
    double s = 0, p = 1;
    for (std::size_t k = 0; k < d; ++k, p *= x) s += p;
    return s - target;
  };
  double lo = 0, hi = std::max(1.0, target);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Perron eigenpair of L on the positive-semidefinite cone by power iteration
/// on 𝓛 = Σ_{k<d} L^k, then a shifted inverse-iteration polish.
inline PerronResult perron_eigen(const SymOperator& op, double tol = 1e-12, std::size_t max_iter = 10000) {
  const auto m = static_cast<Eigen::Index>(op.size());
  const Eigen::MatrixXd& L = op.matrix;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(m, m);
  if (op.d > 1) {
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(m, m);
    for (std::size_t k = 1; k < op.d; ++k) {
      power = L * power;
      acc += power;
    }
  } else {
    acc = L;
  }

  auto eigenvalue_of = [&](const Eigen::VectorXd& x) {
    if (op.d == 1 || op.d > 4) return x.dot(L * x) / x.squaredNorm();
    const double lam_acc = x.dot(acc * x) / x.squaredNorm();
    return detail::deflate_accelerated(lam_acc, op.d);
  };
  auto residual_of = [&](const Eigen::VectorXd& x, double lam) { return (L * x - lam * x).norm() / x.norm(); };
  auto converged = [&](double res, double lam) { return res <= tol * std::max(1.0, lam); };

  PerronResult r;
  Eigen::VectorXd x = op.coords(Matrix<double>::identity(op.d));
  x.normalize();
  double lam = eigenvalue_of(x);
  double res = residual_of(x, lam);
  double best = res;
  std::size_t since_best = 0;
  std::size_t it = 0;
  for (; it < max_iter && !converged(res, lam); ++it) {
    Eigen::VectorXd y = acc * x;
    const double nrm = y.norm();
    if (!(nrm > 0) || !std::isfinite(nrm)) break;
    x = y / nrm;
    lam = eigenvalue_of(x);
    res = residual_of(x, lam);
    if (res < best * 0.999) {
      best = res;
      since_best = 0;
    } else if (++since_best > 50) {
      break;  // stalled
    }
    if (it > 200 && res < 1e-6 * std::max(1.0, lam)) break;
  }
  if (lam > 0) {
    for (int polish = 0; polish < 8 && (polish < 2 || !converged(res, lam)); ++polish) {
      const double shift = lam * (1 + 1e-9) + 1e-14;
      const Eigen::MatrixXd shifted = L - shift * Eigen::MatrixXd::Identity(m, m);
      Eigen::VectorXd y = shifted.partialPivLu().solve(x);
      if (!y.allFinite() || y.norm() == 0) break;
      y.normalize();
      if (y.dot(x) < 0) y = -y;
      const double lam_y = eigenvalue_of(y);
      const double res_y = residual_of(y, lam_y);
      ++it;
      if (res_y > res && converged(res, lam)) break;
      x = y;
      lam = lam_y;
      res = res_y;
    }
  }
  if (!converged(res, lam)) throw NotConverged("perron_eigen", static_cast<int>(max_iter));

  Matrix<double> q = op.matrix_of(x);
  if (q.trace() < 0) q *= -1.0;
  r.eigenvalue = lam;
  r.eigenmatrix = q;
  r.residual = res;
  r.iterations = it;
  return r;
}

/// Equilibrium state at s = 2: Perron data for L and L̂ with tr(Q Q̂) = 1,
/// Q̂ of unit Frobenius norm, Q = UᵀU and Q̂ = ÛᵀÛ (U, Û upper triangular).
template <Scalar T>
struct KusuokaData {
  MatrixTuple<T> tuple;
  MatrixTuple<double> dtuple;
  SymOperator L, Lhat;
  double lambda = 0;      ///< e^P
  double lambda_hat = 0;  ///< Perron value of L̂ (equal to λ up to tolerance)
  double pressure = 0;    ///< P(A, 2) = log λ
  Matrix<double> Q, Qhat, U, Uhat;
  double residual = 0, residual_hat = 0;
  double trace_QQhat = 0;
  double tol = 1e-12;

  std::size_t dim() const { return tuple.dim(); }
  std::size_t size() const { return tuple.size(); }
};

namespace detail {

inline Matrix<double> upper_cholesky(const Matrix<double>& q) {
  Eigen::LLT<Eigen::MatrixXd> llt(to_eigen(q));
  if (llt.info() != Eigen::Success) throw DegenerateEigenmatrix("Cholesky factorization failed", 0.0);
  Eigen::MatrixXd l = llt.matrixL();
  return from_eigen(l.transpose());
}

inline void require_definite(const Matrix<double>& q, double tol, const char* which) {
  const double fro = frobenius_norm(q);
  const double mn = min_eigenvalue_symmetric(q);
  if (mn <= tol * fro)
    throw DegenerateEigenmatrix(std::string(which) + " is not positive definite (min eigenvalue " +
                                std::to_string(mn) + "); the tuple is likely reducible",
                                mn);
}

}  // namespace detail

template <Scalar T>
KusuokaData<T> kusuoka_measure(const MatrixTuple<T>& t, double tol = 1e-12, std::size_t max_iter = 10000) {
  KusuokaData<T> kd{t, to_double(t), build_transfer_operator(t, Side::Transpose),
                    build_transfer_operator(t, Side::Plain)};
  kd.tol = tol;
  const auto pe = perron_eigen(kd.L, tol, max_iter);
  const auto ph = perron_eigen(kd.Lhat, tol, max_iter);
  if (!(pe.eigenvalue > 0)) throw DegenerateEigenmatrix("Perron eigenvalue is zero", 0.0);
  detail::require_definite(pe.eigenmatrix, tol, "Q");
  detail::require_definite(ph.eigenmatrix, tol, "Q-hat");

  kd.lambda = pe.eigenvalue;
  kd.lambda_hat = ph.eigenvalue;
  kd.pressure = std::log(kd.lambda);
  kd.Qhat = ph.eigenmatrix;
  double tr = 0;
  for (std::size_t i = 0; i < t.dim(); ++i)
    for (std::size_t j = 0; j < t.dim(); ++j) tr += pe.eigenmatrix(i, j) * kd.Qhat(j, i);
  kd.Q = pe.eigenmatrix * (1.0 / tr);
  kd.residual = pe.residual;
  kd.residual_hat = ph.residual;
  kd.U = detail::upper_cholesky(kd.Q);
  kd.Uhat = detail::upper_cholesky(kd.Qhat);
  kd.trace_QQhat = 0;
  for (std::size_t i = 0; i < t.dim(); ++i)
    for (std::size_t j = 0; j < t.dim(); ++j) kd.trace_QQhat += kd.Q(i, j) * kd.Qhat(j, i);
  return kd;
}

/// e^{−nP}·‖U A_w Ûᵀ‖_F² for a precomputed product; exact zero stays 0.
template <Scalar T>
double cylinder_measure_of(const KusuokaData<T>& kd, std::size_t n, const Matrix<T>& product, double bound) {
  if (is_zero_product(product, bound)) return 0.0;
  const Matrix<double> m = kd.U * to_double(product) * kd.Uhat.transpose();
  return to_double(frobenius_squared(m)) * std::exp(-static_cast<double>(n) * kd.pressure);
}

template <Scalar T>
double cylinder_measure(const KusuokaData<T>& kd, const Word& w) {
  if (w.empty()) return kd.trace_QQhat;
  return cylinder_measure_of(kd, w.size(), word_product(kd.tuple, w), product_magnitude_bound(kd.tuple, w));
}

/// μ of every cylinder up to length n_max, indexed by lexicographic rank.
struct CylinderTable {
  std::size_t M = 0;
  std::vector<std::vector<double>> mass;  ///< mass[n][rank]; mass[0] = {μ(∅)}

  static std::size_t rank(const Word& w, std::size_t M) {
    std::size_t r = 0;
    for (int s : w.symbols) r = r * M + static_cast<std::size_t>(s - 1);
    return r;
  }
  double at(const Word& w) const { return mass[w.size()][rank(w, M)]; }
  std::size_t max_length() const { return mass.size() - 1; }
};

/// Per-word data handed to cylinder visitors.
template <Scalar T>
struct CylinderVisit {
  const Word& word;
  const Matrix<T>& product;
  double measure;
  bool zero;
};

/// Visits every word of length 1..n_max with its product and measure.
template <Scalar T, class Visitor>
void for_each_cylinder(const KusuokaData<T>& kd, std::size_t n_max, Visitor&& visit, const Budget& budget = {}) {
  require_budget("cylinder enumeration", word_count(kd.size(), 1, n_max), budget);
  for_each_product(kd.tuple, n_max, [&](const Word& w, const Matrix<T>& p, double bound) {
    const bool zero = is_zero_product(p, bound);
    const double mu = zero ? 0.0 : cylinder_measure_of(kd, w.size(), p, bound);
    visit(CylinderVisit<T>{w, p, mu, zero});
    return true;
  });
}

template <Scalar T>
CylinderTable cylinder_table(const KusuokaData<T>& kd, std::size_t n_max, const Budget& budget = {}) {
  CylinderTable tab;
  tab.M = kd.size();
  tab.mass.resize(n_max + 1);
  tab.mass[0] = {kd.trace_QQhat};
  for (std::size_t n = 1; n <= n_max; ++n)
    tab.mass[n].assign(static_cast<std::size_t>(std::pow(static_cast<double>(tab.M), static_cast<double>(n))), 0.0);
  for_each_cylinder(
      kd, n_max, [&](const CylinderVisit<T>& v) { tab.mass[v.word.size()][CylinderTable::rank(v.word, tab.M)] = v.measure; },
      budget);
  return tab;
}

struct ConsistencyReport {
  double left = 0;   ///< max |Σ_k μ([k·w]) − μ([w])|
  double right = 0;  ///< max |Σ_k μ([w·k]) − μ([w])|
  double mass = 0;   ///< max |Σ_{|w|=n} μ([w]) − 1|

  double max() const { return std::max({left, right, mass}); }
};

inline ConsistencyReport consistency_check(const CylinderTable& tab) {
  ConsistencyReport r;
  const std::size_t M = tab.M;
  for (std::size_t n = 0; n <= tab.max_length(); ++n) {
    double total = 0;
    for (double x : tab.mass[n]) total += x;
    r.mass = std::max(r.mass, std::fabs(total - 1.0));
    if (n == tab.max_length()) break;
    const std::size_t count = tab.mass[n].size();
    for (std::size_t idx = 0; idx < count; ++idx) {
      double left = 0, right = 0;
      for (std::size_t k = 0; k < M; ++k) {
        left += tab.mass[n + 1][k * count + idx];
        right += tab.mass[n + 1][idx * M + k];
      }
      r.left = std::max(r.left, std::fabs(left - tab.mass[n][idx]));
      r.right = std::max(r.right, std::fabs(right - tab.mass[n][idx]));
    }
  }
  return r;
}

template <Scalar T>
ConsistencyReport consistency_check(const KusuokaData<T>& kd, std::size_t n_max, const Budget& budget = {}) {
  return consistency_check(cylinder_table(kd, n_max, budget));
}

struct GibbsConstants {
  double lower = 0;
  double upper = 0;
};

template <Scalar T>
GibbsConstants gibbs_constants(const KusuokaData<T>& kd) {
  const auto su = singular_values(kd.U);
  const auto sh = singular_values(kd.Uhat);
  return {su.back() * su.back() * sh.back() * sh.back(),
          static_cast<double>(kd.dim()) * su.front() * su.front() * sh.front() * sh.front()};
}

struct GibbsCheck {
  double min_ratio = std::numeric_limits<double>::infinity();
  double max_ratio = 0;
  GibbsConstants constants;
  std::optional<Word> violation;
  std::size_t words = 0;

  bool ok() const { return !violation.has_value(); }
};

/// Observed range of μ([w])·e^{nP}/‖A_w‖² over nonzero products, |w| ≤ n_max.
template <Scalar T>
GibbsCheck gibbs_verify(const KusuokaData<T>& kd, std::size_t n_max, const Budget& budget = {}) {
  GibbsCheck g;
  g.constants = gibbs_constants(kd);
  const double slack = 1e-9;
  for_each_cylinder(
      kd, n_max,
      [&](const CylinderVisit<T>& v) {
        if (v.zero) return;
        const double nrm = operator_norm(to_double(v.product));
        if (!(nrm > 0)) return;
        const double ratio = v.measure * std::exp(static_cast<double>(v.word.size()) * kd.pressure) / (nrm * nrm);
        g.min_ratio = std::min(g.min_ratio, ratio);
        g.max_ratio = std::max(g.max_ratio, ratio);
        ++g.words;
        if (!g.violation &&
            (ratio < g.constants.lower * (1 - slack) || ratio > g.constants.upper * (1 + slack)))
          g.violation = v.word;
      },
      budget);
  return g;
}

/// Per-length sums over cylinders used by the Lyapunov and entropy estimates.
struct CylinderSums {
  std::size_t n = 0;
  double mass = 0;
  double entropy = 0;           ///< −Σ μ log μ
  double log_norm = 0;          ///< Σ μ log ‖A_w‖
  std::vector<double> log_sv;   ///< Σ μ log α_i(A_w)
};

template <Scalar T>
std::vector<CylinderSums> cylinder_sums(const KusuokaData<T>& kd, std::size_t n_max, bool singular = false,
                                        const Budget& budget = {}) {
  if (n_max < 1) throw InvalidInput("n_max must be at least 1");
  std::vector<CylinderSums> out(n_max);
  for (std::size_t n = 0; n < n_max; ++n) {
    out[n].n = n + 1;
    out[n].log_sv.assign(kd.dim(), 0.0);
  }
  for_each_cylinder(
      kd, n_max,
      [&](const CylinderVisit<T>& v) {
        if (v.zero || !(v.measure > 0)) return;
        auto& s = out[v.word.size() - 1];
        s.mass += v.measure;
        s.entropy -= v.measure * std::log(v.measure);
        if (singular) {
          const auto sv = singular_values(to_double(v.product));
          s.log_norm += v.measure * std::log(sv.front());
          for (std::size_t i = 0; i < sv.size(); ++i)
            s.log_sv[i] += sv[i] > 0 ? v.measure * std::log(sv[i]) : -std::numeric_limits<double>::infinity();
        } else {
          s.log_norm += v.measure * std::log(operator_norm(to_double(v.product)));
        }
      },
      budget);
  return out;
}

struct LyapunovSeries {
  std::vector<double> raw;  ///< (1/n)·Σ μ log ‖A_w‖
  std::vector<double> top;  ///< running minimum Λ_n
};

inline LyapunovSeries lyapunov_from_sums(const std::vector<CylinderSums>& sums) {
  LyapunovSeries ls;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : sums) {
    const double v = s.log_norm / static_cast<double>(s.n);
    ls.raw.push_back(v);
    best = std::min(best, v);
    ls.top.push_back(best);
  }
  return ls;
}

template <Scalar T>
LyapunovSeries lyapunov_top(const KusuokaData<T>& kd, std::size_t n_max, const Budget& budget = {}) {
  return lyapunov_from_sums(cylinder_sums(kd, n_max, false, budget));
}

/// exponents[n-1][i] = (1/n)·Σ μ([w]) log α_i(A_w), i = 0..d−1.
template <Scalar T>
std::vector<std::vector<double>> lyapunov_spectrum(const KusuokaData<T>& kd, std::size_t n_max,
                                                   const Budget& budget = {}) {
  std::vector<std::vector<double>> out;
  for (const auto& s : cylinder_sums(kd, n_max, true, budget)) {
    std::vector<double> row;
    for (double x : s.log_sv) row.push_back(x / static_cast<double>(s.n));
    out.push_back(std::move(row));
  }
  return out;
}

struct EntropyPoint {
  std::size_t n = 0;
  double shannon = 0;      ///< H_n / n
  double conditional = 0;  ///< H_n − H_{n−1}
  double variational = 0;  ///< P − 2Λ_n
  double lyapunov = 0;     ///< Λ_n

  double gap() const { return std::fabs(conditional - variational); }
};

inline std::vector<EntropyPoint> entropy_from_sums(const std::vector<CylinderSums>& sums, double pressure) {
  const auto ly = lyapunov_from_sums(sums);
  std::vector<EntropyPoint> out;
  double prev = 0;
  for (std::size_t k = 0; k < sums.size(); ++k) {
    EntropyPoint p;
    p.n = sums[k].n;
    p.shannon = sums[k].entropy / static_cast<double>(p.n);
    p.conditional = sums[k].entropy - prev;
    prev = sums[k].entropy;
    p.lyapunov = ly.top[k];
    p.variational = pressure - 2.0 * ly.top[k];
    out.push_back(p);
  }
  return out;
}

template <Scalar T>
std::vector<EntropyPoint> entropy_estimate(const KusuokaData<T>& kd, std::size_t n_max, const Budget& budget = {}) {
  return entropy_from_sums(cylinder_sums(kd, n_max, false, budget), kd.pressure);
}

/// μ([x] ∩ σ^{−n}[y]) = e^{−(n+|y|)P}·tr((A_x Q̂ A_xᵀ)·L^{n−|x|}(A_yᵀ Q A_y)).
template <Scalar T>
double correlation(const KusuokaData<T>& kd, const Word& x, const Word& y, std::size_t n) {
  if (n < x.size()) throw InvalidInput("correlation needs n >= |x|");
  const Matrix<double> ax = to_double(word_product(kd.tuple, x));
  const Matrix<double> ay = to_double(word_product(kd.tuple, y));
  Matrix<double> b = ay.transpose() * kd.Q * ay;
  for (std::size_t k = x.size(); k < n; ++k) b = apply_transfer(kd.dtuple, b, Side::Transpose) * (1.0 / kd.lambda);
  const Matrix<double> left = ax * kd.Qhat * ax.transpose();
  double tr = 0;
  for (std::size_t i = 0; i < kd.dim(); ++i)
    for (std::size_t j = 0; j < kd.dim(); ++j) tr += left(i, j) * b(j, i);
  return tr * std::exp(-static_cast<double>(x.size() + y.size()) * kd.pressure);
}

/// Σ over middle words z of length n − |x| of μ([x z y]).
template <Scalar T>
double correlation_bruteforce(const KusuokaData<T>& kd, const Word& x, const Word& y, std::size_t n,
                              const Budget& budget = {}) {
  if (n < x.size()) throw InvalidInput("correlation needs n >= |x|");
  double total = 0;
  for (const Word& z : enumerate_words(kd.size(), n - x.size(), budget))
    total += cylinder_measure(kd, x.concat(z).concat(y));
  return total;
}

struct PeripheralSpectrum {
  std::vector<std::complex<double>> values;
  double radius = 0;

  bool mixing_consistent() const {
    return values.size() == 1 && std::fabs(values[0].imag()) <= 1e-9 * radius && values[0].real() > 0;
  }
  const char* verdict() const { return mixing_consistent() ? "mixing-consistent" : "obstruction suspected"; }
};

/// Eigenvalues of Σ A_i ⊗ A_i with modulus ≥ (1 − tol)·ρ, multiplicities kept.
template <Scalar T>
PeripheralSpectrum peripheral_spectrum(const MatrixTuple<T>& t, double tol = 1e-9, const Budget& budget = {}) {
  const std::size_t D = t.dim() * t.dim();
  if (D > budget.max_kron_dim)
    throw BudgetExceeded("peripheral spectrum dimension d^2", static_cast<double>(D),
                         static_cast<double>(budget.max_kron_dim));
  Matrix<double> sum(D, D);
  for (const auto& a : t) {
    const auto ad = to_double(a);
    sum += kron(ad, ad);
  }
  const auto ev = detail::eigen_eigenvalues(to_eigen(sum));
  PeripheralSpectrum ps;
  for (const auto& z : ev) ps.radius = std::max(ps.radius, std::abs(z));
  for (const auto& z : ev)
    if (std::abs(z) >= (1 - tol) * ps.radius) ps.values.push_back(z);
  std::sort(ps.values.begin(), ps.values.end(), [](const auto& a, const auto& b) {
    return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
  });
  return ps;
}

}  // namespace thermoform
