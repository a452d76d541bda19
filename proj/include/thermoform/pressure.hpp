#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <thread>
#include <vector>

#include "thermoform/spectral.hpp"
#include "thermoform/tuple.hpp"

namespace thermoform {

/// Nonnegative sum that switches to log-space once a term leaves
/// [1e-100, 1e100]. Plain accumulation keeps small integer sums exact.
class LogSum {
 public:
  static constexpr double kLogHi = 230.25850929940458;  // log 1e100
  static constexpr double kLogLo = -kLogHi;

  /// Adds base^s where log_term = s·log(base); base > 0.
  void add_power(double base, double s) {
    const double lv = s * std::log(base);
    if (!log_mode_ && lv <= kLogHi && lv >= kLogLo) {
      plain_ += std::pow(base, s);
      return;
    }
    add_log(lv);
  }

  void add_log(double lv) {
    if (!log_mode_) switch_to_log();
    log_acc_ = logaddexp(log_acc_, lv);
  }

  void merge(const LogSum& o) {
    if (!log_mode_ && !o.log_mode_) {
      plain_ += o.plain_;
      return;
    }
    if (!log_mode_) switch_to_log();
    log_acc_ = logaddexp(log_acc_, o.log());
  }

  double log() const { return log_mode_ ? log_acc_ : std::log(plain_); }
  double value() const { return log_mode_ ? std::exp(log_acc_) : plain_; }
  bool log_mode() const { return log_mode_; }

 private:
  static double logaddexp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::fabs(a - b)));
  }
  void switch_to_log() {
    log_acc_ = plain_ > 0 ? std::log(plain_) : -std::numeric_limits<double>::infinity();
    log_mode_ = true;
  }

  double plain_ = 0.0;
  double log_acc_ = -std::numeric_limits<double>::infinity();
  bool log_mode_ = false;
};

/// What the word enumeration should compute per length.
struct EnumerationOptions {
  bool norms = true;
  bool spectral = true;
  bool frobenius = false;
  unsigned threads = 1;
  Budget budget{};
};

/// Aggregates over all M^n words of one length n.
template <Scalar T>
struct LevelStats {
  LogSum norm_sum;      ///< Σ ‖A_w‖^s
  LogSum spectral_sum;  ///< Σ ρ(A_w)^s
  T frobenius_sum{0};   ///< Σ ‖A_w‖_F², exact under rational policy
  double max_norm = 0;
  double max_rho = 0;
  Word argmax_rho;

  void merge(const LevelStats& o) {
    norm_sum.merge(o.norm_sum);
    spectral_sum.merge(o.spectral_sum);
    frobenius_sum += o.frobenius_sum;
    max_norm = std::max(max_norm, o.max_norm);
    if (o.max_rho > max_rho) {
      max_rho = o.max_rho;
      argmax_rho = o.argmax_rho;
    }
  }
};

/// Per-length statistics for n = 1..N. Work is split by first symbol and
/// reduced in symbol order, so results do not depend on the thread count.
template <Scalar T>
std::vector<LevelStats<T>> enumerate_levels(const MatrixTuple<T>& t, double s, std::size_t N,
                                            const EnumerationOptions& opt = {}) {
  if (!(s > 0)) throw InvalidInput("exponent s must be positive");
  if (N < 1) throw InvalidInput("word length N must be at least 1");
  require_budget("word enumeration", word_count(t.size(), 1, N), opt.budget);

  const std::size_t M = t.size();
  std::vector<std::vector<LevelStats<T>>> partial(M, std::vector<LevelStats<T>>(N));

  auto record = [&](std::vector<LevelStats<T>>& levels, const Word& w, const Matrix<T>& p, double bound) {
    LevelStats<T>& st = levels[w.size() - 1];
    if (is_zero_product(p, bound)) return;
    if (opt.norms) {
      const double nrm = operator_norm(p);
      if (nrm > 0) st.norm_sum.add_power(nrm, s);
      st.max_norm = std::max(st.max_norm, nrm);
    }
    if (opt.spectral) {
      const double rho = spectral_radius(p);
      if (rho > 0) st.spectral_sum.add_power(rho, s);
      if (rho > st.max_rho) {
        st.max_rho = rho;
        st.argmax_rho = w;
      }
    }
    if (opt.frobenius) st.frobenius_sum += frobenius_squared(p);
  };

  auto run_symbol = [&](int sym) {
    auto& levels = partial[sym - 1];
    const Word root{sym};
    const Matrix<T>& a = t.symbol(sym);
    const double bound = t.symbol_magnitude(sym) * static_cast<double>(t.dim());
    record(levels, root, a, bound);
    if (N > 1)
      for_each_product(
          t, N - 1,
          [&](const Word& w, const Matrix<T>& p, double b) {
            record(levels, w, p, b);
            return true;
          },
          root, &a);
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(M)));
  if (threads == 1) {
    for (int sym = 1; sym <= static_cast<int>(M); ++sym) run_symbol(sym);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < threads; ++k)
      pool.emplace_back([&, k] {
        for (int sym = static_cast<int>(k) + 1; sym <= static_cast<int>(M); sym += static_cast<int>(threads))
          run_symbol(sym);
      });
  }

  std::vector<LevelStats<T>> out(N);
  for (std::size_t sym = 0; sym < M; ++sym)
    for (std::size_t n = 0; n < N; ++n) out[n].merge(partial[sym][n]);
  return out;
}

/// S_n = Σ_{|w| = n} ‖A_w‖^s.
template <Scalar T>
double partition_sum(const MatrixTuple<T>& t, double s, std::size_t n, const EnumerationOptions& opt = {}) {
  EnumerationOptions o = opt;
  o.spectral = false;
  o.frobenius = false;
  return enumerate_levels(t, s, n, o).back().norm_sum.value();
}

/// log S_n, safe when S_n itself overflows.
template <Scalar T>
double log_partition_sum(const MatrixTuple<T>& t, double s, std::size_t n, const EnumerationOptions& opt = {}) {
  EnumerationOptions o = opt;
  o.spectral = false;
  o.frobenius = false;
  return enumerate_levels(t, s, n, o).back().norm_sum.log();
}

/// Σ_{|w| = n} ‖A_w‖_F² (exact under rational policy).
template <Scalar T>
T frobenius_partition_sum(const MatrixTuple<T>& t, std::size_t n, const Budget& budget = {}) {
  EnumerationOptions o;
  o.norms = o.spectral = false;
  o.frobenius = true;
  o.budget = budget;
  return enumerate_levels(t, 2.0, n, o).back().frobenius_sum;
}

/// log ρ(Σ_i K_i ⊗ K_i) with K_i = A_i^{⊗ℓ}, i.e. P(A, 2ℓ).
template <Scalar T>
double pressure_exact_even(const MatrixTuple<T>& t, std::size_t ell, const Budget& budget = {}) {
  if (ell < 1) throw InvalidInput("pressure_exact_even needs ell >= 1");
  const double dim = std::pow(static_cast<double>(t.dim()), 2.0 * static_cast<double>(ell));
  if (dim > static_cast<double>(budget.max_kron_dim))
    throw BudgetExceeded("Kronecker dimension d^(2l)", dim, static_cast<double>(budget.max_kron_dim));
  const auto k = kronecker_power(t, ell, budget);
  const std::size_t D = k.dim() * k.dim();
  Matrix<T> sum(D, D);
  for (const auto& a : k) sum += kron(a, a);
  return std::log(spectral_radius(sum));
}

struct PressureSeriesPoint {
  std::size_t n;
  double log_partition;             ///< log S_n
  double upper_n;                   ///< (1/n)·log S_n
  double upper;                     ///< min over m ≤ n
  double periodic_lower;            ///< max over |w| ≤ n of (s/|w|)·log ρ(A_w)
  double spectral;                  ///< (1/n)·log Σ ρ(A_w)^s, diagnostic only
  std::optional<double> frobenius;  ///< (1/n)·log Σ ‖A_w‖_F² (s = 2 only)
};

struct PressureBracket {
  double s = 0;
  std::size_t N = 0;
  double upper = 0;
  double periodic_lower = 0;
  Word periodic_word;
  std::optional<double> exact;
  std::string exact_method;
  std::vector<PressureSeriesPoint> series;

  double width() const { return upper - periodic_lower; }
};

inline bool is_even_integer(double s) {
  return s > 0 && std::floor(s) == s && std::fmod(s, 2.0) == 0.0;
}

/// periodic_lower ≤ P(A, s) ≤ upper from words of length ≤ N, plus the exact
/// value when s is an even integer (Kronecker reduction) or d = 1.
template <Scalar T>
PressureBracket pressure_bracket(const MatrixTuple<T>& t, double s, std::size_t N, const EnumerationOptions& opt = {}) {
  EnumerationOptions o = opt;
  o.norms = o.spectral = true;
  o.frobenius = s == 2.0;
  const auto levels = enumerate_levels(t, s, N, o);

  constexpr double kInf = std::numeric_limits<double>::infinity();
  PressureBracket b;
  b.s = s;
  b.N = N;
  b.upper = kInf;
  b.periodic_lower = -kInf;
  for (std::size_t n = 1; n <= N; ++n) {
    const auto& st = levels[n - 1];
    PressureSeriesPoint pt;
    pt.n = n;
    const double dn = static_cast<double>(n);
    pt.log_partition = st.norm_sum.log();
    pt.upper_n = pt.log_partition / dn;
    b.upper = std::min(b.upper, pt.upper_n);
    pt.upper = b.upper;
    if (st.max_rho > 0) {
      const double lower_n = s / dn * std::log(st.max_rho);
      if (lower_n > b.periodic_lower) {
        b.periodic_lower = lower_n;
        b.periodic_word = st.argmax_rho;
      }
    }
    pt.periodic_lower = b.periodic_lower;
    pt.spectral = st.spectral_sum.log() / dn;
    if (o.frobenius) {
      const double f = to_double(st.frobenius_sum);
      pt.frobenius = f > 0 ? std::log(f) / dn : -kInf;
    }
    b.series.push_back(pt);
  }

  if (t.dim() == 1) {
    LogSum acc;
    for (const auto& a : t) {
      const double v = std::fabs(to_double(a(0, 0)));
      if (v > 0) acc.add_power(v, s);
    }
    b.exact = acc.log();
    b.exact_method = "scalar";
  } else if (is_even_integer(s)) {
    try {
      b.exact = pressure_exact_even(t, static_cast<std::size_t>(s / 2), o.budget);
      b.exact_method = "kronecker";
    } catch (const BudgetExceeded&) {
    }
  }
  return b;
}

struct RadiusSeriesPoint {
  std::size_t n = 0;
  double upper = 0;   ///< best upper bound using lengths ≤ n
  double lower = 0;   ///< best lower bound using lengths ≤ n
  double spectral = 0;  ///< level-n value alone
};

struct RadiusBracket {
  double lower = 0;
  double upper = 0;
  std::size_t N = 0;
  std::optional<double> exact;
  std::vector<RadiusSeriesPoint> series;

  bool contains(double x, double tol = 1e-9) const {
    return x >= lower - tol * std::max(1.0, std::fabs(x)) && x <= upper + tol * std::max(1.0, std::fabs(x));
  }
};

/// ϱ_p = e^{P(A,p)/p}.
template <Scalar T>
RadiusBracket p_radius(const MatrixTuple<T>& t, double p, std::size_t N, const EnumerationOptions& opt = {}) {
  const auto b = pressure_bracket(t, p, N, opt);
  RadiusBracket r;
  r.N = N;
  if (b.exact) {
    r.exact = std::exp(*b.exact / p);
    r.lower = r.upper = *r.exact;
  } else {
    r.lower = std::exp(b.periodic_lower / p);
    r.upper = std::exp(b.upper / p);
  }
  for (const auto& pt : b.series)
    r.series.push_back({pt.n, std::exp(pt.upper / p), std::exp(pt.periodic_lower / p), std::exp(pt.spectral / p)});
  return r;
}

/// max_{n≤N} max_w ρ(A_w)^{1/n} ≤ ϱ_∞ ≤ min_{n≤N} max_w ‖A_w‖^{1/n}.
template <Scalar T>
RadiusBracket jsr_bracket(const MatrixTuple<T>& t, std::size_t N, const EnumerationOptions& opt = {}) {
  EnumerationOptions o = opt;
  o.norms = o.spectral = true;
  o.frobenius = false;
  const auto levels = enumerate_levels(t, 1.0, N, o);
  RadiusBracket r;
  r.N = N;
  r.upper = std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n <= N; ++n) {
    const double inv = 1.0 / static_cast<double>(n);
    const double level_rho = std::pow(levels[n - 1].max_rho, inv);
    r.lower = std::max(r.lower, level_rho);
    r.upper = std::min(r.upper, std::pow(levels[n - 1].max_norm, inv));
    r.series.push_back({n, r.upper, r.lower, level_rho});
  }
  return r;
}

}  // namespace thermoform
