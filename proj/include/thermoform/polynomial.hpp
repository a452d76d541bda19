#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "thermoform/matrix.hpp"

namespace thermoform {

/// Univariate polynomial, coefficients stored lowest degree first.
template <Scalar T>
struct Polynomial {
  std::vector<T> coef;

  int degree() const { return static_cast<int>(coef.size()) - 1; }
  const T& leading() const { return coef.back(); }

  void trim() {
    while (coef.size() > 1 && coef.back() == T(0)) coef.pop_back();
  }

  bool is_zero() const { return coef.empty() || (coef.size() == 1 && coef[0] == T(0)); }

  T operator()(const T& x) const {
    T acc(0);
    for (auto it = coef.rbegin(); it != coef.rend(); ++it) acc = acc * x + *it;
    return acc;
  }

  Polynomial derivative() const {
    Polynomial d;
    for (std::size_t k = 1; k < coef.size(); ++k) d.coef.push_back(coef[k] * T(static_cast<long>(k)));
    if (d.coef.empty()) d.coef.push_back(T(0));
    return d;
  }

  Polynomial monic() const {
    Polynomial m = *this;
    const T lead = leading();
    for (auto& c : m.coef) c /= lead;
    return m;
  }
};

/// det(x·Id − m) by Faddeev–LeVerrier. Exact under rational policy.
template <Scalar T>
Polynomial<T> characteristic_polynomial(const Matrix<T>& m) {
  const std::size_t n = m.rows();
  Polynomial<T> p;
  p.coef.assign(n + 1, T(0));
  p.coef[n] = T(1);
  Matrix<T> aux(n, n);
  for (std::size_t k = 1; k <= n; ++k) {
    aux = m * aux;
    for (std::size_t i = 0; i < n; ++i) aux(i, i) += p.coef[n - k + 1];
    const T t = (m * aux).trace();
    p.coef[n - k] = -t / T(static_cast<long>(k));
  }
  return p;
}

/// Quotient and remainder; exact rational division.
inline std::pair<Polynomial<Rational>, Polynomial<Rational>> divmod(Polynomial<Rational> a,
                                                                   const Polynomial<Rational>& b) {
  a.trim();
  Polynomial<Rational> q;
  const int db = b.degree();
  if (a.degree() < db) {
    q.coef = {Rational(0)};
    return {q, a};
  }
  q.coef.assign(a.degree() - db + 1, Rational(0));
  for (int k = a.degree() - db; k >= 0; --k) {
    const Rational f = a.coef[k + db] / b.leading();
    q.coef[k] = f;
    for (int j = 0; j <= db; ++j) a.coef[k + j] -= f * b.coef[j];
  }
  a.coef.resize(std::max(db, 1));
  a.trim();
  return {q, a};
}

inline Polynomial<Rational> gcd(Polynomial<Rational> a, Polynomial<Rational> b) {
  a.trim();
  b.trim();
  while (!b.is_zero()) {
    auto r = divmod(a, b).second;
    a = std::move(b);
    b = std::move(r);
  }
  return a.monic();
}

/// Product of the distinct irreducible factors: p / gcd(p, p').
inline Polynomial<Rational> squarefree_part(const Polynomial<Rational>& p) {
  if (p.degree() <= 1) return p.monic();
  const auto g = gcd(p, p.derivative());
  return divmod(p, g).first.monic();
}

namespace detail {

inline std::vector<std::complex<long double>> durand_kerner(const std::vector<long double>& monic_coef) {
  using C = std::complex<long double>;
  const int n = static_cast<int>(monic_coef.size()) - 1;
  auto eval = [&](C x) {
    C acc = 0;
    for (int k = n; k >= 0; --k) acc = acc * x + monic_coef[k];
    return acc;
  };
  long double radius = 0;
  for (int k = 0; k < n; ++k) radius = std::max(radius, std::fabs(monic_coef[k]));
  radius = 1 + radius;
  std::vector<C> z(n);
  const C seed(0.4L, 0.9L);
  C w = 1;
  for (int k = 0; k < n; ++k) {
    w *= seed;
    z[k] = w * (radius / std::abs(seed));
  }
  for (int iter = 0; iter < 2000; ++iter) {
    long double change = 0;
    for (int i = 0; i < n; ++i) {
      C denom = 1;
      for (int j = 0; j < n; ++j)
        if (j != i) denom *= (z[i] - z[j]);
      if (denom == C(0)) denom = C(1e-30L, 0);
      const C step = eval(z[i]) / denom;
      z[i] -= step;
      change = std::max(change, std::abs(step) / std::max<long double>(1, std::abs(z[i])));
    }
    if (change < 1e-19L) break;
  }
  // Newton polish on the simple roots
  std::vector<long double> dcoef(n);
  for (int k = 1; k <= n; ++k) dcoef[k - 1] = monic_coef[k] * k;
  for (auto& r : z) {
    for (int it = 0; it < 4; ++it) {
      C dp = 0;
      for (int k = n - 1; k >= 0; --k) dp = dp * r + dcoef[k];
      if (std::abs(dp) == 0) break;
      r -= eval(r) / dp;
    }
  }
  return z;
}

}  // namespace detail

/// Complex roots with multiplicity (as stored). Degree <= 2 in closed form.
template <Scalar T>
std::vector<std::complex<double>> roots(const Polynomial<T>& p_in) {
  using C = std::complex<long double>;
  Polynomial<T> p = p_in;
  p.trim();
  const int n = p.degree();
  std::vector<long double> c(n + 1);
  for (int k = 0; k <= n; ++k) {
    if constexpr (is_exact_v<T>)
      c[k] = scalar_traits<Rational>::to_long_double(p.coef[k] / p.leading());
    else
      c[k] = static_cast<long double>(p.coef[k]) / static_cast<long double>(p.leading());
  }
  std::vector<C> z;
  if (n <= 0) {
  } else if (n == 1) {
    z = {C(-c[0])};
  } else if (n == 2) {
    const long double b = c[1], cc = c[0];
    const long double disc = b * b - 4 * cc;
    if (disc >= 0) {
      const long double sq = std::sqrt(disc);
      const long double q = -0.5L * (b + (b >= 0 ? sq : -sq));
      if (q == 0) {
        z = {C(0), C(0)};
      } else {
        z = {C(q), C(cc / q)};
      }
    } else {
      const long double im = std::sqrt(-disc) / 2;
      z = {C(-b / 2, im), C(-b / 2, -im)};
    }
  } else {
    z = detail::durand_kerner(c);
  }
  std::vector<std::complex<double>> out;
  out.reserve(z.size());
  for (const auto& r : z) {
    double re = static_cast<double>(r.real()), im = static_cast<double>(r.imag());
    if (std::fabs(im) <= 1e-14 * std::max(1.0, std::fabs(re))) im = 0.0;
    out.emplace_back(re, im);
  }
  return out;
}

/// Continued-fraction rationalization with bounded denominator.
inline Rational rationalize(double x, long max_den = 1000000) {
  using Int = boost::multiprecision::mpz_int;
  Int h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double f = x;
  for (int iter = 0; iter < 64; ++iter) {
    const double a = std::floor(f);
    if (!std::isfinite(a) || std::fabs(a) > 1e15) break;
    const Int ai(static_cast<long long>(a));
    const Int h2 = ai * h1 + h0, k2 = ai * k1 + k0;
    if (k2 > max_den) break;
    h0 = h1;
    h1 = h2;
    k0 = k1;
    k1 = k2;
    const double frac = f - a;
    if (frac < 1e-13) break;
    f = 1.0 / frac;
  }
  if (k1 == 0) return Rational(0);
  return Rational(h1, k1);
}

/// Distinct rational roots, found numerically and confirmed exactly.
inline std::vector<Rational> rational_roots(const Polynomial<Rational>& p) {
  std::vector<Rational> out;
  for (const auto& r : roots(p)) {
    if (r.imag() != 0.0) continue;
    const Rational q = rationalize(r.real());
    if (p(q) == 0 && std::find(out.begin(), out.end(), q) == out.end()) out.push_back(q);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// p(m) by Horner.
template <Scalar T>
Matrix<T> evaluate(const Polynomial<T>& p, const Matrix<T>& m) {
  const std::size_t n = m.rows();
  Matrix<T> acc(n, n);
  for (auto it = p.coef.rbegin(); it != p.coef.rend(); ++it) {
    acc = acc * m;
    for (std::size_t i = 0; i < n; ++i) acc(i, i) += *it;
  }
  return acc;
}

}  // namespace thermoform
