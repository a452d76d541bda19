#pragma once

#include <random>
#include <vector>

#include "thermoform/linalg.hpp"
#include "thermoform/tuple.hpp"

// Seeded generators for randomized checks.
namespace thermoform::random {

/// Rational with small numerator/denominator, uniform-ish in [-range, range].
inline Rational random_rational(std::mt19937_64& rng, int range = 3, int max_den = 4) {
  std::uniform_int_distribution<int> den(1, max_den);
  const int q = den(rng);
  std::uniform_int_distribution<int> num(-range * q, range * q);
  return Rational(num(rng), q);
}

inline Matrix<Rational> random_matrix(std::mt19937_64& rng, std::size_t d, int range = 3, int max_den = 4) {
  Matrix<Rational> m(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) m(i, j) = random_rational(rng, range, max_den);
  return m;
}

inline MatrixTuple<Rational> random_tuple(std::mt19937_64& rng, std::size_t M, std::size_t d, int range = 3,
                                          int max_den = 4) {
  std::vector<Matrix<Rational>> ms;
  for (std::size_t i = 0; i < M; ++i) ms.push_back(random_matrix(rng, d, range, max_den));
  return MatrixTuple<Rational>(std::move(ms), "random");
}

inline Word random_word(std::mt19937_64& rng, std::size_t M, std::size_t len) {
  std::uniform_int_distribution<int> sym(1, static_cast<int>(M));
  Word w;
  for (std::size_t i = 0; i < len; ++i) w.symbols.push_back(sym(rng));
  return w;
}

/// Rational orthogonal matrix by the Cayley transform (Id − S)(Id + S)⁻¹ of a
/// random skew-symmetric S, optionally composed with a reflection.
inline Matrix<Rational> random_rational_orthogonal(std::mt19937_64& rng, std::size_t d) {
  Matrix<Rational> s(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) {
      s(i, j) = random_rational(rng, 2, 3);
      s(j, i) = -s(i, j);
    }
  const auto id = Matrix<Rational>::identity(d);
  Matrix<Rational> o = (id - s) * inverse(Matrix<Rational>(id + s));
  if (std::uniform_int_distribution<int>(0, 1)(rng)) {
    Matrix<Rational> r = id;
    r(0, 0) = -1;
    o = o * r;
  }
  return o;
}

}  // namespace thermoform::random
