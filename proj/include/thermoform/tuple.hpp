#pragma once

#include <cmath>
#include <cstdlib>
#include <functional>
#include <iterator>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "thermoform/linalg.hpp"
#include "thermoform/matrix.hpp"
#include "thermoform/spectral.hpp"

namespace thermoform {

/// Finite word over {1, …, M}. The cylinder [x_1 ⋯ x_n] pairs with the
/// reverse-order product A_{x_n} ⋯ A_{x_1}.
struct Word {
  std::vector<int> symbols;

  Word() = default;
  Word(std::initializer_list<int> s) : symbols(s) {}
  explicit Word(std::vector<int> s) : symbols(std::move(s)) {}

  std::size_t size() const { return symbols.size(); }
  bool empty() const { return symbols.empty(); }
  int operator[](std::size_t i) const { return symbols[i]; }

  Word concat(const Word& other) const {
    Word w = *this;
    w.symbols.insert(w.symbols.end(), other.symbols.begin(), other.symbols.end());
    return w;
  }

  friend bool operator==(const Word&, const Word&) = default;
  friend auto operator<=>(const Word& a, const Word& b) {
    // shortlex: shorter words first, then lexicographic
    if (a.size() != b.size()) return a.size() <=> b.size();
    return a.symbols <=> b.symbols;
  }
};

inline std::string to_string(const Word& w) {
  std::string s = "(";
  for (std::size_t i = 0; i < w.size(); ++i) s += (i ? "," : "") + std::to_string(w[i]);
  return s + ")";
}

/// Resource caps for enumeration-based routines.
struct Budget {
  double max_products = 1e7;    ///< total word products evaluated
  std::size_t max_kron_dim = 4096;  ///< d^{2ℓ} cap for Kronecker reductions
  std::size_t max_pool = 4096;  ///< candidate products in subspace searches

  /// Honors THERMOFORM_BUDGET_CAP for the product cap.
  static Budget from_environment() {
    Budget b;
    if (const char* env = std::getenv("THERMOFORM_BUDGET_CAP")) {
      char* end = nullptr;
      const double v = std::strtod(env, &end);
      if (end != env && v > 0) b.max_products = v;
    }
    return b;
  }
};

/// Number of words of lengths lo..hi over M symbols, as a double.
inline double word_count(std::size_t M, std::size_t lo, std::size_t hi) {
  double total = 0;
  for (std::size_t n = lo; n <= hi; ++n) total += std::pow(static_cast<double>(M), static_cast<double>(n));
  return total;
}

inline void require_budget(const std::string& what, double requested, const Budget& budget) {
  if (requested > budget.max_products) throw BudgetExceeded(what, requested, budget.max_products);
}

/// Ordered M-tuple of d×d matrices sharing one scalar policy.
template <Scalar T>
class MatrixTuple {
 public:
  using scalar_type = T;

  MatrixTuple() = default;
  explicit MatrixTuple(std::vector<Matrix<T>> matrices, std::string label = {})
      : matrices_(std::move(matrices)), label_(std::move(label)) {
    if (matrices_.size() < 2) throw InvalidInput("a matrix tuple needs at least two matrices (M >= 2)");
    dim_ = matrices_.front().rows();
    if (dim_ == 0) throw InvalidInput("matrix dimension must be at least 1");
    for (std::size_t i = 0; i < matrices_.size(); ++i) {
      const auto& m = matrices_[i];
      if (!m.square() || m.rows() != dim_)
        throw InvalidInput("matrix " + std::to_string(i + 1) + " is not " + std::to_string(dim_) + "x" +
                           std::to_string(dim_));
      if constexpr (!is_exact_v<T>)
        for (double x : m.data())
          if (!std::isfinite(x)) throw InvalidInput("matrix " + std::to_string(i + 1) + " has a non-finite entry");
    }
    max_abs_.reserve(matrices_.size());
    for (const auto& m : matrices_) max_abs_.push_back(to_double(max_abs(m)));
  }

  std::size_t size() const { return matrices_.size(); }
  std::size_t dim() const { return dim_; }
  const std::string& label() const { return label_; }
  static constexpr ScalarPolicy policy() { return scalar_traits<T>::policy; }

  /// 0-based access.
  const Matrix<T>& operator[](std::size_t i) const { return matrices_[i]; }
  /// 1-based symbol access.
  const Matrix<T>& symbol(int s) const {
    if (s < 1 || static_cast<std::size_t>(s) > matrices_.size())
      throw InvalidInput("symbol " + std::to_string(s) + " out of range 1.." + std::to_string(matrices_.size()));
    return matrices_[s - 1];
  }
  const std::vector<Matrix<T>>& matrices() const { return matrices_; }
  double symbol_magnitude(int s) const { return max_abs_[s - 1]; }

  auto begin() const { return matrices_.begin(); }
  auto end() const { return matrices_.end(); }

 private:
  std::vector<Matrix<T>> matrices_;
  std::size_t dim_ = 0;
  std::string label_;
  std::vector<double> max_abs_;
};

using AnyTuple = std::variant<MatrixTuple<Rational>, MatrixTuple<double>>;

/// A_{x_n} ⋯ A_{x_1}; the empty word gives the identity.
template <Scalar T>
Matrix<T> word_product(const MatrixTuple<T>& t, const Word& w) {
  Matrix<T> p = Matrix<T>::identity(t.dim());
  for (int s : w.symbols) p = t.symbol(s) * p;
  return p;
}

/// Zero test per scalar policy: exact for rationals, entrywise threshold
/// relative to `magnitude_bound` for doubles.
template <Scalar T>
bool is_zero_product(const Matrix<T>& m, double magnitude_bound) {
  if constexpr (is_exact_v<T>) {
    (void)magnitude_bound;
    return m.is_zero();
  } else {
    return max_abs(m) <= kZeroThreshold * magnitude_bound;
  }
}

/// Entry magnitude bound of a word product, used for the double zero test.
template <Scalar T>
double product_magnitude_bound(const MatrixTuple<T>& t, const Word& w) {
  double b = 1.0;
  for (int s : w.symbols) b *= t.symbol_magnitude(s) * static_cast<double>(t.dim());
  return b;
}

template <Scalar T>
bool is_zero_word(const MatrixTuple<T>& t, const Word& w, const Matrix<T>& product) {
  return is_zero_product(product, product_magnitude_bound(t, w));
}

/// Iterates all M^n words of length n in lexicographic order.
class WordRange {
 public:
  WordRange(std::size_t M, std::size_t n) : M_(static_cast<int>(M)), n_(n) {}

  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = Word;
    using difference_type = std::ptrdiff_t;
    using pointer = const Word*;
    using reference = const Word&;

    iterator() = default;
    iterator(int M, std::size_t n, bool end) : M_(M), done_(end) { word_.symbols.assign(n, 1); }

    const Word& operator*() const { return word_; }
    const Word* operator->() const { return &word_; }
    iterator& operator++() {
      std::size_t k = word_.size();
      while (k > 0) {
        --k;
        if (word_.symbols[k] < M_) {
          ++word_.symbols[k];
          return *this;
        }
        word_.symbols[k] = 1;
      }
      done_ = true;
      return *this;
    }
    void operator++(int) { ++*this; }
    friend bool operator==(const iterator& a, const iterator& b) { return a.done_ == b.done_; }

   private:
    int M_ = 0;
    bool done_ = true;
    Word word_;
  };

  iterator begin() const { return iterator(M_, n_, false); }
  iterator end() const { return iterator(M_, n_, true); }
  double count() const { return std::pow(static_cast<double>(M_), static_cast<double>(n_)); }

 private:
  int M_;
  std::size_t n_;
};

inline WordRange enumerate_words(std::size_t M, std::size_t n, const Budget& budget = {}) {
  require_budget("word enumeration", std::pow(static_cast<double>(M), static_cast<double>(n)), budget);
  return WordRange(M, n);
}

inline std::vector<Word> all_words(std::size_t M, std::size_t n, const Budget& budget = {}) {
  std::vector<Word> out;
  for (const Word& w : enumerate_words(M, n, budget)) out.push_back(w);
  return out;
}

/// Visits every word of length 1..max_len (depth-first, so each level is
/// visited in lexicographic order) with its product, reusing prefix products.
/// The visitor may return false to prune the subtree below a word.
template <Scalar T, class Visitor>
void for_each_product(const MatrixTuple<T>& t, std::size_t max_len, Visitor&& visit,
                      const Word& prefix = {}, const Matrix<T>* prefix_product = nullptr) {
  const std::size_t M = t.size();
  if (max_len == 0) return;
  Matrix<T> base = prefix_product ? *prefix_product : Matrix<T>::identity(t.dim());
  double base_bound = product_magnitude_bound(t, prefix);
  struct Frame {
    Matrix<T> product;
    double bound;
    int next;
  };
  std::vector<Frame> stack;
  stack.push_back({std::move(base), base_bound, 1});
  Word w = prefix;
  const std::size_t root_len = prefix.size();
  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.next > static_cast<int>(M) || w.size() - root_len >= max_len) {
      stack.pop_back();
      if (w.size() > root_len) w.symbols.pop_back();
      continue;
    }
    const int s = top.next++;
    Matrix<T> p = t.symbol(s) * top.product;
    const double bound = top.bound * t.symbol_magnitude(s) * static_cast<double>(t.dim());
    w.symbols.push_back(s);
    const bool descend = visit(static_cast<const Word&>(w), static_cast<const Matrix<T>&>(p), bound);
    if (descend && w.size() - root_len < max_len) {
      stack.push_back({std::move(p), bound, 1});
    } else {
      w.symbols.pop_back();
    }
  }
}

/// (A_1^{⊗ℓ}, …, A_M^{⊗ℓ}).
template <Scalar T>
MatrixTuple<T> kronecker_power(const MatrixTuple<T>& t, std::size_t ell, const Budget& budget = {}) {
  if (ell < 1) throw InvalidInput("Kronecker power must be at least 1");
  const double dim = std::pow(static_cast<double>(t.dim()), static_cast<double>(ell));
  if (dim > static_cast<double>(budget.max_kron_dim))
    throw BudgetExceeded("Kronecker power dimension", dim, static_cast<double>(budget.max_kron_dim));
  std::vector<Matrix<T>> out;
  for (const auto& a : t) {
    Matrix<T> k = a;
    for (std::size_t j = 1; j < ell; ++j) k = kron(k, a);
    out.push_back(std::move(k));
  }
  return MatrixTuple<T>(std::move(out), t.label());
}

template <Scalar T>
MatrixTuple<T> transpose_tuple(const MatrixTuple<T>& t) {
  std::vector<Matrix<T>> out;
  for (const auto& a : t) out.push_back(a.transpose());
  return MatrixTuple<T>(std::move(out), t.label());
}

/// (B⁻¹A_iB).
template <Scalar T>
MatrixTuple<T> conjugate_tuple(const MatrixTuple<T>& t, const Matrix<T>& b) {
  if (!b.square() || b.rows() != t.dim()) throw InvalidInput("basis change has the wrong shape");
  const Matrix<T> inv = inverse(b);
  std::vector<Matrix<T>> out;
  for (const auto& a : t) out.push_back(inv * a * b);
  return MatrixTuple<T>(std::move(out), t.label());
}

/// The M^n-member tuple of all length-n products, in lexicographic word order.
template <Scalar T>
MatrixTuple<T> product_tuple(const MatrixTuple<T>& t, std::size_t n, const Budget& budget = {}) {
  std::vector<Matrix<T>> out;
  for (const Word& w : enumerate_words(t.size(), n, budget)) out.push_back(word_product(t, w));
  return MatrixTuple<T>(std::move(out), t.label());
}

template <Scalar T>
MatrixTuple<double> to_double(const MatrixTuple<T>& t) {
  std::vector<Matrix<double>> out;
  for (const auto& a : t) out.push_back(to_double(a));
  return MatrixTuple<double>(std::move(out), t.label());
}

}  // namespace thermoform
