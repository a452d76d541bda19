#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "thermoform/linalg.hpp"
#include "thermoform/polynomial.hpp"
#include "thermoform/tuple.hpp"

namespace thermoform {

/// Linear subspace of R^d stored as the rows of its reduced echelon basis,
/// which makes equality a plain comparison under rational policy.
template <Scalar T>
class Subspace {
 public:
  Subspace() = default;

  static Subspace span(const std::vector<Vector<T>>& vectors, std::size_t d) {
    Subspace s;
    s.ambient_ = d;
    if (vectors.empty()) return s;
    Matrix<T> rows(vectors.size(), d);
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      const Vector<T> v = normalized(vectors[i]);
      for (std::size_t j = 0; j < d; ++j) rows(i, j) = v[j];
    }
    const auto ef = rref(std::move(rows));
    for (std::size_t r = 0; r < ef.rank(); ++r) {
      Vector<T> b(d);
      for (std::size_t j = 0; j < d; ++j) b[j] = ef.reduced(r, j);
      s.basis_.push_back(std::move(b));
    }
    return s;
  }

  std::size_t dim() const { return basis_.size(); }
  std::size_t ambient() const { return ambient_; }
  const std::vector<Vector<T>>& basis() const { return basis_; }
  bool proper() const { return dim() > 0 && dim() < ambient_; }

  bool contains(const Vector<T>& v) const {
    if (is_zero_vector(v)) return true;
    if (dim() == ambient_) return true;
    std::vector<Vector<T>> all = basis_;
    all.push_back(v);
    return span(all, ambient_).dim() == dim();
  }

  bool contains(const Subspace& other) const {
    return std::all_of(other.basis_.begin(), other.basis_.end(), [&](const Vector<T>& v) { return contains(v); });
  }

  friend bool operator==(const Subspace& a, const Subspace& b) {
    if constexpr (is_exact_v<T>)
      return a.ambient_ == b.ambient_ && a.basis_ == b.basis_;
    else
      return a.dim() == b.dim() && a.contains(b);
  }

  /// A·S.
  Subspace image(const Matrix<T>& a) const {
    std::vector<Vector<T>> imgs;
    for (const auto& b : basis_) {
      Vector<T> y = a * b;
      if (!is_zero_vector(y)) imgs.push_back(std::move(y));
    }
    return span(imgs, ambient_);
  }

  /// {x : ⟨x, u⟩ = 0 for every u in S}.
  Subspace orthogonal_complement() const {
    if (dim() == 0) {
      std::vector<Vector<T>> all;
      for (std::size_t k = 0; k < ambient_; ++k) all.push_back(unit_vector<T>(ambient_, k));
      return span(all, ambient_);
    }
    Matrix<T> rows(dim(), ambient_);
    for (std::size_t i = 0; i < dim(); ++i)
      for (std::size_t j = 0; j < ambient_; ++j) rows(i, j) = basis_[i][j];
    return span(nullspace(rows), ambient_);
  }

  /// A_i S ⊆ S for every member (exact under rational policy).
  bool invariant_under(const MatrixTuple<T>& t) const {
    for (const auto& a : t)
      for (const auto& b : basis_)
        if (!contains(Vector<T>(a * b))) return false;
    return true;
  }

  static bool is_zero_vector(const Vector<T>& v) {
    if constexpr (is_exact_v<T>) {
      return std::all_of(v.begin(), v.end(), [](const T& x) { return x == 0; });
    } else {
      return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0 || !std::isfinite(x); });
    }
  }

 private:
  // doubles are rescaled to unit max-norm so the rank threshold is scale free
  static Vector<T> normalized(const Vector<T>& v) {
    if constexpr (is_exact_v<T>) {
      return v;
    } else {
      double m = 0;
      for (double x : v) m = std::max(m, std::fabs(x));
      Vector<T> out = v;
      if (m > 0)
        for (double& x : out) x /= m;
      return out;
    }
  }

  std::size_t ambient_ = 0;
  std::vector<Vector<T>> basis_;
};

template <Scalar T>
std::vector<Vector<double>> basis_as_double(const Subspace<T>& s) {
  std::vector<Vector<double>> out;
  for (const auto& b : s.basis()) out.push_back(to_double(b));
  return out;
}

/// Span of {A_w v : |w| <= d-1}, computed as the orbit closure.
template <Scalar T>
Subspace<T> orbit_span(const MatrixTuple<T>& t, const Vector<T>& v) {
  const std::size_t d = t.dim();
  if (v.size() != d) throw InvalidInput("vector has the wrong dimension");
  if (Subspace<T>::is_zero_vector(v)) throw InvalidInput("orbit_span of the zero vector");
  std::vector<Vector<T>> basis{v};
  Subspace<T> current = Subspace<T>::span(basis, d);
  std::vector<Vector<T>> frontier{v};
  for (std::size_t depth = 0; depth + 1 < d && !frontier.empty() && current.dim() < d; ++depth) {
    std::vector<Vector<T>> next;
    for (const auto& x : frontier)
      for (const auto& a : t) {
        Vector<T> y = a * x;
        if (current.contains(y)) continue;
        basis.push_back(y);
        current = Subspace<T>::span(basis, d);
        next.push_back(std::move(y));
        if (current.dim() == d) return current;
      }
    frontier = std::move(next);
  }
  return current;
}

/// Parameters of the candidate pool used by the subspace searches.
struct SearchBudget {
  std::size_t product_length = 3;   ///< eigen-candidates from products up to this length
  std::size_t random_vectors = 64;  ///< seeded pseudo-random rational vectors
  std::uint64_t seed = 0x5eed5eedULL;
  std::size_t max_pool = 4096;      ///< cap on products contributing eigen-candidates
  std::size_t max_union = 32;       ///< members in a strong-irreducibility closure
};

template <Scalar T>
struct IrreducibilityVerdict {
  std::optional<Subspace<T>> witness;  ///< ReducibleWitness when set
  std::string source;                  ///< candidate that produced the witness
  bool dual = false;                   ///< found through the transpose scan
  std::size_t candidates_tried = 0;
  SearchBudget budget;

  bool reducible() const { return witness.has_value(); }
};

namespace detail {

/// Real eigen-directions of m as candidate vectors. Under rational policy:
/// eigenvectors for rational eigenvalues and the kernel of the remaining
/// rational cofactor of the characteristic polynomial.
template <Scalar T>
std::vector<Vector<T>> eigen_candidates(const Matrix<T>& m) {
  std::vector<Vector<T>> out;
  const std::size_t d = m.rows();
  if constexpr (is_exact_v<T>) {
    Polynomial<Rational> p = characteristic_polynomial(m);
    for (const Rational& lambda : rational_roots(p)) {
      Matrix<Rational> shifted = m;
      for (std::size_t i = 0; i < d; ++i) shifted(i, i) -= lambda;
      for (auto& v : nullspace(shifted)) out.push_back(std::move(v));
      const Polynomial<Rational> lin{{-lambda, Rational(1)}};
      while (true) {
        auto [q, r] = divmod(p, lin);
        if (!r.is_zero()) break;
        p = std::move(q);
      }
    }
    if (p.degree() >= 1 && static_cast<std::size_t>(p.degree()) < d)
      for (auto& v : nullspace(evaluate(p, m))) out.push_back(std::move(v));
  } else {
    Eigen::EigenSolver<Eigen::MatrixXd> es(to_eigen(m), true);
    if (es.info() != Eigen::Success) return out;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
      const auto lambda = es.eigenvalues()(k);
      const auto vec = es.eigenvectors().col(k);
      Vector<double> re(d), im(d);
      for (std::size_t i = 0; i < d; ++i) {
        re[i] = vec(i).real();
        im[i] = vec(i).imag();
      }
      out.push_back(re);
      if (std::fabs(lambda.imag()) > 1e-10 * std::max(1.0, std::abs(lambda))) out.push_back(im);
    }
  }
  return out;
}

template <Scalar T>
std::vector<Matrix<T>> candidate_products(const MatrixTuple<T>& t, const SearchBudget& sb) {
  // for_each_product is depth-first; regroup by length so generators come first
  std::vector<std::pair<std::size_t, Matrix<T>>> found;
  for_each_product(t, sb.product_length, [&](const Word& w, const Matrix<T>& p, double) {
    if (found.size() >= sb.max_pool) return false;
    found.emplace_back(w.size(), p);
    return true;
  });
  std::stable_sort(found.begin(), found.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<Matrix<T>> out;
  out.reserve(found.size());
  for (auto& f : found) out.push_back(std::move(f.second));
  return out;
}

template <Scalar T>
Vector<T> random_candidate(std::mt19937_64& rng, std::size_t d) {
  std::uniform_int_distribution<int> num(-9, 9), den(1, 4);
  Vector<T> v(d);
  bool nonzero = false;
  for (auto& x : v) {
    const int n = num(rng), q = den(rng);
    if constexpr (is_exact_v<T>)
      x = Rational(n, q);
    else
      x = static_cast<double>(n) / q;
    nonzero = nonzero || n != 0;
  }
  if (!nonzero) v[0] = T(1);
  return v;
}

/// Deterministic candidate pool: basis vectors, eigen-candidates of products
/// up to the configured length, then seeded random vectors.
template <Scalar T>
std::vector<std::pair<Vector<T>, std::string>> candidate_pool(const MatrixTuple<T>& t, const SearchBudget& sb) {
  const std::size_t d = t.dim();
  std::vector<std::pair<Vector<T>, std::string>> pool;
  for (std::size_t k = 0; k < d; ++k) pool.emplace_back(unit_vector<T>(d, k), "e_" + std::to_string(k + 1));
  const auto products = candidate_products(t, sb);
  for (std::size_t k = 0; k < products.size(); ++k)
    for (auto& v : eigen_candidates(products[k]))
      pool.emplace_back(std::move(v), "eigen(product #" + std::to_string(k + 1) + ")");
  std::mt19937_64 rng(sb.seed);
  for (std::size_t k = 0; k < sb.random_vectors; ++k)
    pool.emplace_back(random_candidate<T>(rng, d), "random #" + std::to_string(k + 1));
  return pool;
}

template <Scalar T>
std::optional<std::pair<Subspace<T>, std::string>> scan_pool(const MatrixTuple<T>& t, const SearchBudget& sb,
                                                              std::size_t& tried) {
  const std::size_t d = t.dim();
  std::set<std::vector<T>> seen;
  for (auto& [v, name] : candidate_pool(t, sb)) {
    if (Subspace<T>::is_zero_vector(v)) continue;
    if constexpr (is_exact_v<T>) {
      // skip candidates that are multiples of one already tried
      Vector<T> key = v;
      const auto nz = std::find_if(key.begin(), key.end(), [](const T& x) { return x != 0; });
      const T lead = *nz;
      for (auto& x : key) x /= lead;
      if (!seen.insert(key).second) continue;
    }
    ++tried;
    Subspace<T> s = orbit_span(t, v);
    if (s.dim() < d) return std::make_pair(std::move(s), name);
  }
  return std::nullopt;
}

}  // namespace detail

/// Witness search for a common proper invariant subspace. NoWitnessFound is
/// evidence of irreducibility, not proof.
template <Scalar T>
IrreducibilityVerdict<T> find_invariant_subspace(const MatrixTuple<T>& t, const SearchBudget& sb = {}) {
  IrreducibilityVerdict<T> verdict;
  verdict.budget = sb;
  if (t.dim() == 1) return verdict;
  if (auto hit = detail::scan_pool(t, sb, verdict.candidates_tried)) {
    verdict.witness = std::move(hit->first);
    verdict.source = hit->second;
  } else if (auto dual = detail::scan_pool(transpose_tuple(t), sb, verdict.candidates_tried)) {
    // W invariant under every A_iᵀ ⇒ W⊥ invariant under every A_i
    verdict.witness = dual->first.orthogonal_complement();
    verdict.source = "dual of " + dual->second;
    verdict.dual = true;
  }
  if (verdict.witness && !verdict.witness->invariant_under(t))
    throw NumericError("invariant subspace witness failed verification");
  return verdict;
}

/// B⁻¹A_iB block upper triangular with irreducible (no witness) diagonal blocks.
template <Scalar T>
struct BlockForm {
  Matrix<T> basis_change;
  std::vector<MatrixTuple<T>> blocks;

  std::vector<std::size_t> block_sizes() const {
    std::vector<std::size_t> s;
    for (const auto& b : blocks) s.push_back(b.dim());
    return s;
  }
};

template <Scalar T>
BlockForm<T> block_triangularize(const MatrixTuple<T>& t, const SearchBudget& sb = {}) {
  const std::size_t d = t.dim();
  const auto verdict = find_invariant_subspace(t, sb);
  if (!verdict.reducible()) return {Matrix<T>::identity(d), {t}};

  // complete the witness basis with standard vectors
  std::vector<Vector<T>> cols = verdict.witness->basis();
  const std::size_t k = cols.size();
  for (std::size_t j = 0; j < d && cols.size() < d; ++j) {
    auto trial = cols;
    trial.push_back(unit_vector<T>(d, j));
    if (Subspace<T>::span(trial, d).dim() == trial.size()) cols = std::move(trial);
  }
  const Matrix<T> b = Matrix<T>::from_columns(cols, d);
  const Matrix<T> b_inv = inverse(b);

  std::vector<Matrix<T>> top, bottom;
  for (const auto& a : t) {
    const Matrix<T> c = b_inv * a * b;
    Matrix<T> x(k, k), z(d - k, d - k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) x(i, j) = c(i, j);
    for (std::size_t i = k; i < d; ++i)
      for (std::size_t j = k; j < d; ++j) z(i - k, j - k) = c(i, j);
    top.push_back(std::move(x));
    bottom.push_back(std::move(z));
  }
  auto upper = block_triangularize(MatrixTuple<T>(std::move(top), t.label()), sb);
  auto lower = block_triangularize(MatrixTuple<T>(std::move(bottom), t.label()), sb);

  Matrix<T> diag(d, d);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) diag(i, j) = upper.basis_change(i, j);
  for (std::size_t i = 0; i < d - k; ++i)
    for (std::size_t j = 0; j < d - k; ++j) diag(k + i, k + j) = lower.basis_change(i, j);

  BlockForm<T> out{b * diag, std::move(upper.blocks)};
  for (auto& blk : lower.blocks) out.blocks.push_back(std::move(blk));
  return out;
}

template <Scalar T>
struct MixingObstruction {
  std::size_t n;
  Subspace<T> witness;
};

/// First n <= N whose length-n product tuple has an invariant-subspace
/// witness. std::nullopt means the sufficient mixing condition held up to N.
template <Scalar T>
std::optional<MixingObstruction<T>> mixing_obstruction_scan(const MatrixTuple<T>& t, std::size_t N,
                                                           const Budget& budget = {},
                                                           const SearchBudget& sb = {}) {
  if (N < 1) throw InvalidInput("mixing scan needs N >= 1");
  for (std::size_t n = 1; n <= N; ++n) {
    require_budget("mixing obstruction scan", std::pow(static_cast<double>(t.size()), static_cast<double>(n)), budget);
    const auto verdict = find_invariant_subspace(product_tuple(t, n, budget), sb);
    if (verdict.reducible()) return MixingObstruction<T>{n, *verdict.witness};
  }
  return std::nullopt;
}

/// Shortest (then lexicographically first) word of length <= N with zero
/// product. A zero prefix forces a zero product, so zero words are pruned.
template <Scalar T>
std::optional<Word> zero_product_search(const MatrixTuple<T>& t, std::size_t N, const Budget& budget = {}) {
  struct Node {
    Word word;
    Matrix<T> product;
    double bound;
  };
  std::vector<Node> level{{Word{}, Matrix<T>::identity(t.dim()), 1.0}};
  double evaluated = 0;
  for (std::size_t n = 1; n <= N; ++n) {
    evaluated += static_cast<double>(level.size() * t.size());
    require_budget("zero product search", evaluated, budget);
    std::vector<Node> next;
    next.reserve(level.size() * t.size());
    for (const auto& node : level)
      for (int s = 1; s <= static_cast<int>(t.size()); ++s) {
        Node child{node.word, t.symbol(s) * node.product,
                   node.bound * t.symbol_magnitude(s) * static_cast<double>(t.dim())};
        child.word.symbols.push_back(s);
        if (is_zero_product(child.product, child.bound)) return child.word;
        next.push_back(std::move(child));
      }
    level = std::move(next);
  }
  return std::nullopt;
}

/// Every candidate product B1·A_w·B2 with |w| < d vanished.
class AllCandidatesZero : public Error {
 public:
  using Error::Error;
};

struct ConnectingWord {
  Word word;
  double value;
};

/// Word w with |w| <= d-1 maximizing ‖B1·A_w·B2‖; ties go to the shortlex
/// smallest word.
template <Scalar T>
ConnectingWord connecting_word(const MatrixTuple<T>& t, const Matrix<T>& b1, const Matrix<T>& b2) {
  const std::size_t d = t.dim();
  if (b1.rows() != d || b1.cols() != d || b2.rows() != d || b2.cols() != d)
    throw InvalidInput("connecting_word: B1, B2 must be d x d");
  if (b1.is_zero() || b2.is_zero()) throw InvalidInput("connecting_word: B1 and B2 must be nonzero");
  ConnectingWord best{Word{}, operator_norm(Matrix<T>(b1 * b2))};
  for (std::size_t len = 1; len < d; ++len)
    for (const Word& w : enumerate_words(t.size(), len)) {
      const double v = operator_norm(Matrix<T>(b1 * word_product(t, w) * b2));
      if (v > best.value * (1 + 1e-12) && v > best.value) best = {w, v};
    }
  const double scale = operator_norm(b1) * operator_norm(b2);
  if (best.value <= (is_exact_v<T> ? 0.0 : 1e-14 * scale))
    throw AllCandidatesZero("every product B1*A_w*B2 with |w| < d is zero: the tuple is reducible");
  return best;
}

template <Scalar T>
struct StrongIrreducibilityVerdict {
  std::optional<std::vector<Subspace<T>>> invariant_union;  ///< FiniteInvariantUnion when set
  std::string seed;
  SearchBudget budget;

  bool found() const { return invariant_union.has_value(); }
};

/// A_iF ⊆ F for the union F of the given subspaces.
template <Scalar T>
bool union_is_invariant(const MatrixTuple<T>& t, const std::vector<Subspace<T>>& members) {
  for (const auto& s : members)
    for (const auto& a : t) {
      const auto img = s.image(a);
      if (img.dim() == 0) continue;
      if (std::none_of(members.begin(), members.end(), [&](const Subspace<T>& m) { return m.contains(img); }))
        return false;
    }
  return true;
}

/// Bounded search for a finite union of proper subspaces invariant under all
/// generators. A returned union is exact; NoWitnessFound is evidence only.
template <Scalar T>
StrongIrreducibilityVerdict<T> strong_irreducibility_scan(const MatrixTuple<T>& t, const SearchBudget& sb = {}) {
  StrongIrreducibilityVerdict<T> verdict;
  verdict.budget = sb;
  const std::size_t d = t.dim();
  if (d == 1) return verdict;

  std::vector<std::pair<Subspace<T>, std::string>> seeds;
  const auto products = detail::candidate_products(t, sb);
  for (std::size_t k = 0; k < products.size(); ++k) {
    const auto& m = products[k];
    const std::string tag = "product #" + std::to_string(k + 1);
    if constexpr (is_exact_v<T>) {
      Polynomial<Rational> p = characteristic_polynomial(m);
      for (const Rational& lambda : rational_roots(p)) {
        Matrix<Rational> shifted = m;
        for (std::size_t i = 0; i < d; ++i) shifted(i, i) -= lambda;
        seeds.emplace_back(Subspace<T>::span(nullspace(shifted), d), "eigenspace(" + tag + ", " + lambda.str() + ")");
      }
    }
    for (auto& v : detail::eigen_candidates(m)) seeds.emplace_back(Subspace<T>::span({v}, d), "eigenline(" + tag + ")");
  }

  std::vector<Subspace<T>> tried;
  for (auto& [seed, name] : seeds) {
    if (!seed.proper()) continue;
    if (std::find(tried.begin(), tried.end(), seed) != tried.end()) continue;
    tried.push_back(seed);
    std::vector<Subspace<T>> members{seed};
    bool failed = false;
    for (std::size_t i = 0; i < members.size() && !failed; ++i)
      for (const auto& a : t) {
        Subspace<T> img = members[i].image(a);
        if (img.dim() == 0) continue;
        if (img.dim() == d || members.size() >= sb.max_union) {
          failed = true;
          break;
        }
        if (std::any_of(members.begin(), members.end(), [&](const Subspace<T>& m) { return m.contains(img); }))
          continue;
        members.push_back(std::move(img));
      }
    if (failed) continue;
    // drop members already covered by a larger one
    std::vector<Subspace<T>> reduced;
    for (std::size_t i = 0; i < members.size(); ++i) {
      bool covered = false;
      for (std::size_t j = 0; j < members.size() && !covered; ++j)
        covered = j != i && members[j].contains(members[i]) &&
                  (members[j].dim() > members[i].dim() || j < i);
      if (!covered) reduced.push_back(members[i]);
    }
    if (!union_is_invariant(t, reduced)) continue;
    verdict.invariant_union = std::move(reduced);
    verdict.seed = name;
    return verdict;
  }
  return verdict;
}

}  // namespace thermoform
