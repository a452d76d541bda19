#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "support.hpp"
#include "thermoform/builtins.hpp"
#include "thermoform/structure.hpp"

namespace tf = thermoform;
namespace bi = thermoform::builtins;
using tf::Matrix;
using tf::MatrixTuple;
using tf::Rational;
using tf::Subspace;
using tf::Vector;
using tf::Word;
using RM = Matrix<Rational>;
using Q = Rational;

namespace {

Vector<Rational> e(std::size_t d, std::size_t k) { return tf::unit_vector<Rational>(d, k); }

Subspace<Rational> line(const Vector<Rational>& v) { return Subspace<Rational>::span({v}, v.size()); }

// rotations by the irrational angles atan(4/3) and atan(12/5)
MatrixTuple<Rational> rotations() {
  return MatrixTuple<Rational>({RM{{Q(3, 5), Q(-4, 5)}, {Q(4, 5), Q(3, 5)}},
                                RM{{Q(5, 13), Q(-12, 13)}, {Q(12, 13), Q(5, 13)}}});
}

MatrixTuple<Rational> single_rotation() {
  const RM r{{Q(3, 5), Q(-4, 5)}, {Q(4, 5), Q(3, 5)}};
  return MatrixTuple<Rational>({r, r});
}

}  // namespace

TEST(Subspace, CanonicalBasis) {
  const auto a = Subspace<Rational>::span({{Q(2), Q(4)}, {Q(1), Q(2)}}, 2);
  EXPECT_EQ(a.dim(), 1u);
  EXPECT_EQ(a, line({Q(1), Q(2)}));
  EXPECT_TRUE(a.contains(Vector<Rational>{Q(-3), Q(-6)}));
  EXPECT_FALSE(a.contains(e(2, 0)));
  EXPECT_EQ(a.orthogonal_complement(), line({Q(-2), Q(1)}));
}

TEST(OrbitSpan, Examples) {
  const auto id = MatrixTuple<Rational>({RM::identity(2), RM::identity(2)});
  EXPECT_EQ(tf::orbit_span(id, e(2, 0)), line(e(2, 0)));
  EXPECT_EQ(tf::orbit_span(bi::notmix2(), e(2, 0)).dim(), 2u);
  const auto upper = MatrixTuple<Rational>({RM{{Q(1), Q(2)}, {Q(0), Q(3)}}, RM{{Q(5), Q(-1)}, {Q(0), Q(7)}}});
  EXPECT_EQ(tf::orbit_span(upper, e(2, 0)), line(e(2, 0)));
  EXPECT_THROW(tf::orbit_span(upper, Vector<Rational>{Q(0), Q(0)}), tf::InvalidInput);
}

TEST(OrbitSpan, ContainsSeedAndIsInvariantWhenProper) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    // block upper triangular 3×3 tuples have e_1 as a common eigenvector
    std::vector<RM> ms;
    for (int i = 0; i < 2; ++i) {
      RM m = tf::testing::random_matrix(rng, 3);
      m(1, 0) = m(2, 0) = 0;
      ms.push_back(m);
    }
    const MatrixTuple<Rational> t(ms);
    Vector<Rational> v(3);
    for (auto& x : v) x = tf::testing::random_rational(rng);
    if (Subspace<Rational>::is_zero_vector(v)) continue;
    const auto s = tf::orbit_span(t, v);
    EXPECT_TRUE(s.contains(v));
    if (s.dim() < 3) EXPECT_TRUE(s.invariant_under(t));
  }
}

TEST(FindInvariantSubspace, Examples) {
  EXPECT_FALSE(tf::find_invariant_subspace(bi::notmix2()).reducible());

  const auto dp = tf::find_invariant_subspace(bi::diagpair());
  ASSERT_TRUE(dp.reducible());
  EXPECT_EQ(*dp.witness, line(e(2, 0)));

  const auto prod = tf::find_invariant_subspace(tf::product_tuple(bi::notmix2(), 2));
  ASSERT_TRUE(prod.reducible());
  EXPECT_EQ(*prod.witness, line(e(2, 0)));
}

TEST(FindInvariantSubspace, IrreducibleExamples) {
  EXPECT_FALSE(tf::find_invariant_subspace(rotations()).reducible());
  EXPECT_FALSE(tf::find_invariant_subspace(bi::eps(Q(1))).reducible());
  EXPECT_FALSE(tf::find_invariant_subspace(bi::alpha(Q(3, 5), Q(4, 5))).reducible());
}

TEST(FindInvariantSubspace, DualScanFindsHiddenHyperplane) {
  // common invariant plane {x_3 = x_1} with no common eigenvector inside it
  // reachable from the standard basis: conjugate a block tuple
  const RM b{{Q(1), Q(0), Q(1)}, {Q(0), Q(1), Q(2)}, {Q(1), Q(1), Q(0)}};
  const RM a1{{Q(0), Q(-1), Q(5)}, {Q(1), Q(0), Q(2)}, {Q(0), Q(0), Q(3)}};
  const RM a2{{Q(3, 5), Q(-4, 5), Q(1)}, {Q(4, 5), Q(3, 5), Q(-1)}, {Q(0), Q(0), Q(2)}};
  const auto t = tf::conjugate_tuple(MatrixTuple<Rational>({a1, a2}), tf::inverse(b));
  const auto v = tf::find_invariant_subspace(t);
  ASSERT_TRUE(v.reducible());
  EXPECT_TRUE(v.witness->proper());
  EXPECT_TRUE(v.witness->invariant_under(t));
}

TEST(FindInvariantSubspace, WitnessesAreExactlyInvariant) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<RM> ms;
    for (int i = 0; i < 3; ++i) {
      RM m = tf::testing::random_matrix(rng, 4);
      for (std::size_t r = 2; r < 4; ++r)
        for (std::size_t c = 0; c < 2; ++c) m(r, c) = 0;
      ms.push_back(m);
    }
    const auto b = tf::testing::random_rational_orthogonal(rng, 4);
    const auto t = tf::conjugate_tuple(MatrixTuple<Rational>(ms), b);
    const auto v = tf::find_invariant_subspace(t);
    ASSERT_TRUE(v.reducible()) << "trial " << trial;
    EXPECT_TRUE(v.witness->proper());
    EXPECT_TRUE(v.witness->invariant_under(t));
  }
}

TEST(FindInvariantSubspace, DoublePolicy) {
  EXPECT_FALSE(tf::find_invariant_subspace(tf::to_double(bi::notmix2())).reducible());
  const auto v = tf::find_invariant_subspace(tf::to_double(bi::diagpair()));
  ASSERT_TRUE(v.reducible());
  EXPECT_EQ(v.witness->dim(), 1u);
}

TEST(BlockTriangularize, Examples) {
  const auto irr = tf::block_triangularize(bi::notmix2());
  EXPECT_EQ(irr.blocks.size(), 1u);
  EXPECT_EQ(irr.basis_change, RM::identity(2));

  const auto dp = tf::block_triangularize(bi::diagpair());
  EXPECT_EQ(dp.block_sizes(), (std::vector<std::size_t>{1, 1}));

  const auto prod = tf::block_triangularize(tf::product_tuple(bi::notmix2(), 2));
  ASSERT_EQ(prod.blocks.size(), 2u);
  std::vector<Rational> first, second;
  for (const auto& m : prod.blocks[0]) first.push_back(m(0, 0));
  for (const auto& m : prod.blocks[1]) second.push_back(m(0, 0));
  // product order is A_{w2}A_{w1} over words (1,1),(1,2),(2,1),(2,2)
  EXPECT_EQ(first, (std::vector<Rational>{Q(2), Q(1), Q(4), Q(2)}));
  EXPECT_EQ(second, (std::vector<Rational>{Q(2), Q(4), Q(1), Q(2)}));
}

TEST(BlockTriangularize, SpectralRadiusIsBlockMaximum) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<RM> ms;
    for (int i = 0; i < 2; ++i) {
      RM m = tf::testing::random_matrix(rng, 3);
      m(1, 0) = m(2, 0) = 0;
      ms.push_back(m);
    }
    const auto t = tf::conjugate_tuple(MatrixTuple<Rational>(ms), tf::testing::random_rational_orthogonal(rng, 3));
    const auto bf = tf::block_triangularize(t);
    ASSERT_GE(bf.blocks.size(), 2u);
    const auto c = tf::conjugate_tuple(t, bf.basis_change);
    // block upper triangular: entries below the diagonal blocks vanish
    std::size_t offset = 0;
    for (const auto& blk : bf.blocks) {
      const std::size_t k = blk.dim();
      for (const auto& a : c)
        for (std::size_t i = offset + k; i < 3; ++i)
          for (std::size_t j = offset; j < offset + k; ++j) EXPECT_EQ(a(i, j), 0);
      offset += k;
    }
    for (std::size_t n = 1; n <= 4; ++n)
      for (const Word& w : tf::enumerate_words(2, n)) {
        double block_max = 0;
        for (const auto& blk : bf.blocks) block_max = std::max(block_max, tf::spectral_radius(tf::word_product(blk, w)));
        EXPECT_NEAR(tf::spectral_radius(tf::word_product(t, w)), block_max, 1e-9);
      }
  }
}

TEST(MixingObstruction, Examples) {
  const auto nm = tf::mixing_obstruction_scan(bi::notmix2(), 3);
  ASSERT_TRUE(nm.has_value());
  EXPECT_EQ(nm->n, 2u);
  EXPECT_EQ(nm->witness, line(e(2, 0)));
  EXPECT_FALSE(tf::mixing_obstruction_scan(bi::eps(Q(1)), 3).has_value());
  EXPECT_FALSE(tf::mixing_obstruction_scan(rotations(), 3).has_value());
  EXPECT_THROW(tf::mixing_obstruction_scan(bi::notmix2(), 0), tf::InvalidInput);
  tf::Budget tiny;
  tiny.max_products = 4;
  EXPECT_THROW(tf::mixing_obstruction_scan(bi::eps(Q(1)), 3, tiny), tf::BudgetExceeded);
}

TEST(ZeroProductSearch, Examples) {
  EXPECT_EQ(tf::zero_product_search(bi::nilpotent2(), 6), (Word{1, 1}));
  EXPECT_FALSE(tf::zero_product_search(bi::notmix2(), 6).has_value());
  const auto with_zero = MatrixTuple<Rational>({RM::identity(2), RM(2, 2)});
  EXPECT_EQ(tf::zero_product_search(with_zero, 3), (Word{2}));
  EXPECT_FALSE(tf::zero_product_search(bi::rankone4(), 4).has_value());
}

TEST(ZeroProductSearch, DoublePolicyUsesRelativeThreshold) {
  const auto t = MatrixTuple<double>({Matrix<double>{{0, 1e8}, {0, 0}}, Matrix<double>{{1e-8, 0}, {0, 1e-8}}});
  EXPECT_EQ(tf::zero_product_search(t, 3), (Word{1, 1}));
}

TEST(ConnectingWord, Examples) {
  const auto id = RM::identity(2);
  const auto rot = single_rotation();
  const auto c0 = tf::connecting_word(rot, id, id);
  EXPECT_TRUE(c0.word.empty());
  EXPECT_DOUBLE_EQ(c0.value, 1.0);
  // the maximum over |w| <= 1 is ‖A_1‖ = 2 here, not the empty word
  const auto cm = tf::connecting_word(bi::notmix2(), id, id);
  EXPECT_EQ(cm.word, (Word{1}));
  EXPECT_DOUBLE_EQ(cm.value, 2.0);

  const RM p{{Q(1), Q(0)}, {Q(0), Q(0)}};
  const auto c1 = tf::connecting_word(bi::notmix2(), p, p);
  EXPECT_TRUE(c1.word.empty());
  EXPECT_DOUBLE_EQ(c1.value, 1.0);

  const auto nil = bi::nilpotent2();
  const auto c2 = tf::connecting_word(nil, nil[0], nil[0]);
  EXPECT_EQ(c2.word, (Word{2}));
  EXPECT_DOUBLE_EQ(c2.value, 1.0);

  EXPECT_THROW(tf::connecting_word(bi::diagpair(), RM{{Q(0), Q(1)}, {Q(0), Q(0)}}, RM{{Q(0), Q(1)}, {Q(0), Q(0)}}),
               tf::AllCandidatesZero);
  EXPECT_THROW(tf::connecting_word(nil, RM(2, 2), id), tf::InvalidInput);
}

TEST(StrongIrreducibility, Examples) {
  const auto nm = tf::strong_irreducibility_scan(bi::notmix2());
  ASSERT_TRUE(nm.found());
  ASSERT_EQ(nm.invariant_union->size(), 2u);
  const auto& u = *nm.invariant_union;
  EXPECT_TRUE((u[0] == line(e(2, 0)) && u[1] == line(e(2, 1))) || (u[0] == line(e(2, 1)) && u[1] == line(e(2, 0))));
  EXPECT_TRUE(tf::union_is_invariant(bi::notmix2(), u));

  EXPECT_FALSE(tf::strong_irreducibility_scan(bi::eps(Q(1))).found());
  EXPECT_FALSE(tf::strong_irreducibility_scan(single_rotation()).found());
}
