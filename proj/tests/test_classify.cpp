#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "support.hpp"
#include "thermoform/builtins.hpp"
#include "thermoform/classify.hpp"

namespace tf = thermoform;
namespace bi = thermoform::builtins;
using tf::Matrix;
using tf::MatrixTuple;
using tf::Rational;
using tf::Word;
using RM = Matrix<Rational>;
using DM = Matrix<double>;
using Q = Rational;

namespace {

MatrixTuple<Rational> scalars(int a, int b) { return MatrixTuple<Rational>({RM{{Q(a)}}, RM{{Q(b)}}}); }

RM rot_3_4() { return RM{{Q(3, 5), Q(-4, 5)}, {Q(4, 5), Q(3, 5)}}; }
RM rot_5_12() { return RM{{Q(5, 13), Q(-12, 13)}, {Q(12, 13), Q(5, 13)}}; }
RM reflection() { return RM{{Q(1), Q(0)}, {Q(0), Q(-1)}}; }

MatrixTuple<Rational> scaled_orthogonal() { return MatrixTuple<Rational>({rot_3_4() * Q(2), reflection() * Q(3)}); }

// three-cycle e1 → e2 → e3 → e1 split over three generators
MatrixTuple<Rational> three_cycle() {
  RM a1(3, 3), a2(3, 3), a3(3, 3);
  a1(1, 0) = 1;
  a2(2, 1) = 1;
  a3(0, 2) = 1;
  return MatrixTuple<Rational>({a1, a2, a3});
}

tf::Subspace<Rational> axis(std::size_t d, std::size_t k) {
  return tf::Subspace<Rational>::span({tf::unit_vector<Rational>(d, k)}, d);
}

}  // namespace

TEST(ZeroEntropyStructure, Nilpotent) {
  const auto ps = tf::zero_entropy_structure(bi::nilpotent2());
  ASSERT_TRUE(ps.has_value());
  EXPECT_EQ(ps->n, 2u);
  EXPECT_EQ(ps->r, 1u);
  EXPECT_EQ(ps->omega, (Word{1, 2}));
  EXPECT_EQ(ps->R[0], axis(2, 1));
  EXPECT_EQ(ps->R[1], axis(2, 0));
  const auto ent = tf::entropy_estimate(tf::kusuoka_measure(bi::nilpotent2()), 4);
  EXPECT_LE(ent.back().conditional, 1e-9);
}

TEST(ZeroEntropyStructure, ThreeCycle) {
  const auto ps = tf::zero_entropy_structure(three_cycle());
  ASSERT_TRUE(ps.has_value());
  EXPECT_EQ(ps->n, 3u);
  EXPECT_EQ(ps->r, 1u);
  EXPECT_EQ(ps->omega, (Word{1, 2, 3}));
  const auto ent = tf::entropy_estimate(tf::kusuoka_measure(three_cycle()), 6);
  EXPECT_LE(ent.back().conditional, 1e-9);
}

TEST(ZeroEntropyStructure, NoneForFullSupport) {
  EXPECT_FALSE(tf::zero_entropy_structure(bi::notmix2()).has_value());
  EXPECT_FALSE(tf::zero_entropy_structure(MatrixTuple<Rational>({rot_3_4(), rot_5_12()})).has_value());
}

TEST(MultiplicativeSR, Examples) {
  const auto al = tf::multiplicative_sr_check(bi::alpha(Q(3, 5), Q(4, 5)), 3);
  ASSERT_FALSE(al.holds());
  EXPECT_EQ(al.counterexample->w1, (Word{1}));
  EXPECT_EQ(al.counterexample->w2, (Word{2}));
  EXPECT_NEAR(al.counterexample->rho_product, 16.0 / 25, 1e-14);
  EXPECT_NEAR(al.counterexample->rho_w1 * al.counterexample->rho_w2, 12.0 / 25, 1e-14);

  const auto r4 = tf::multiplicative_sr_check(bi::rankone4(), 4);
  EXPECT_TRUE(r4.holds());
  EXPECT_EQ(r4.L, 4u);
  EXPECT_TRUE(tf::multiplicative_sr_check(scalars(2, 3), 4).holds());
  EXPECT_THROW(tf::multiplicative_sr_check(scalars(2, 3), 0), tf::InvalidInput);
}

TEST(MultiplicativeSR, HoldsImpliesBernoulliCylinders) {
  for (const auto& t : {bi::rankone4(), scalars(2, 3), scaled_orthogonal()}) {
    ASSERT_TRUE(tf::multiplicative_sr_check(t, 3).holds());
    EXPECT_LE(tf::bernoulli_defect(tf::kusuoka_measure(t), 3), 1e-8) << t.label();
  }
  EXPECT_GT(tf::bernoulli_defect(tf::kusuoka_measure(bi::notmix2()), 2), 0.05);
}

TEST(Conformal, ScaledOrthogonal) {
  const auto v = tf::conformal_conjugacy_check(scaled_orthogonal());
  ASSERT_TRUE(v.found()) << v.reason;
  EXPECT_TRUE(v.exact_kernel);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR((*v.conjugator)(i, j), i == j ? 1.0 : 0.0, 1e-12);
}

TEST(Conformal, RoundTrip) {
  const RM b{{Q(2), Q(1)}, {Q(0), Q(1)}};
  const auto t = tf::conjugate_tuple(scaled_orthogonal(), b);
  const auto v = tf::conformal_conjugacy_check(t);
  ASSERT_TRUE(v.found()) << v.reason;
  EXPECT_LE(v.residual, 1e-8);
}

TEST(Conformal, NotMixHasNoPositiveDefiniteElement) {
  const auto v = tf::conformal_conjugacy_check(bi::notmix2());
  EXPECT_FALSE(v.found());
  EXPECT_EQ(v.fixed_space_dim, 1u);
  EXPECT_EQ(v.reason, "NoPositiveDefiniteElement");
  EXPECT_EQ(tf::conformal_conjugacy_check(bi::nilpotent2()).reason, "NotInvertible");
}

TEST(Conformal, FloatingPathWithIrrationalScale) {
  // |det|^{2/d} = 2^{2/3} is irrational for d = 3
  std::vector<DM> ms;
  const double c = std::cbrt(2.0);
  ms.push_back(DM{{c, 0, 0}, {0, 0, -c}, {0, c, 0}});
  ms.push_back(DM{{0, 1, 0}, {1, 0, 0}, {0, 0, 1}});
  const MatrixTuple<double> t(ms);
  const DM b{{1, 2, 0}, {0, 1, 1}, {1, 0, 3}};
  const auto v = tf::conformal_conjugacy_check(tf::conjugate_tuple(t, b));
  ASSERT_TRUE(v.found()) << v.reason;
  EXPECT_FALSE(v.exact_kernel);
  EXPECT_LE(v.residual, 1e-8);
}

class ConformalProperty : public ::testing::TestWithParam<int> {};

TEST_P(ConformalProperty, RandomConjugatedSimilarities) {
  std::mt19937_64 rng(500 + GetParam());
  const std::size_t d = 2 + GetParam() % 2;
  std::vector<RM> ms;
  for (int i = 0; i < 2; ++i) {
    Q scale = tf::testing::random_rational(rng, 3, 3);
    while (scale == 0) scale = tf::testing::random_rational(rng, 3, 3);
    ms.push_back(tf::testing::random_rational_orthogonal(rng, d) * scale);
  }
  RM b = tf::testing::random_matrix(rng, d);
  while (tf::determinant(b) == 0) b = tf::testing::random_matrix(rng, d);
  const auto t = tf::conjugate_tuple(MatrixTuple<Rational>(ms), b);
  const auto v = tf::conformal_conjugacy_check(t);
  ASSERT_TRUE(v.found()) << v.reason;
  EXPECT_LE(v.residual, 1e-8);

  // exponents agree up to the conjugation distortion 2 log κ(B) / n; reducible draws have degenerate Q
  try {
    const std::size_t n = 6;
    const auto spec = tf::lyapunov_spectrum(tf::kusuoka_measure(t), n);
    const auto sv = tf::singular_values(tf::to_double(b));
    const double allowance = 2.0 * std::log(sv.front() / sv.back()) / n;
    for (double x : spec.back()) EXPECT_LE(std::fabs(x - spec.back().front()), allowance + 1e-9);
  } catch (const tf::DegenerateEigenmatrix&) {
  }
  // unconjugated similarities have exactly equal exponents
  try {
    const auto spec = tf::lyapunov_spectrum(tf::kusuoka_measure(MatrixTuple<Rational>(ms)), 4);
    for (double x : spec.back()) EXPECT_NEAR(x, spec.back().front(), 1e-9);
  } catch (const tf::DegenerateEigenmatrix&) {
  }
}

INSTANTIATE_TEST_SUITE_P(Random, ConformalProperty, ::testing::Range(0, 8));

TEST(EquilibriumEquality, Examples) {
  const RM b{{Q(2), Q(1)}, {Q(1), Q(1)}};
  const auto nm = bi::notmix2();
  EXPECT_TRUE(tf::equilibrium_equality_check(nm, 2.0, tf::conjugate_tuple(nm, b), 2.0, 6).equal);
  EXPECT_TRUE(tf::equilibrium_equality_check(nm, 2.0, tf::transpose_tuple(nm), 2.0, 6).equal);
  const auto sc = tf::equilibrium_equality_check(scalars(2, 3), 2.0, scalars(4, 9), 1.0, 6);
  EXPECT_TRUE(sc.equal);
  EXPECT_NEAR(sc.pressure_a, std::log(13.0), 1e-12);
  EXPECT_NEAR(sc.pressure_b, std::log(13.0), 1e-12);
}

TEST(EquilibriumEquality, ReflexiveSymmetricAndDetectsDifference) {
  const auto nm = bi::notmix2();
  const auto al = bi::alpha(Q(3, 5), Q(4, 5));
  EXPECT_TRUE(tf::equilibrium_equality_check(al, 2.0, al, 2.0, 5).equal);
  const auto ab = tf::equilibrium_equality_check(nm, 2.0, al, 2.0, 5);
  const auto ba = tf::equilibrium_equality_check(al, 2.0, nm, 2.0, 5);
  EXPECT_FALSE(ab.equal);
  EXPECT_FALSE(ba.equal);
  EXPECT_EQ(ab.violation, ba.violation);
  EXPECT_THROW(tf::equilibrium_equality_check(nm, 3.0, nm, 3.0, 4), tf::UnsupportedPrecision);
  EXPECT_THROW(tf::equilibrium_equality_check(nm, 2.0, bi::rankone4(), 2.0, 4), tf::InvalidInput);
}

TEST(SIndependence, Examples) {
  const auto nil = tf::s_independence_check(bi::nilpotent2(), 6);
  ASSERT_TRUE(nil.lambda);
  EXPECT_NEAR(*nil.lambda, 0.0, 1e-12);
  const auto r4 = tf::s_independence_check(bi::rankone4(), 4);
  ASSERT_TRUE(r4.lambda);
  EXPECT_NEAR(*r4.lambda, 0.0, 1e-12);
  const auto nm = tf::s_independence_check(bi::notmix2(), 4);
  EXPECT_FALSE(nm.lambda);
  ASSERT_TRUE(nm.violation);
  EXPECT_EQ(nm.violation->first, (Word{1}));
  EXPECT_EQ(nm.violation->second, (Word{1, 2}));
  // floating nilpotents must not break the constant
  EXPECT_TRUE(tf::s_independence_check(tf::to_double(bi::nilpotent2()), 6).lambda);
}

TEST(SIndependence, ImpliesAffinePressure) {
  for (const auto& t : {bi::nilpotent2(), bi::rankone4()}) {
    const auto v = tf::s_independence_check(t, 6);
    ASSERT_TRUE(v.lambda);
    const double c1 = tf::pressure_exact_even(t, 1) - 2 * *v.lambda;
    const double c2 = tf::pressure_exact_even(t, 2) - 4 * *v.lambda;
    EXPECT_NEAR(c1, c2, 1e-8) << t.label();
  }
}

TEST(MaximalEntropy, Examples) {
  const auto orth = MatrixTuple<Rational>({rot_3_4(), reflection()});
  EXPECT_TRUE(tf::maximal_entropy_check(tf::kusuoka_measure(orth), 6).maximal);
  const auto nm = tf::maximal_entropy_check(tf::kusuoka_measure(bi::notmix2()), 4);
  EXPECT_FALSE(nm.maximal);
  EXPECT_FALSE(tf::maximal_entropy_check(tf::kusuoka_measure(bi::alpha(Q(3, 5), Q(4, 5))), 4).maximal);
}

TEST(ClassificationReport, Nilpotent) {
  const auto r = tf::classification_report(bi::nilpotent2());
  ASSERT_TRUE(r.support);
  EXPECT_EQ(*r.support, (Word{1, 1}));
  ASSERT_TRUE(r.zero_entropy && r.zero_entropy->has_value());
  ASSERT_TRUE(r.s_independence && r.s_independence->lambda);
  EXPECT_NEAR(*r.s_independence->lambda, 0.0, 1e-12);
  EXPECT_TRUE(r.consistent());
}

TEST(ClassificationReport, NotMix) {
  const auto r = tf::classification_report(bi::notmix2());
  ASSERT_TRUE(r.mixing_obstruction && r.mixing_obstruction->has_value());
  EXPECT_EQ((*r.mixing_obstruction)->n, 2u);
  ASSERT_TRUE(r.bernoulli);
  EXPECT_FALSE(r.bernoulli->holds());
  ASSERT_TRUE(r.conformal);
  EXPECT_FALSE(r.conformal->found());
  ASSERT_TRUE(r.peripheral);
  EXPECT_FALSE(r.peripheral->mixing_consistent());
  EXPECT_TRUE(r.consistent());
  EXPECT_TRUE(r.errors.empty());
}

TEST(ClassificationReport, ScaledOrthogonal) {
  const auto r = tf::classification_report(scaled_orthogonal());
  ASSERT_TRUE(r.conformal && r.conformal->found());
  // unequal scales 2 and 3 weight the symbols 4/13 and 9/13
  ASSERT_TRUE(r.maximal_entropy);
  EXPECT_FALSE(r.maximal_entropy->maximal);
  EXPECT_TRUE(r.consistent());
  const auto eq = tf::classification_report(MatrixTuple<Rational>({rot_3_4() * Q(2), reflection() * Q(2)}));
  ASSERT_TRUE(eq.maximal_entropy);
  EXPECT_TRUE(eq.maximal_entropy->maximal);
  EXPECT_TRUE(eq.consistent());
}

TEST(ClassificationReport, ConjugatedSimilarityCrossCheck) {
  const RM b{{Q(2), Q(1)}, {Q(0), Q(1)}};
  const auto r = tf::classification_report(tf::conjugate_tuple(scaled_orthogonal(), b));
  ASSERT_TRUE(r.conformal && r.conformal->found());
  EXPECT_TRUE(r.consistent());
}

TEST(ClassificationReport, ReducibleTupleReportsKusuokaError) {
  const auto r = tf::classification_report(bi::diagpair());
  EXPECT_TRUE(r.errors.count("kusuoka"));
  ASSERT_TRUE(r.irreducibility);
  EXPECT_TRUE(r.irreducibility->reducible());
}
