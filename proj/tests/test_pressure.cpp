#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "support.hpp"
#include "thermoform/builtins.hpp"
#include "thermoform/pressure.hpp"

namespace tf = thermoform;
namespace bi = thermoform::builtins;
using tf::Matrix;
using tf::MatrixTuple;
using tf::Rational;
using RM = Matrix<Rational>;
using Q = Rational;

namespace {

MatrixTuple<Rational> scalars23() { return MatrixTuple<Rational>({RM{{Q(2)}}, RM{{Q(3)}}}); }

MatrixTuple<Rational> orthogonal_pair() {
  return MatrixTuple<Rational>({RM{{Q(3, 5), Q(-4, 5)}, {Q(4, 5), Q(3, 5)}}, RM{{Q(0), Q(1)}, {Q(1), Q(0)}}});
}

}  // namespace

TEST(PartitionSum, Examples) {
  EXPECT_DOUBLE_EQ(tf::partition_sum(scalars23(), 2.0, 1), 13.0);
  // diagonal products diag(2,2), diag(1,4), diag(4,1), diag(2,2): 4 + 16 + 16 + 4
  EXPECT_NEAR(tf::partition_sum(bi::notmix2(), 2.0, 2), 40.0, 1e-12);
  EXPECT_NEAR(tf::partition_sum(bi::nilpotent2(), 2.0, 2), 2.0, 1e-12);
  EXPECT_THROW(tf::partition_sum(bi::notmix2(), 0.0, 2), tf::InvalidInput);
  EXPECT_THROW(tf::partition_sum(bi::notmix2(), 2.0, 0), tf::InvalidInput);
}

TEST(PartitionSum, ExactFrobeniusSurrogate) {
  EXPECT_EQ(tf::frobenius_partition_sum(bi::notmix2(), 2), Q(50));
  EXPECT_EQ(tf::frobenius_partition_sum(bi::notmix2(), 3), Q(250));
  EXPECT_EQ(tf::frobenius_partition_sum(bi::nilpotent2(), 5), Q(2));
}

TEST(PartitionSum, BudgetCap) {
  tf::EnumerationOptions o;
  o.budget.max_products = 100;
  EXPECT_THROW(tf::partition_sum(bi::notmix2(), 2.0, 7, o), tf::BudgetExceeded);
  EXPECT_NO_THROW(tf::partition_sum(bi::notmix2(), 2.0, 5, o));
}

TEST(PartitionSum, LogSpaceFallback) {
  const auto t = MatrixTuple<double>({Matrix<double>{{1e80, 0}, {0, 1}}, Matrix<double>{{0, 1e80}, {1, 0}}});
  const double ls = tf::log_partition_sum(t, 2.0, 2);
  // product norms 1e160, 1e80, 1e160, 1e80
  EXPECT_NEAR(ls, 320 * std::log(10.0) + std::log(2.0), 1e-9);
  EXPECT_TRUE(std::isinf(tf::partition_sum(t, 2.0, 2)));
}

TEST(PartitionSum, ThreadCountDoesNotChangeResults) {
  std::mt19937_64 rng(5);
  const auto t = tf::testing::random_tuple(rng, 3, 3);
  tf::EnumerationOptions one, many;
  many.threads = 3;
  const auto a = tf::pressure_bracket(t, 1.5, 6, one);
  const auto b = tf::pressure_bracket(t, 1.5, 6, many);
  ASSERT_EQ(a.series.size(), b.series.size());
  for (std::size_t k = 0; k < a.series.size(); ++k) {
    EXPECT_EQ(a.series[k].log_partition, b.series[k].log_partition);
    EXPECT_EQ(a.series[k].spectral, b.series[k].spectral);
  }
  EXPECT_EQ(a.periodic_word, b.periodic_word);
}

TEST(PressureBracket, ScalarCollapses) {
  const auto b = tf::pressure_bracket(scalars23(), 1.0, 6);
  ASSERT_TRUE(b.exact);
  EXPECT_NEAR(*b.exact, std::log(5.0), 1e-14);
  EXPECT_NEAR(b.upper, std::log(5.0), 1e-12);
  EXPECT_NEAR(b.periodic_lower, std::log(3.0), 1e-14);
}

TEST(PressureBracket, NotMix) {
  const auto b8 = tf::pressure_bracket(bi::notmix2(), 2.0, 8);
  ASSERT_TRUE(b8.exact);
  EXPECT_NEAR(*b8.exact, std::log(5.0), 1e-12);
  EXPECT_NEAR(b8.periodic_lower, std::log(4.0), 1e-12);
  // independent enumeration: min_n (1/n) log S_n − log 5
  EXPECT_NEAR(b8.upper - std::log(5.0), 0.0824043, 1e-6);
  const auto b10 = tf::pressure_bracket(bi::notmix2(), 2.0, 10);
  EXPECT_NEAR(b10.upper - std::log(5.0), 0.0673371, 1e-6);
  ASSERT_TRUE(b8.series.back().frobenius);
  EXPECT_GE(*b8.series.back().frobenius, b8.series.back().upper_n - 1e-12);
}

TEST(PressureBracket, Nilpotent) {
  const auto b = tf::pressure_bracket(bi::nilpotent2(), 2.0, 8);
  EXPECT_NEAR(b.upper, std::log(2.0) / 8, 1e-12);
  EXPECT_GT(b.upper, 0.0);
  EXPECT_NEAR(b.periodic_lower, 0.0, 1e-12);
  ASSERT_TRUE(b.exact);
  EXPECT_NEAR(*b.exact, 0.0, 1e-12);
}

TEST(PressureExactEven, Examples) {
  EXPECT_NEAR(tf::pressure_exact_even(bi::notmix2(), 1), std::log(5.0), 1e-12);
  EXPECT_NEAR(tf::pressure_exact_even(bi::nilpotent2(), 1), 0.0, 1e-12);
  EXPECT_NEAR(tf::pressure_exact_even(scalars23(), 1), std::log(13.0), 1e-12);
  tf::Budget b;
  b.max_kron_dim = 8;
  EXPECT_THROW(tf::pressure_exact_even(bi::notmix2(), 2, b), tf::BudgetExceeded);
}

TEST(PRadius, Examples) {
  const auto nm = tf::p_radius(bi::notmix2(), 2.0, 4);
  ASSERT_TRUE(nm.exact);
  EXPECT_NEAR(*nm.exact, std::sqrt(5.0), 1e-12);
  EXPECT_NEAR(*tf::p_radius(scalars23(), 1.0, 4).exact, 5.0, 1e-12);
  EXPECT_NEAR(*tf::p_radius(bi::nilpotent2(), 2.0, 4).exact, 1.0, 1e-12);
  const auto odd = tf::p_radius(bi::notmix2(), 3.0, 6);
  EXPECT_FALSE(odd.exact);
  EXPECT_LE(odd.lower, odd.upper);
}

TEST(JsrBracket, Examples) {
  const auto o = tf::jsr_bracket(orthogonal_pair(), 1);
  EXPECT_NEAR(o.lower, 1.0, 1e-12);
  EXPECT_NEAR(o.upper, 1.0, 1e-12);
  const auto nm = tf::jsr_bracket(bi::notmix2(), 2);
  EXPECT_NEAR(nm.lower, 2.0, 1e-12);
  EXPECT_NEAR(nm.upper, 2.0, 1e-12);
  const auto nil = tf::jsr_bracket(bi::nilpotent2(), 2);
  EXPECT_NEAR(nil.lower, 1.0, 1e-12);
  EXPECT_NEAR(nil.upper, 1.0, 1e-12);
}

class PressureProperties : public ::testing::TestWithParam<int> {};

TEST_P(PressureProperties, SubadditiveMonotoneAndConsistent) {
  std::mt19937_64 rng(1000 + GetParam());
  const std::size_t d = 2 + GetParam() % 2;
  const auto t = tf::testing::random_tuple(rng, 2, d);
  const auto b = tf::pressure_bracket(t, 2.0, 7);

  for (std::size_t m = 1; m <= 3; ++m)
    for (std::size_t n = 1; n + m <= 7; ++n)
      EXPECT_LE(b.series[m + n - 1].log_partition,
                b.series[m - 1].log_partition + b.series[n - 1].log_partition + 1e-9);
  for (std::size_t k = 1; k < b.series.size(); ++k) {
    EXPECT_LE(b.series[k].upper, b.series[k - 1].upper);
    EXPECT_GE(b.series[k].periodic_lower, b.series[k - 1].periodic_lower);
  }
  ASSERT_TRUE(b.exact);
  EXPECT_LE(b.periodic_lower, *b.exact + 1e-9);
  EXPECT_LE(*b.exact, b.upper + 1e-9);

  const auto jsr = tf::jsr_bracket(t, 6);
  EXPECT_LE(jsr.lower, jsr.upper + 1e-12);
  for (std::size_t ell = 1; ell <= 2; ++ell) {
    const double rho_2l = std::exp(tf::pressure_exact_even(t, ell) / (2.0 * ell));
    EXPECT_LE(jsr.lower, rho_2l * (1 + 1e-9));
  }
}

TEST_P(PressureProperties, KroneckerConsistency) {
  std::mt19937_64 rng(2000 + GetParam());
  const auto t = tf::testing::random_tuple(rng, 2, 2);
  const double lhs = *tf::p_radius(tf::kronecker_power(t, 2), 2.0, 1).exact;
  const double rhs = std::pow(*tf::p_radius(t, 4.0, 1).exact, 2.0);
  EXPECT_NEAR(lhs, rhs, 1e-9 * std::max(1.0, rhs));
}

INSTANTIATE_TEST_SUITE_P(Random, PressureProperties, ::testing::Range(0, 8));
