#include <cmath>
#include <complex>

#include <gtest/gtest.h>

#include "tabml/core/error.hpp"
#include "tabml/unsupervised/eigen.hpp"
#include "tabml/unsupervised/projection.hpp"
#include "test_util.hpp"

namespace tabml::unsupervised {
namespace {

Matrix RandomSymmetric(std::size_t n, std::uint64_t seed) {
  Matrix a = testing::RandomMatrix(n, n, seed);
  Matrix s(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) s(i, j) = a(i, j) + a(j, i);
  }
  return s;
}

// Roots of the characteristic polynomial, descending.
Vector CharacteristicRoots(const Matrix& a) {
  if (a.rows() == 2) {
    const double tr = a(0, 0) + a(1, 1);
    const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    const double disc = std::sqrt(tr * tr / 4.0 - det);
    return {tr / 2.0 + disc, tr / 2.0 - disc};
  }
  // 3x3: lambda^3 - c2 lambda^2 + c1 lambda - c0, solved trigonometrically.
  const double c2 = a(0, 0) + a(1, 1) + a(2, 2);
  const double c1 = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0) + a(0, 0) * a(2, 2) -
                    a(0, 2) * a(2, 0) + a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1);
  const double c0 = a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
                    a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
                    a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
  const double shift = c2 / 3.0;
  const double p = c1 - c2 * c2 / 3.0;
  const double q = -2.0 * c2 * c2 * c2 / 27.0 + c2 * c1 / 3.0 - c0;
  const double m = 2.0 * std::sqrt(-p / 3.0);
  const double theta = std::acos(std::clamp(3.0 * q / (p * m), -1.0, 1.0)) / 3.0;
  Vector roots;
  for (int k = 0; k < 3; ++k) roots.push_back(shift + m * std::cos(theta - 2.0 * M_PI * k / 3.0));
  std::sort(roots.rbegin(), roots.rend());
  return roots;
}

TEST(Jacobi, MatchesCharacteristicPolynomial) {
  for (std::size_t n : {2u, 3u}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Matrix a = RandomSymmetric(n, seed * 7 + n);
      SymmetricEigen eig = JacobiEigen(a);
      Vector roots = CharacteristicRoots(a);
      for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(eig.values[i], roots[i], 1e-9);
    }
  }
}

TEST(Jacobi, EigenpairsAndOrthonormality) {
  Matrix a = RandomSymmetric(7, 42);
  SymmetricEigen eig = JacobiEigen(a);
  for (std::size_t c = 0; c < 7; ++c) {
    Vector v = eig.vectors.column(c);
    Vector av = a * v;
    for (std::size_t i = 0; i < 7; ++i) EXPECT_NEAR(av[i], eig.values[c] * v[i], 1e-9);
    for (std::size_t d = 0; d < 7; ++d) {
      EXPECT_NEAR(Dot(v, eig.vectors.column(d)), c == d ? 1.0 : 0.0, 1e-10);
    }
    auto big = std::max_element(v.begin(), v.end(), [](double x, double y) { return std::abs(x) < std::abs(y); });
    EXPECT_GT(*big, 0.0);
    if (c > 0) EXPECT_GE(eig.values[c - 1], eig.values[c]);
  }
}

TEST(Pca, LineYEqualsX) {
  Matrix x{{1, 1}, {2, 2}, {3, 3}, {5, 5}};
  ProjectionModel m = FitPca(x, 2);
  EXPECT_NEAR(m.components(0, 0), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(m.components(1, 0), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(m.explained_variance[1], 0.0, 1e-9);
}

TEST(Pca, FullBasisReconstructsAndPreservesVariance) {
  Matrix x = testing::RandomMatrix(30, 4, 5);
  for (std::size_t r = 0; r < 30; ++r) x(r, 1) += 2.0 * x(r, 0);
  ProjectionModel m = FitPca(x, 4);
  Matrix z = Project(m, x);
  Matrix back = z * m.components.transpose();
  for (std::size_t r = 0; r < 30; ++r) {
    for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(back(r, c) + m.mean[c], x(r, c), 1e-8);
  }
  double sum = 0.0;
  for (std::size_t c = 0; c < 4; ++c) {
    sum += m.explained_variance[c];
    if (c > 0) EXPECT_GE(m.explained_variance[c - 1], m.explained_variance[c]);
    double mean = 0.0;
    for (std::size_t r = 0; r < 30; ++r) mean += z(r, c);
    EXPECT_NEAR(mean / 30.0, 0.0, 1e-8);
    for (std::size_t d = 0; d < 4; ++d) {
      EXPECT_NEAR(Dot(m.components.column(c), m.components.column(d)), c == d ? 1.0 : 0.0, 1e-8);
    }
  }
  EXPECT_NEAR(sum, m.total_variance, 1e-8);
}

TEST(Pca, TooManyComponents) {
  try {
    FitPca(testing::RandomMatrix(3, 5, 1), 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kComponentCountTooLarge);
  }
}

TEST(KernelPca, LinearKernelMatchesPcaUpToSign) {
  Matrix x = testing::RandomMatrix(25, 3, 8);
  for (std::size_t r = 0; r < 25; ++r) x(r, 2) = 0.5 * x(r, 0) + 3.0 * x(r, 2);
  Matrix pca = Project(FitPca(x, 2), x);
  ProjectionModel km = FitKernelPca(x, 2, Kernel::kLinear);
  Matrix kp = Project(km, x);
  for (std::size_t c = 0; c < 2; ++c) {
    const double sign = pca(0, c) * kp(0, c) < 0 ? -1.0 : 1.0;
    for (std::size_t r = 0; r < 25; ++r) EXPECT_NEAR(kp(r, c), sign * pca(r, c), 1e-7);
  }
}

TEST(KernelPca, RbfKernelAndCentering) {
  Matrix x = testing::RandomMatrix(15, 2, 9);
  EXPECT_EQ(KernelValue(Kernel::kRbf, 0.7, x.row(3), x.row(3)), 1.0);
  Matrix k = CenteredKernel(x, Kernel::kRbf, 0.5);
  for (std::size_t r = 0; r < 15; ++r) {
    double s = 0.0;
    for (double v : k.row(r)) s += v;
    EXPECT_NEAR(s, 0.0, 1e-8);
  }
  ProjectionModel m = FitKernelPca(x, 3, Kernel::kRbf);
  EXPECT_DOUBLE_EQ(m.gamma, 0.5);
  // Training rows projected out of sample land on the fitted coordinates:
  // sqrt(lambda) * eigenvector, so each column has squared norm lambda.
  Matrix z = Project(m, x);
  for (std::size_t c = 0; c < 3; ++c) {
    double sq = 0.0;
    for (std::size_t r = 0; r < 15; ++r) sq += z(r, c) * z(r, c);
    EXPECT_NEAR(sq, m.explained_variance[c] * 14.0, 1e-8);
  }
}

TEST(KernelPca, Errors) {
  Matrix x = testing::RandomMatrix(4, 2, 1);
  EXPECT_THROW(FitKernelPca(x, 5, Kernel::kRbf), Error);
  try {
    FitKernelPca(x, 2, Kernel::kRbf, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonPositiveGamma);
  }
}

}  // namespace
}  // namespace tabml::unsupervised
