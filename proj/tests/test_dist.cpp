#include <doctest.h>

#include <cmath>
#include <vector>

#include "gsa/dist.hpp"
#include "gsa/rng.hpp"
#include "oracles.hpp"

using namespace gsa;

TEST_CASE("standard normal cdf") {
  CHECK(std_normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(std_normal_cdf(8.0) > 1.0 - 1e-14);
  CHECK(std_normal_cdf(-8.0) < 1e-14);

  // Quadrature oracle pins the frozen reference value, then the library.
  const double oracle = oracles::normal_cdf_quadrature(1.0);
  CHECK(oracle == doctest::Approx(0.8413447460685429).epsilon(1e-13));
  CHECK(std_normal_cdf(1.0) == doctest::Approx(oracle).epsilon(1e-13));
  for (double x : {0.1, 0.5, 1.5, 2.0, 3.0, 4.5, 6.0})
    CHECK(std::fabs(std_normal_cdf(x) - oracles::normal_cdf_quadrature(x)) < 1e-12);

  SUBCASE("symmetry") {
    for (double x = -6.0; x <= 6.0; x += 0.37)
      CHECK(std_normal_cdf(-x) == doctest::Approx(1.0 - std_normal_cdf(x)).epsilon(1e-13));
  }

  SUBCASE("nondecreasing over a dense grid") {
    double prev = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const double x = -10.0 + 20.0 * i / 9999.0;
      const double v = std_normal_cdf(x);
      CHECK(v >= prev);
      prev = v;
    }
  }
}

TEST_CASE("standard normal quantile") {
  CHECK(std_normal_quantile(0.5) == 0.0);
  CHECK(std_normal_quantile(0.841344746) == doctest::Approx(1.0).epsilon(1e-8));

  SUBCASE("round trip against the cdf") {
    for (double p : {1e-12, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2, 0.1, 0.25, 0.5, 0.75, 0.9,
                     1.0 - 1e-4, 1.0 - 1e-8, 1.0 - 1e-12})
      CHECK(std::fabs(std_normal_cdf(std_normal_quantile(p)) - p) <= 1e-10);
  }

  SUBCASE("antisymmetry") {
    for (double p : {1e-9, 1e-4, 0.01, 0.2, 0.4})
      CHECK(std_normal_quantile(p) == doctest::Approx(-std_normal_quantile(1.0 - p)));
  }

  SUBCASE("domain errors") {
    CHECK_THROWS_AS(std_normal_quantile(0.0), DomainError);
    CHECK_THROWS_AS(std_normal_quantile(1.0), DomainError);
    CHECK_THROWS_AS(std_normal_quantile(-0.2), DomainError);
    CHECK_THROWS_AS(std_normal_quantile(1.2), DomainError);
  }
}

TEST_CASE("marginal validation") {
  CHECK_NOTHROW(Marginal(0.05, 0.008));
  CHECK_THROWS_AS(Marginal(1.0, 0.0), DomainError);
  CHECK_THROWS_AS(Marginal(1.0, -0.5), DomainError);
}

TEST_CASE("correlation matrix") {
  SUBCASE("identity factor") {
    const auto c = CorrelationMatrix::identity(3);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        CHECK(c.chol()(i, j) == (i == j ? 1.0 : 0.0));
    CHECK(c.is_identity());
  }

  SUBCASE("bivariate factor") {
    const auto c = CorrelationMatrix::bivariate(0.8);
    CHECK(c.chol()(0, 0) == doctest::Approx(1.0));
    CHECK(c.chol()(1, 0) == doctest::Approx(0.8));
    CHECK(c.chol()(1, 1) == doctest::Approx(0.6));
    CHECK(c.chol()(0, 1) == 0.0);
  }

  SUBCASE("factor reproduces entries") {
    // Random well-conditioned correlation matrices from a random square root.
    Xoshiro256StarStar rng(991);
    for (int rep = 0; rep < 20; ++rep) {
      const std::size_t d = 2 + rep % 4;
      Matrix a(d, d);
      for (auto& v : a.data()) v = rng.next_gaussian();
      Matrix cov = gram(a);
      for (std::size_t i = 0; i < d; ++i) cov(i, i) += 0.5;  // keep it away from singular
      Matrix corr(d, d);
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
          corr(i, j) = i == j ? 1.0 : cov(i, j) / std::sqrt(cov(i, i) * cov(j, j));
      const CorrelationMatrix c(corr);
      const Matrix back = matmul(c.chol(), transpose(c.chol()));
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
          CHECK(std::fabs(back(i, j) - corr(i, j)) <= 1e-12);
    }
  }

  SUBCASE("rank deficient is rejected with the failing pivot") {
    Matrix c = Matrix::identity(2);
    c(0, 1) = 1.0;
    c(1, 0) = 1.0;
    try {
      CorrelationMatrix corr(c);
      FAIL("expected NotPositiveDefinite");
    } catch (const NotPositiveDefinite& e) {
      CHECK(e.pivot() == 1);
    }
  }

  SUBCASE("shape and range validation") {
    Matrix bad_diag = Matrix::identity(2);
    bad_diag(1, 1) = 0.9;
    CHECK_THROWS_AS(CorrelationMatrix{bad_diag}, DomainError);

    Matrix asym = Matrix::identity(2);
    asym(0, 1) = 0.3;
    asym(1, 0) = 0.2;
    CHECK_THROWS_AS(CorrelationMatrix{asym}, DomainError);

    Matrix out_of_range = Matrix::identity(2);
    out_of_range(0, 1) = 1.5;
    out_of_range(1, 0) = 1.5;
    CHECK_THROWS_AS(CorrelationMatrix{out_of_range}, DomainError);
  }
}

TEST_CASE("joint gaussian and the physical map") {
  const JointGaussian coffee =
      make_joint({{0.05, 0.008}, {20.0, 1.5}}, Matrix::identity(2));

  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(make_joint({{0.0, 1.0}}, Matrix::identity(2)), DimensionMismatch);
  }

  SUBCASE("means at the origin") {
    const std::vector<double> z = {0.0, 0.0};
    const auto q = to_physical(coffee, z);
    CHECK(q[0] == doctest::Approx(0.05));
    CHECK(q[1] == doctest::Approx(20.0));
  }

  SUBCASE("one sigma shifts") {
    const auto q1 = to_physical(coffee, std::vector<double>{1.0, 0.0});
    CHECK(q1[0] == doctest::Approx(0.058));
    CHECK(q1[1] == doctest::Approx(20.0));
    const auto q2 = to_physical(coffee, std::vector<double>{-1.0, 2.0});
    CHECK(q2[0] == doctest::Approx(0.042));
    CHECK(q2[1] == doctest::Approx(23.0));
  }

  SUBCASE("affine map inverts") {
    Xoshiro256StarStar rng(7);
    for (int rep = 0; rep < 200; ++rep) {
      const std::vector<double> z = {rng.next_gaussian(), rng.next_gaussian()};
      const auto q = to_physical(coffee, z);
      for (std::size_t i = 0; i < 2; ++i) {
        const double back = (q[i] - coffee.marginals[i].mean) / coffee.marginals[i].std;
        CHECK(std::fabs(back - z[i]) <= 1e-14 * std::max(1.0, std::fabs(z[i])));
      }
    }
  }
}
