#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "gsa/dist.hpp"
#include "gsa/errors.hpp"
#include "gsa/linalg.hpp"
#include "gsa/rng.hpp"

namespace gsa {

enum class SampleSpace { unit_cube, standard_normal, physical };

/// n×d block of samples tagged with the space its coordinates live in.
struct SampleMatrix {
  Matrix values;
  SampleSpace space = SampleSpace::unit_cube;

  std::size_t rows() const noexcept { return values.rows(); }
  std::size_t dim() const noexcept { return values.cols(); }
};

namespace detail {

inline constexpr std::array<int, 19> kRadicalInverseBases = {
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67};

/// Van der Corput radical inverse of i (1-based) in the given base.
inline double radical_inverse(std::uint64_t i, int base) {
  double inv_base = 1.0 / base;
  double weight = inv_base;
  double result = 0.0;
  while (i > 0) {
    result += static_cast<double>(i % base) * weight;
    i /= base;
    weight *= inv_base;
  }
  return result;
}

inline double clamp_unit(double u) {
  constexpr double lo = 1e-12;
  constexpr double hi = 1.0 - 1e-12;
  return u < lo ? lo : (u > hi ? hi : u);
}

}  // namespace detail

/// Hammersley point set on the open unit cube. Row i (1-based) is
/// ((i - 0.5)/n, phi_2(i), phi_3(i), ...), one radical-inverse axis per
/// extra dimension over the first d-1 primes. The half-step first axis
/// keeps every coordinate away from the 0/1 endpoints.
inline SampleMatrix hammersley(std::size_t n, std::size_t d) {
  if (n < 1 || d < 1) throw DimensionMismatch("hammersley: need n >= 1, d >= 1");
  if (d > detail::kRadicalInverseBases.size() + 1)
    throw DimensionTooLarge("hammersley: dimension exceeds prime table (d <= 20)");
  Matrix m(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    const std::uint64_t i = r + 1;
    m(r, 0) = detail::clamp_unit((static_cast<double>(i) - 0.5) / static_cast<double>(n));
    for (std::size_t c = 1; c < d; ++c)
      m(r, c) = detail::clamp_unit(
          detail::radical_inverse(i, detail::kRadicalInverseBases[c - 1]));
  }
  return SampleMatrix{std::move(m), SampleSpace::unit_cube};
}

/// Elementwise inverse-CDF map from the unit cube to standard-normal space.
inline SampleMatrix to_standard_normal(const SampleMatrix& m) {
  if (m.space != SampleSpace::unit_cube)
    throw WrongSpace("to_standard_normal: input must be in the unit cube");
  Matrix out(m.rows(), m.dim());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.dim(); ++j)
      out(i, j) = std_normal_quantile(m.values(i, j));
  return SampleMatrix{std::move(out), SampleSpace::standard_normal};
}

/// Paired sample matrices for the Saltelli estimator: independent blocks
/// A and B plus the d hybrids AB_i (A with column i taken from B).
/// First- and total-order indices then cost n·(d+2) model evaluations.
struct SaltelliMatrices {
  SampleMatrix a;
  SampleMatrix b;
  std::vector<SampleMatrix> ab;
};

namespace detail {

inline SaltelliMatrices assemble_saltelli(Matrix a, Matrix b) {
  SaltelliMatrices out;
  const std::size_t d = a.cols();
  out.ab.reserve(d);
  for (std::size_t k = 0; k < d; ++k) {
    Matrix hybrid = a;
    for (std::size_t i = 0; i < a.rows(); ++i) hybrid(i, k) = b(i, k);
    out.ab.push_back(SampleMatrix{std::move(hybrid), SampleSpace::standard_normal});
  }
  out.a = SampleMatrix{std::move(a), SampleSpace::standard_normal};
  out.b = SampleMatrix{std::move(b), SampleSpace::standard_normal};
  return out;
}

}  // namespace detail

inline SaltelliMatrices saltelli_matrices(std::size_t n, std::size_t d,
                                          std::uint64_t seed) {
  if (n < 2 || d < 1) throw DimensionMismatch("saltelli_matrices: need n >= 2, d >= 1");
  Xoshiro256StarStar rng(seed);
  Matrix a(n, d);
  Matrix b(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) a(i, j) = rng.next_gaussian();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) b(i, j) = rng.next_gaussian();
  return detail::assemble_saltelli(std::move(a), std::move(b));
}

/// Low-discrepancy variant of the Saltelli construction: one Hammersley set
/// over the joint 2d-dimensional unit cube (first d columns feed A, last d
/// feed B), randomized by a seeded Cranley-Patterson shift, then mapped to
/// standard-normal space. Estimator variance drops by an order of magnitude
/// against independent pseudo-random blocks for smooth integrands.
inline SaltelliMatrices saltelli_matrices_rqmc(std::size_t n, std::size_t d,
                                               std::uint64_t seed) {
  if (n < 2 || d < 1)
    throw DimensionMismatch("saltelli_matrices_rqmc: need n >= 2, d >= 1");
  const SampleMatrix points = hammersley(n, 2 * d);  // throws for 2d > 20
  Xoshiro256StarStar rng(seed);
  std::vector<double> shift(2 * d);
  for (auto& s : shift) s = rng.next_unit();
  Matrix a(n, d);
  Matrix b(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < 2 * d; ++j) {
      double u = points.values(i, j) + shift[j];
      u -= std::floor(u);
      const double z = std_normal_quantile(detail::clamp_unit(u));
      if (j < d)
        a(i, j) = z;
      else
        b(i, j - d) = z;
    }
  }
  return detail::assemble_saltelli(std::move(a), std::move(b));
}

}  // namespace gsa
