#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gsa/errors.hpp"

namespace gsa {

/// Orthonormal probabilists' Hermite polynomials evaluated for all degrees
/// 0..max_degree at x. Uses the normalized three-term recurrence
///   h_{n+1} = (x·h_n - sqrt(n)·h_{n-1}) / sqrt(n+1),
/// which keeps every value O(1)-scaled and avoids explicit factorials.
/// With this normalization E[h_m(Z)·h_n(Z)] = δ_mn for Z ~ N(0,1).
inline std::vector<double> hermite_values(int max_degree, double x) {
  std::vector<double> h(static_cast<std::size_t>(max_degree) + 1);
  h[0] = 1.0;
  if (max_degree >= 1) h[1] = x;
  for (int n = 1; n < max_degree; ++n)
    h[n + 1] = (x * h[n] - std::sqrt(static_cast<double>(n)) * h[n - 1]) /
               std::sqrt(static_cast<double>(n + 1));
  return h;
}

inline double hermite_value(int degree, double x) {
  return hermite_values(degree, x)[static_cast<std::size_t>(degree)];
}

/// d/dx of the orthonormal polynomial: h_n' = sqrt(n)·h_{n-1}.
inline double hermite_derivative(int degree, double x) {
  if (degree == 0) return 0.0;
  return std::sqrt(static_cast<double>(degree)) * hermite_value(degree - 1, x);
}

/// Exact binomial coefficient C(n, k) in 64-bit; the (D+P choose P) counts
/// used here stay far below the overflow range.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    result = result * (n - k + i) / i;
  }
  return result;
}

struct MultiIndex {
  std::vector<int> degrees;

  int total_degree() const {
    int s = 0;
    for (int d : degrees) s += d;
    return s;
  }
  bool is_zero() const {
    for (int d : degrees)
      if (d != 0) return false;
    return true;
  }
};

/// Total-degree tensor basis: all multi-indices with |alpha| <= order in
/// graded-lexicographic order (degree classes ascending, first variable
/// most significant within a class). The zero index is always term 0.
class MultiIndexBasis {
 public:
  MultiIndexBasis(std::size_t dim, int order) : dim_(dim), order_(order) {
    if (dim < 1) throw DimensionMismatch("MultiIndexBasis: dim must be >= 1");
    if (order < 0) throw DomainError("MultiIndexBasis: order must be >= 0");
    std::vector<int> scratch(dim, 0);
    for (int deg = 0; deg <= order; ++deg) emit(scratch, 0, deg);
  }

  std::size_t dim() const noexcept { return dim_; }
  int order() const noexcept { return order_; }
  std::size_t size() const noexcept { return terms_.size(); }
  const std::vector<MultiIndex>& terms() const noexcept { return terms_; }

 private:
  void emit(std::vector<int>& scratch, std::size_t pos, int remaining) {
    if (pos + 1 == dim_) {
      scratch[pos] = remaining;
      terms_.push_back(MultiIndex{scratch});
      return;
    }
    for (int d = remaining; d >= 0; --d) {
      scratch[pos] = d;
      emit(scratch, pos + 1, remaining - d);
    }
  }

  std::size_t dim_;
  int order_;
  std::vector<MultiIndex> terms_;
};

inline MultiIndexBasis build_basis(std::size_t dim, int order) {
  return MultiIndexBasis(dim, order);
}

namespace detail {

/// Per-dimension table of h_0..h_P at each coordinate of z.
inline std::vector<std::vector<double>> hermite_tables(int order,
                                                       std::span<const double> z) {
  std::vector<std::vector<double>> tables(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) tables[i] = hermite_values(order, z[i]);
  return tables;
}

}  // namespace detail

/// Row of basis values at z: entry j = prod_i h_{alpha_j,i}(z_i).
inline std::vector<double> eval_basis_row(const MultiIndexBasis& basis,
                                          std::span<const double> z) {
  if (z.size() != basis.dim())
    throw DimensionMismatch("eval_basis_row: point length differs from basis dim");
  const auto tables = detail::hermite_tables(basis.order(), z);
  std::vector<double> row(basis.size());
  for (std::size_t j = 0; j < basis.size(); ++j) {
    const auto& alpha = basis.terms()[j].degrees;
    double v = 1.0;
    for (std::size_t i = 0; i < alpha.size(); ++i)
      v *= tables[i][static_cast<std::size_t>(alpha[i])];
    row[j] = v;
  }
  return row;
}

/// Row of partial derivatives with respect to coordinate i:
/// entry j = h'_{alpha_j,i}(z_i) · prod_{k != i} h_{alpha_j,k}(z_k).
inline std::vector<double> eval_basis_partial(const MultiIndexBasis& basis,
                                              std::span<const double> z, std::size_t i) {
  if (z.size() != basis.dim())
    throw DimensionMismatch("eval_basis_partial: point length differs from basis dim");
  if (i >= basis.dim())
    throw IndexOutOfRange("eval_basis_partial: parameter index out of range");
  const auto tables = detail::hermite_tables(basis.order(), z);
  std::vector<double> row(basis.size());
  for (std::size_t j = 0; j < basis.size(); ++j) {
    const auto& alpha = basis.terms()[j].degrees;
    const int ni = alpha[i];
    if (ni == 0) {
      row[j] = 0.0;
      continue;
    }
    double v = std::sqrt(static_cast<double>(ni)) *
               tables[i][static_cast<std::size_t>(ni - 1)];
    for (std::size_t k = 0; k < alpha.size(); ++k) {
      if (k == i) continue;
      v *= tables[k][static_cast<std::size_t>(alpha[k])];
    }
    row[j] = v;
  }
  return row;
}

}  // namespace gsa
