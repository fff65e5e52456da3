#pragma once

#include <cstddef>
#include <numeric>
#include <vector>

#include "gsa/dist.hpp"
#include "gsa/errors.hpp"
#include "gsa/linalg.hpp"
#include "gsa/sampling.hpp"

namespace gsa {

/// Ordering of the input parameters for one decorrelation sweep.
/// `order[j]` is the original (0-based) parameter placed at position j.
struct Permutation {
  std::vector<std::size_t> order;
  int id = 1;

  std::size_t dim() const noexcept { return order.size(); }

  static Permutation identity(std::size_t d) {
    Permutation p;
    p.order.resize(d);
    std::iota(p.order.begin(), p.order.end(), std::size_t{0});
    p.id = 1;
    return p;
  }
};

inline void validate_permutation(const Permutation& perm, std::size_t dim) {
  if (perm.order.size() != dim)
    throw InvalidPermutation("permutation length differs from dimension");
  std::vector<bool> seen(dim, false);
  for (std::size_t v : perm.order) {
    if (v >= dim || seen[v]) throw InvalidPermutation("order is not a permutation");
    seen[v] = true;
  }
}

/// The D circular shifts of the identity ordering: family member k places
/// parameter k-1 first and parameter k-2 last (1-based ids).
inline std::vector<Permutation> circular_family(std::size_t d) {
  if (d < 1) throw DimensionMismatch("circular_family: dimension must be >= 1");
  std::vector<Permutation> family;
  family.reserve(d);
  for (std::size_t k = 0; k < d; ++k) {
    Permutation p;
    p.order.resize(d);
    for (std::size_t j = 0; j < d; ++j) p.order[j] = (k + j) % d;
    p.id = static_cast<int>(k) + 1;
    family.push_back(std::move(p));
  }
  return family;
}

/// Reorder marginals and correlation rows/columns consistently.
inline JointGaussian apply_permutation(const JointGaussian& joint, const Permutation& perm) {
  validate_permutation(perm, joint.dim());
  const std::size_t d = joint.dim();
  std::vector<Marginal> marginals(d);
  Matrix corr(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    marginals[i] = joint.marginals[perm.order[i]];
    for (std::size_t j = 0; j < d; ++j)
      corr(i, j) = joint.correlation.entries()(perm.order[i], perm.order[j]);
  }
  return make_joint(std::move(marginals), std::move(corr));
}

/// Impose the target correlation on independent standard normals by the
/// linear map q* = L·q with L the lower Cholesky factor of C; then
/// E[q*q*ᵀ] = L·I·Lᵀ = C. Rows of the sample matrix are treated as column
/// vectors of the map.
inline SampleMatrix cholesky_transform(const SampleMatrix& m, const CorrelationMatrix& corr) {
  if (m.dim() != corr.dim())
    throw DimensionMismatch("cholesky_transform: sample dim differs from correlation dim");
  const Matrix& l = corr.chol();
  Matrix out(m.rows(), m.dim());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.values.row(r);
    for (std::size_t i = 0; i < m.dim(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j <= i; ++j) s += l(i, j) * row[j];
      out(r, i) = s;
    }
  }
  return SampleMatrix{std::move(out), m.space};
}

namespace detail {

/// Coefficients of the sequential Gaussian conditional construction for a
/// correlation matrix C: component i maps as
///   q*_i = sum_{j<i} beta_ij · q*_j + sd_i · z_i,
/// where beta solves C[<i,<i]·beta = C[<i,i] and sd_i² is the Schur
/// complement 1 - C[i,<i]·beta. Each prefix system gets its own factorization
/// so the route stays independent of chol(C) applied as a whole.
struct ConditionalCoefficients {
  std::vector<std::vector<double>> beta;  // beta[i] has length i
  std::vector<double> sd;                 // conditional standard deviations
};

inline ConditionalCoefficients conditional_coefficients(const Matrix& c) {
  const std::size_t d = c.rows();
  ConditionalCoefficients out;
  out.beta.resize(d);
  out.sd.resize(d);
  out.sd[0] = 1.0;
  for (std::size_t i = 1; i < d; ++i) {
    Matrix prefix(i, i);
    std::vector<double> rhs(i);
    for (std::size_t a = 0; a < i; ++a) {
      rhs[a] = c(a, i);
      for (std::size_t b = 0; b < i; ++b) prefix(a, b) = c(a, b);
    }
    const Matrix lp = cholesky_lower(prefix);
    out.beta[i] = solve_cholesky(lp, rhs);
    double var = 1.0;
    for (std::size_t a = 0; a < i; ++a) var -= rhs[a] * out.beta[i][a];
    if (!(var > 0.0))
      throw NotPositiveDefinite("conditional variance not positive", i);
    out.sd[i] = std::sqrt(var);
  }
  return out;
}

}  // namespace detail

/// Forward Rosenblatt transform for the jointly Gaussian case: the samples
/// are pushed through the sequential conditional distributions of the
/// permuted correlation matrix. Position 0 passes through unchanged; each
/// later position is drawn from its exact Gaussian conditional given the
/// earlier ones. For Gaussian inputs this coincides with cholesky_transform
/// on the permuted correlation.
inline SampleMatrix rosenblatt_forward(const SampleMatrix& m, const JointGaussian& joint,
                                       const Permutation& perm) {
  if (m.dim() != joint.dim())
    throw DimensionMismatch("rosenblatt_forward: sample dim differs from joint dim");
  validate_permutation(perm, joint.dim());
  const std::size_t d = joint.dim();
  Matrix permuted_corr(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      permuted_corr(i, j) = joint.correlation.entries()(perm.order[i], perm.order[j]);
  const auto cond = detail::conditional_coefficients(permuted_corr);

  Matrix out(m.rows(), d);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.values.row(r);
    out(r, 0) = row[0];
    for (std::size_t i = 1; i < d; ++i) {
      double mean = 0.0;
      for (std::size_t j = 0; j < i; ++j) mean += cond.beta[i][j] * out(r, j);
      out(r, i) = mean + cond.sd[i] * row[i];
    }
  }
  return SampleMatrix{std::move(out), m.space};
}

}  // namespace gsa
