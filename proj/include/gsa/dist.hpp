#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "gsa/errors.hpp"
#include "gsa/linalg.hpp"

namespace gsa {

inline constexpr double kInvSqrt2 = 0.7071067811865475244008443621048490;
inline constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343819;

inline double std_normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

/// Standard-normal CDF via the complementary error function.
inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

/// Standard-normal quantile, Wichura's algorithm AS 241 (PPND16 variant).
/// Rational minimax approximations on three regions, accurate to ~1e-16
/// relative over the full open interval.
inline double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw DomainError("std_normal_quantile: p must lie strictly inside (0, 1)");

  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        q * (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                  6.7265770927008700853e+4) *
                     r +
                 4.5921953931549871457e+4) *
                    r +
                1.3731693765509461125e+4) *
                   r +
               1.9715909503065514427e+3) *
                  r +
              1.3314166789178437745e+2) *
                 r +
             3.3871328727963666080e+0);
    const double den =
        (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
              3.9307895800092710610e+4) *
                 r +
             2.1213794301586595867e+4) *
                r +
            5.3941960214247511077e+3) *
               r +
           6.8718700749205790830e+2) *
              r +
          4.2313330701600911252e+1) *
             r +
         1.0);
    return num / den;
  }

  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) *
                 r +
             1.27045825245236838258e+0) *
                r +
            3.64784832476320460504e+0) *
               r +
           5.76949722146069140550e+0) *
              r +
          4.63033784615654529590e+0) *
             r +
         1.42343711074968357734e+0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) *
                 r +
             1.48103976427480074590e-1) *
                r +
            6.89767334985100004550e-1) *
               r +
           1.67638483018380384940e+0) *
              r +
          2.05319162663775882187e+0) *
             r +
         1.0);
    val = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) *
                 r +
             2.65321895265761230930e-2) *
                r +
            2.96560571828504891230e-1) *
               r +
           1.78482653991729133580e+0) *
              r +
          5.46378491116411436990e+0) *
             r +
         6.65790464350110377720e+0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) *
                 r +
             7.86869131145613259100e-4) *
                r +
            1.48753612908506148525e-2) *
               r +
           1.36929880922735805310e-1) *
              r +
          5.99832206555887937690e-1) *
             r +
         1.0);
    val = num / den;
  }
  return (q < 0.0) ? -val : val;
}

/// Gaussian marginal in model units.
struct Marginal {
  double mean = 0.0;
  double std = 1.0;

  Marginal() = default;
  Marginal(double mean_, double std_) : mean(mean_), std(std_) {
    if (!(std > 0.0)) throw DomainError("Marginal: standard deviation must be positive");
  }
};

/// Symmetric positive-definite correlation matrix together with its lower
/// Cholesky factor. Construction validates symmetry, unit diagonal,
/// off-diagonal range and positive definiteness (no repair is attempted).
class CorrelationMatrix {
 public:
  explicit CorrelationMatrix(Matrix entries)
      : entries_(std::move(entries)), chol_(validate_and_factor(entries_)) {}

  static CorrelationMatrix identity(std::size_t dim) {
    return CorrelationMatrix(Matrix::identity(dim));
  }

  static CorrelationMatrix bivariate(double rho) {
    Matrix c = Matrix::identity(2);
    c(0, 1) = rho;
    c(1, 0) = rho;
    return CorrelationMatrix(std::move(c));
  }

  std::size_t dim() const noexcept { return entries_.rows(); }
  const Matrix& entries() const noexcept { return entries_; }
  const Matrix& chol() const noexcept { return chol_; }

  bool is_identity() const noexcept {
    for (std::size_t i = 0; i < dim(); ++i)
      for (std::size_t j = 0; j < dim(); ++j)
        if (i != j && entries_(i, j) != 0.0) return false;
    return true;
  }

 private:
  static Matrix validate_and_factor(const Matrix& c) {
    if (c.rows() != c.cols() || c.rows() == 0)
      throw DimensionMismatch("CorrelationMatrix: entries must be square, dim >= 1");
    for (std::size_t i = 0; i < c.rows(); ++i) {
      if (c(i, i) != 1.0)
        throw DomainError("CorrelationMatrix: diagonal entries must equal 1");
      for (std::size_t j = 0; j < i; ++j) {
        if (c(i, j) != c(j, i)) throw DomainError("CorrelationMatrix: not symmetric");
        if (!(c(i, j) >= -1.0 && c(i, j) <= 1.0))
          throw DomainError("CorrelationMatrix: off-diagonals must lie in [-1, 1]");
      }
    }
    return cholesky_lower(c);
  }

  Matrix entries_;
  Matrix chol_;
};

/// Joint Gaussian input model: physical marginals plus the correlation
/// structure of the underlying standard-normal variables. The covariance
/// matrix is derived, never stored.
struct JointGaussian {
  std::vector<Marginal> marginals;
  CorrelationMatrix correlation;

  std::size_t dim() const noexcept { return marginals.size(); }
};

inline JointGaussian make_joint(std::vector<Marginal> marginals, Matrix correlation_entries) {
  CorrelationMatrix corr(std::move(correlation_entries));
  if (corr.dim() != marginals.size())
    throw DimensionMismatch("make_joint: marginal count differs from correlation dim");
  return JointGaussian{std::move(marginals), std::move(corr)};
}

/// Affine map from standard-normal coordinates to model units,
/// q_i = mean_i + std_i * z_i.
inline std::vector<double> to_physical(const JointGaussian& joint, std::span<const double> z) {
  if (z.size() != joint.dim())
    throw DimensionMismatch("to_physical: sample length differs from joint dim");
  std::vector<double> q(z.size());
  for (std::size_t i = 0; i < z.size(); ++i)
    q[i] = joint.marginals[i].mean + joint.marginals[i].std * z[i];
  return q;
}

}  // namespace gsa
