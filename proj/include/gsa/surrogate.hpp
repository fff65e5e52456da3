#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gsa/errors.hpp"
#include "gsa/linalg.hpp"
#include "gsa/orthopoly.hpp"
#include "gsa/sampling.hpp"

namespace gsa {

/// Polynomial chaos surrogate. One coefficient row per model output
/// component (time step), all sharing the same design matrix.
struct Surrogate {
  MultiIndexBasis basis;
  Matrix coeffs;  // T×N: output component by basis term
  double lambda = 0.0;
  std::size_t node_count = 0;
  std::vector<double> residual_rms;  // per output component

  std::size_t dim() const noexcept { return basis.dim(); }
  std::size_t output_count() const noexcept { return coeffs.rows(); }
};

/// Ridge-regularized least-squares fit of basis coefficients at the given
/// collocation nodes:
///   a = argmin ||Phi·a - Y||² + lambda·||a||²   per output column,
/// solved through the normal equations (PhiᵀPhi + lambda·I)·a = PhiᵀY with a
/// symmetric positive-definite factorization.
///
/// The nodes are always the independent standard-normal collocation points.
/// In a correlated analysis the outputs come from the model evaluated at
/// *transformed* samples while the design matrix is still built from the
/// untransformed nodes; the coordinate change lives entirely in the data.
inline Surrogate fit(const MultiIndexBasis& basis, const SampleMatrix& nodes,
                     const Matrix& outputs, double lambda) {
  if (nodes.space != SampleSpace::standard_normal)
    throw WrongSpace("fit: collocation nodes must be in standard-normal space");
  if (nodes.dim() != basis.dim())
    throw DimensionMismatch("fit: node dim differs from basis dim");
  if (outputs.rows() != nodes.rows())
    throw DimensionMismatch("fit: output row count differs from node count");
  if (lambda < 0.0) throw DomainError("fit: lambda must be non-negative");
  const std::size_t n = nodes.rows();
  const std::size_t nb = basis.size();
  if (n < nb && lambda == 0.0)
    throw Underdetermined("fit: fewer nodes than basis terms and no regularization");
  for (double y : outputs.data())
    if (!std::isfinite(y)) throw NonFiniteOutput("fit: model output is not finite");

  Matrix phi(n, nb);
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = eval_basis_row(basis, nodes.values.row(r));
    for (std::size_t j = 0; j < nb; ++j) phi(r, j) = row[j];
  }

  Matrix normal = gram(phi);
  for (std::size_t j = 0; j < nb; ++j) normal(j, j) += lambda;
  const Matrix rhs = matmul(transpose(phi), outputs);
  const Matrix lchol = cholesky_lower(normal);
  const Matrix solution = solve_cholesky_multi(lchol, rhs);  // N×T

  Surrogate s{basis, transpose(solution), lambda, n, {}};
  s.residual_rms.resize(outputs.cols());
  for (std::size_t t = 0; t < outputs.cols(); ++t) {
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      double fitv = 0.0;
      for (std::size_t j = 0; j < nb; ++j) fitv += phi(r, j) * solution(j, t);
      const double e = fitv - outputs(r, t);
      ss += e * e;
    }
    s.residual_rms[t] = std::sqrt(ss / static_cast<double>(n));
  }
  return s;
}

/// Surrogate values at z, one per output component.
inline std::vector<double> eval(const Surrogate& s, std::span<const double> z) {
  if (z.size() != s.dim())
    throw DimensionMismatch("eval: point length differs from surrogate dim");
  const auto row = eval_basis_row(s.basis, z);
  std::vector<double> out(s.output_count());
  for (std::size_t t = 0; t < out.size(); ++t) {
    double v = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) v += s.coeffs(t, j) * row[j];
    out[t] = v;
  }
  return out;
}

/// Analytic partial derivative with respect to coordinate i, evaluated in
/// standard-normal coordinates. Dividing by the marginal standard deviation
/// converts to physical units (chain rule through the affine input map).
inline std::vector<double> partial(const Surrogate& s, std::size_t i,
                                   std::span<const double> z) {
  if (z.size() != s.dim())
    throw DimensionMismatch("partial: point length differs from surrogate dim");
  const auto row = eval_basis_partial(s.basis, z, i);
  std::vector<double> out(s.output_count());
  for (std::size_t t = 0; t < out.size(); ++t) {
    double v = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) v += s.coeffs(t, j) * row[j];
    out[t] = v;
  }
  return out;
}

/// Cache format for a fitted surrogate.
inline nlohmann::json surrogate_to_json(const Surrogate& s) {
  nlohmann::json j;
  j["dim"] = s.basis.dim();
  j["order"] = s.basis.order();
  auto terms = nlohmann::json::array();
  for (const auto& term : s.basis.terms()) terms.push_back(term.degrees);
  j["term_list"] = std::move(terms);
  j["lambda"] = s.lambda;
  j["node_count"] = s.node_count;
  j["residual_rms"] = s.residual_rms;
  auto coeffs = nlohmann::json::array();
  for (std::size_t t = 0; t < s.coeffs.rows(); ++t) {
    auto row = nlohmann::json::array();
    for (std::size_t k = 0; k < s.coeffs.cols(); ++k) row.push_back(s.coeffs(t, k));
    coeffs.push_back(std::move(row));
  }
  j["coeffs"] = std::move(coeffs);
  return j;
}

inline Surrogate surrogate_from_json(const nlohmann::json& j) {
  const auto dim = j.at("dim").get<std::size_t>();
  const auto order = j.at("order").get<int>();
  MultiIndexBasis basis(dim, order);
  const auto& terms = j.at("term_list");
  if (terms.size() != basis.size())
    throw MalformedOutput("surrogate_from_json: term list does not match a graded basis");
  for (std::size_t k = 0; k < basis.size(); ++k)
    if (terms[k].get<std::vector<int>>() != basis.terms()[k].degrees)
      throw MalformedOutput("surrogate_from_json: term ordering mismatch");
  const auto& coeffs = j.at("coeffs");
  Matrix c(coeffs.size(), basis.size());
  for (std::size_t t = 0; t < coeffs.size(); ++t) {
    const auto row = coeffs[t].get<std::vector<double>>();
    if (row.size() != basis.size())
      throw MalformedOutput("surrogate_from_json: coefficient row length mismatch");
    for (std::size_t k = 0; k < row.size(); ++k) c(t, k) = row[k];
  }
  Surrogate s{std::move(basis), std::move(c), j.at("lambda").get<double>(),
              j.value("node_count", std::size_t{0}), {}};
  if (j.contains("residual_rms"))
    s.residual_rms = j.at("residual_rms").get<std::vector<double>>();
  return s;
}

}  // namespace gsa
