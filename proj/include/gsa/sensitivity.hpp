#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gsa/dist.hpp"
#include "gsa/errors.hpp"
#include "gsa/linalg.hpp"
#include "gsa/models.hpp"
#include "gsa/orthopoly.hpp"
#include "gsa/sampling.hpp"
#include "gsa/surrogate.hpp"
#include "gsa/transform.hpp"

namespace gsa {

enum class IndexKind { sobol_first, sobol_total, derivative };
enum class Provenance { uncorrelated, full, marginal, independent };
enum class TransformKind { rosenblatt, cholesky };
enum class DerivativeSpace { physical, standard };

inline const char* index_kind_name(IndexKind k) {
  switch (k) {
    case IndexKind::sobol_first: return "sobol_first";
    case IndexKind::sobol_total: return "sobol_total";
    case IndexKind::derivative: return "derivative";
  }
  return "unknown";
}

inline const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::uncorrelated: return "uncorrelated";
    case Provenance::full: return "full";
    case Provenance::marginal: return "marginal";
    case Provenance::independent: return "independent";
  }
  return "unknown";
}

/// One sensitivity value. `parameter` is always the original parameter id,
/// never the position inside a permuted sweep; `permutation_id` is 0 when no
/// permutation was involved.
struct IndexRecord {
  std::size_t time_index = 0;
  std::size_t parameter = 0;
  IndexKind kind = IndexKind::sobol_first;
  Provenance provenance = Provenance::uncorrelated;
  int permutation_id = 0;
  double value = 0.0;
};

struct ReportMeta {
  std::string model;
  int order = 0;
  std::size_t node_count = 0;
  double lambda = 0.0;
  Matrix correlation;
  std::uint64_t seed = 0;
  DerivativeSpace derivative_space = DerivativeSpace::physical;
  std::vector<std::string> parameter_names;
  std::vector<double> time_grid;
};

struct SensitivityReport {
  std::vector<IndexRecord> records;
  ReportMeta meta;
};

/// Output variance below this floor counts as zero; no Sobol records are
/// emitted there (the indices are undefined, not 0).
inline constexpr double kZeroVarianceFloor = 1e-12;

/// Whether an output step has enough empirical variance for Sobol indices to
/// be defined. The floor scales with the output mean so a constant column
/// stays undefined no matter what coefficient dust a regularized fit leaves.
inline bool variance_defined(double variance, double mean) {
  return variance > kZeroVarianceFloor * (1.0 + mean * mean);
}

inline double pce_mean(const Surrogate& s, std::size_t t) { return s.coeffs(t, 0); }

/// Total variance from the orthonormal expansion: sum of squared
/// coefficients over all non-constant terms.
inline double pce_variance(const Surrogate& s, std::size_t t) {
  double v = 0.0;
  for (std::size_t j = 1; j < s.basis.size(); ++j) v += s.coeffs(t, j) * s.coeffs(t, j);
  return v;
}

/// First-order Sobol index: variance carried by terms involving coordinate i
/// alone, as a fraction of total variance.
inline double sobol_first(const Surrogate& s, std::size_t i, std::size_t t) {
  const double v = pce_variance(s, t);
  if (v <= kZeroVarianceFloor)
    throw ZeroVariance("sobol_first: output variance is zero at this step");
  double vi = 0.0;
  for (std::size_t j = 1; j < s.basis.size(); ++j) {
    const auto& alpha = s.basis.terms()[j].degrees;
    if (alpha[i] == 0) continue;
    bool pure = true;
    for (std::size_t k = 0; k < alpha.size(); ++k)
      if (k != i && alpha[k] != 0) { pure = false; break; }
    if (pure) vi += s.coeffs(t, j) * s.coeffs(t, j);
  }
  return vi / v;
}

/// Total-order Sobol index: variance carried by every term involving
/// coordinate i, interactions included.
inline double sobol_total(const Surrogate& s, std::size_t i, std::size_t t) {
  const double v = pce_variance(s, t);
  if (v <= kZeroVarianceFloor)
    throw ZeroVariance("sobol_total: output variance is zero at this step");
  double vi = 0.0;
  for (std::size_t j = 1; j < s.basis.size(); ++j) {
    if (s.basis.terms()[j].degrees[i] == 0) continue;
    vi += s.coeffs(t, j) * s.coeffs(t, j);
  }
  return vi / v;
}

/// Derivative-based index over all output components: the analytic partial
/// of the surrogate at the point of interest (defaults to the parameter
/// means, z0 = 0). Values are in standard-normal coordinates; callers scale
/// by 1/sigma for physical units.
inline std::vector<double> derivative_index(const Surrogate& s, std::size_t i,
                                            std::span<const double> z0) {
  return partial(s, i, z0);
}

inline std::vector<double> derivative_index(const Surrogate& s, std::size_t i) {
  const std::vector<double> z0(s.dim(), 0.0);
  return partial(s, i, z0);
}

struct SweepConfig {
  int order = 3;
  double node_multiplier = 2.0;  // collocation nodes = multiplier × basis size
  double lambda = 1e-8;
  TransformKind transform = TransformKind::rosenblatt;
  DerivativeSpace derivative_space = DerivativeSpace::physical;
  std::vector<double> derivative_point;  // z0; empty = parameter means
};

/// A fitted sweep: the report plus the surrogates behind it (one per
/// permutation, or a single one for independent inputs), for callers that
/// need moments or response surfaces from the same fit.
struct SweepResult {
  SensitivityReport report;
  std::vector<Surrogate> surrogates;
  std::vector<int> surrogate_permutation_ids;
};

namespace detail {

/// Reorder the columns of a permuted physical sample block back to original
/// parameter order for model evaluation.
inline Matrix unpermute_columns(const Matrix& permuted, const Permutation& perm) {
  Matrix out(permuted.rows(), permuted.cols());
  for (std::size_t j = 0; j < perm.order.size(); ++j)
    for (std::size_t r = 0; r < permuted.rows(); ++r)
      out(r, perm.order[j]) = permuted(r, j);
  return out;
}

inline Matrix physical_rows(const JointGaussian& joint, const SampleMatrix& z) {
  Matrix out(z.rows(), z.dim());
  for (std::size_t r = 0; r < z.rows(); ++r) {
    const auto q = to_physical(joint, z.values.row(r));
    for (std::size_t j = 0; j < q.size(); ++j) out(r, j) = q[j];
  }
  return out;
}

inline Provenance position_provenance(std::size_t position, std::size_t dim) {
  if (position == 0) return Provenance::full;
  if (position + 1 == dim) return Provenance::independent;
  return Provenance::marginal;
}

/// Empirical per-output variance mask: which steps carry real variation
/// across the evaluated samples. Zero variance is a property of the model
/// outputs, so the test runs on the data rather than on fitted coefficients.
inline std::vector<bool> defined_mask(const Matrix& outputs) {
  std::vector<bool> mask(outputs.cols());
  const double n = static_cast<double>(outputs.rows());
  for (std::size_t t = 0; t < outputs.cols(); ++t) {
    double mean = 0.0;
    for (std::size_t r = 0; r < outputs.rows(); ++r) mean += outputs(r, t);
    mean /= n;
    double ss = 0.0;
    for (std::size_t r = 0; r < outputs.rows(); ++r) {
      const double dev = outputs(r, t) - mean;
      ss += dev * dev;
    }
    mask[t] = variance_defined(ss / n, mean);
  }
  return mask;
}

/// Emit Sobol and derivative records for every position of one fitted
/// surrogate, re-keyed to original parameter ids. Sobol records are skipped
/// where the `defined` mask says the output had no variance.
inline void append_records(std::vector<IndexRecord>& records, const Surrogate& s,
                           const Permutation& perm, int permutation_id,
                           bool uncorrelated, const JointGaussian& permuted_joint,
                           const SweepConfig& config, const std::vector<bool>& defined) {
  const std::size_t d = s.dim();
  const std::vector<double> z0 =
      config.derivative_point.empty() ? std::vector<double>(d, 0.0)
                                      : config.derivative_point;
  for (std::size_t pos = 0; pos < d; ++pos) {
    const std::size_t original = perm.order[pos];
    const Provenance prov =
        uncorrelated ? Provenance::uncorrelated : position_provenance(pos, d);
    const double sigma = permuted_joint.marginals[pos].std;
    const double derivative_scale =
        (config.derivative_space == DerivativeSpace::physical) ? 1.0 / sigma : 1.0;
    const auto deriv = partial(s, pos, z0);
    for (std::size_t t = 0; t < s.output_count(); ++t) {
      if (defined[t] && pce_variance(s, t) > kZeroVarianceFloor) {
        records.push_back({t, original, IndexKind::sobol_first, prov, permutation_id,
                           sobol_first(s, pos, t)});
        records.push_back({t, original, IndexKind::sobol_total, prov, permutation_id,
                           sobol_total(s, pos, t)});
      }
      records.push_back({t, original, IndexKind::derivative, prov, permutation_id,
                         deriv[t] * derivative_scale});
    }
  }
}

}  // namespace detail

/// Surrogate-based sensitivity sweep.
///
/// Independent inputs run the plain pipeline once: Hammersley nodes in
/// standard-normal space, model evaluation in physical units, regression,
/// index extraction.
///
/// Correlated inputs run once per circular permutation. The collocation
/// nodes stay untransformed; only the samples fed to the model pass through
/// the decorrelation-inverse map (Rosenblatt conditionals or the Cholesky
/// factor) of the permuted correlation, then to physical units, then back to
/// original parameter order. The regression therefore maps the independent
/// polynomial space onto correlated model outputs. For each permutation the
/// first position yields that parameter's Full index, the last position the
/// Independent index, interior positions Marginal ones; records are keyed by
/// original parameter id so the D sweeps merge into one report.
inline SweepResult run_sweep(const ModelSpec& model, const JointGaussian& joint,
                             const SweepConfig& config) {
  if (config.order < 0) throw DomainError("run_sweep: polynomial order must be >= 0");
  if (config.node_multiplier < 1.0)
    throw DomainError("run_sweep: node multiplier must be >= 1");
  const std::size_t d = joint.dim();
  const MultiIndexBasis basis(d, config.order);
  const std::size_t node_count = static_cast<std::size_t>(
      std::ceil(config.node_multiplier * static_cast<double>(basis.size())));
  const SampleMatrix nodes = to_standard_normal(hammersley(node_count, d));

  SweepResult result;
  result.report.meta.model = model_kind_name(model.kind);
  result.report.meta.order = config.order;
  result.report.meta.node_count = node_count;
  result.report.meta.lambda = config.lambda;
  result.report.meta.correlation = joint.correlation.entries();
  result.report.meta.derivative_space = config.derivative_space;
  result.report.meta.parameter_names = model.param_names;
  result.report.meta.time_grid = model.time_grid;

  if (joint.correlation.is_identity()) {
    const Matrix physical = detail::physical_rows(joint, nodes);
    const Matrix outputs = evaluate_model(model, physical);
    Surrogate s = fit(basis, nodes, outputs, config.lambda);
    const Permutation ident = Permutation::identity(d);
    detail::append_records(result.report.records, s, ident, 0, true, joint, config,
                           detail::defined_mask(outputs));
    result.surrogates.push_back(std::move(s));
    result.surrogate_permutation_ids.push_back(0);
    return result;
  }

  for (const Permutation& perm : circular_family(d)) {
    const JointGaussian permuted = apply_permutation(joint, perm);
    const SampleMatrix correlated =
        (config.transform == TransformKind::rosenblatt)
            ? rosenblatt_forward(nodes, joint, perm)
            : cholesky_transform(nodes, permuted.correlation);
    const Matrix physical_permuted = detail::physical_rows(permuted, correlated);
    const Matrix physical = detail::unpermute_columns(physical_permuted, perm);
    const Matrix outputs = evaluate_model(model, physical);
    Surrogate s = fit(basis, nodes, outputs, config.lambda);
    detail::append_records(result.report.records, s, perm, perm.id, false, permuted,
                           config, detail::defined_mask(outputs));
    result.surrogates.push_back(std::move(s));
    result.surrogate_permutation_ids.push_back(perm.id);
  }
  return result;
}

/// Spec'd entry point; see run_sweep for the machinery.
inline SensitivityReport correlated_sweep(const ModelSpec& model,
                                          const JointGaussian& joint, int order,
                                          SweepConfig config = {}) {
  config.order = order;
  return run_sweep(model, joint, config).report;
}

/// Monte-Carlo reference estimator for the variance-based indices, using the
/// Saltelli pairing:
///   first order  V_i = (1/n) Σ_j Y_B(j)·(Y_{AB_i}(j) − Y_A(j))
///   total order  V_i^T = (1/2n) Σ_j (Y_A(j) − Y_{AB_i}(j))²
/// both normalized by the empirical variance of the pooled A/B outputs.
///
/// Correlated inputs are handled exactly as in run_sweep: every matrix goes
/// through the same permuted Rosenblatt map before model evaluation, so this
/// estimates the same quantity as the surrogate route and the permutation
/// labeling (Full / Marginal / Independent) carries over unchanged.
inline SensitivityReport qmc_sobol(const ModelSpec& model, const JointGaussian& joint,
                                   std::size_t n, std::uint64_t seed) {
  if (n < 64) throw DomainError("qmc_sobol: need at least 64 base samples");
  const std::size_t d = joint.dim();
  // Shifted-Hammersley blocks where the prime table allows, pseudo-random
  // beyond; the estimator noise at the sample counts used for validation is
  // an order of magnitude lower with the low-discrepancy construction.
  const SaltelliMatrices sm = (2 * d <= 20) ? saltelli_matrices_rqmc(n, d, seed)
                                            : saltelli_matrices(n, d, seed);

  SensitivityReport report;
  report.meta.model = model_kind_name(model.kind);
  report.meta.order = 0;  // sampling-based, no polynomial order
  report.meta.node_count = n * (d + 2);
  report.meta.lambda = 0.0;
  report.meta.correlation = joint.correlation.entries();
  report.meta.seed = seed;
  report.meta.parameter_names = model.param_names;
  report.meta.time_grid = model.time_grid;

  const bool uncorrelated = joint.correlation.is_identity();
  const auto permutations =
      uncorrelated ? std::vector<Permutation>{Permutation::identity(d)}
                   : circular_family(d);

  for (const Permutation& perm : permutations) {
    const JointGaussian permuted = apply_permutation(joint, perm);
    const auto evaluate_block = [&](const SampleMatrix& block) {
      const SampleMatrix correlated =
          uncorrelated ? block : rosenblatt_forward(block, joint, perm);
      const Matrix physical_permuted = detail::physical_rows(permuted, correlated);
      return evaluate_model(model, detail::unpermute_columns(physical_permuted, perm));
    };
    const Matrix ya = evaluate_block(sm.a);
    const Matrix yb = evaluate_block(sm.b);

    const std::size_t t_count = ya.cols();
    std::vector<double> pooled_mean(t_count, 0.0);
    std::vector<double> pooled_var(t_count, 0.0);
    for (std::size_t t = 0; t < t_count; ++t) {
      double mean = 0.0;
      for (std::size_t j = 0; j < n; ++j) mean += ya(j, t) + yb(j, t);
      mean /= static_cast<double>(2 * n);
      double ss = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double da = ya(j, t) - mean;
        const double db = yb(j, t) - mean;
        ss += da * da + db * db;
      }
      pooled_mean[t] = mean;
      pooled_var[t] = ss / static_cast<double>(2 * n);
    }

    for (std::size_t pos = 0; pos < d; ++pos) {
      const Matrix yab = evaluate_block(sm.ab[pos]);
      const std::size_t original = perm.order[pos];
      const Provenance prov = uncorrelated
                                  ? Provenance::uncorrelated
                                  : detail::position_provenance(pos, d);
      const int perm_id = uncorrelated ? 0 : perm.id;
      for (std::size_t t = 0; t < t_count; ++t) {
        if (!variance_defined(pooled_var[t], pooled_mean[t])) continue;
        double v_first = 0.0, v_total = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          // Centering Y_B leaves the expectation unchanged (the bracket has
          // zero mean) but removes the mean²-scale noise that would swamp
          // small variances otherwise.
          v_first += (yb(j, t) - pooled_mean[t]) * (yab(j, t) - ya(j, t));
          const double diff = ya(j, t) - yab(j, t);
          v_total += diff * diff;
        }
        v_first /= static_cast<double>(n);
        v_total /= static_cast<double>(2 * n);
        report.records.push_back({t, original, IndexKind::sobol_first, prov, perm_id,
                                  v_first / pooled_var[t]});
        report.records.push_back({t, original, IndexKind::sobol_total, prov, perm_id,
                                  v_total / pooled_var[t]});
      }
    }
  }
  return report;
}

}  // namespace gsa
