#pragma once

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gsa/dist.hpp"
#include "gsa/errors.hpp"
#include "gsa/models.hpp"
#include "gsa/sensitivity.hpp"

namespace gsa {

struct QmcSettings {
  std::size_t n = 16384;
  std::uint64_t seed = 42;
};

struct OutputSettings {
  std::string dir = ".";
  bool write_csv = true;
  bool write_json = true;
};

/// One campaign: the model, its uncertain inputs, and every analysis knob.
/// Loaded from a single JSON document; validation failures name the field.
struct CampaignConfig {
  ModelSpec model;
  std::vector<Marginal> marginals;
  std::vector<std::string> parameter_names;
  Matrix correlation;  // D×D entries
  int polynomial_order = 3;
  double node_multiplier = 2.0;
  double lambda = 1e-8;
  TransformKind transform = TransformKind::rosenblatt;
  DerivativeSpace derivative_space = DerivativeSpace::physical;
  QmcSettings qmc;
  OutputSettings output;

  std::size_t dim() const noexcept { return marginals.size(); }

  JointGaussian joint() const { return make_joint(marginals, correlation); }

  /// Joint with every off-diagonal replaced by rho (equicorrelation).
  JointGaussian joint_with_rho(double rho) const {
    Matrix c = Matrix::identity(dim());
    for (std::size_t i = 0; i < dim(); ++i)
      for (std::size_t j = 0; j < dim(); ++j)
        if (i != j) c(i, j) = rho;
    return make_joint(marginals, std::move(c));
  }

  SweepConfig sweep(int order_override = -1) const {
    SweepConfig s;
    s.order = order_override >= 0 ? order_override : polynomial_order;
    s.node_multiplier = node_multiplier;
    s.lambda = lambda;
    s.transform = transform;
    s.derivative_space = derivative_space;
    return s;
  }
};

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& j, const std::string& key,
                                           const std::string& path) {
  if (!j.contains(key)) throw ValidationError(path, "required field is missing");
  return j.at(key);
}

inline double require_number(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number()) throw ValidationError(path, "expected a number");
  return j.get<double>();
}

inline std::string require_string(const nlohmann::json& j, const std::string& path) {
  if (!j.is_string()) throw ValidationError(path, "expected a string");
  return j.get<std::string>();
}

/// Locale-independent formatting with 12 significant digits.
inline std::string format_value(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

}  // namespace detail

inline CampaignConfig load_campaign_config(const nlohmann::json& j) {
  CampaignConfig cfg;

  const auto& marginals = detail::require_field(j, "marginals", "marginals");
  if (!marginals.is_array() || marginals.empty())
    throw ValidationError("marginals", "expected a non-empty array");
  for (std::size_t i = 0; i < marginals.size(); ++i) {
    const std::string path = "marginals[" + std::to_string(i) + "]";
    const auto& m = marginals[i];
    if (!m.is_object()) throw ValidationError(path, "expected an object");
    cfg.parameter_names.push_back(
        detail::require_string(detail::require_field(m, "name", path + ".name"), path + ".name"));
    const double mean =
        detail::require_number(detail::require_field(m, "mean", path + ".mean"), path + ".mean");
    const double std_dev =
        detail::require_number(detail::require_field(m, "std", path + ".std"), path + ".std");
    if (!(std_dev > 0.0)) throw ValidationError(path + ".std", "must be positive");
    cfg.marginals.emplace_back(mean, std_dev);
  }
  const std::size_t d = cfg.marginals.size();

  cfg.correlation = Matrix::identity(d);
  if (j.contains("correlation")) {
    const auto& corr = j.at("correlation");
    if (corr.is_number()) {
      if (d != 2)
        throw ValidationError("correlation", "scalar rho shorthand requires exactly 2 marginals");
      const double rho = corr.get<double>();
      cfg.correlation(0, 1) = rho;
      cfg.correlation(1, 0) = rho;
    } else if (corr.is_array()) {
      if (corr.size() != d)
        throw ValidationError("correlation", "matrix row count differs from marginal count");
      for (std::size_t r = 0; r < d; ++r) {
        if (!corr[r].is_array() || corr[r].size() != d)
          throw ValidationError("correlation[" + std::to_string(r) + "]",
                                "expected a row of length " + std::to_string(d));
        for (std::size_t c = 0; c < d; ++c)
          cfg.correlation(r, c) = detail::require_number(
              corr[r][c], "correlation[" + std::to_string(r) + "][" + std::to_string(c) + "]");
      }
    } else {
      throw ValidationError("correlation", "expected a number or a matrix");
    }
  }
  try {
    CorrelationMatrix check(cfg.correlation);  // symmetry, range, positive definiteness
  } catch (const Error& e) {
    throw ValidationError("correlation", e.what());
  }

  const auto& model = detail::require_field(j, "model", "model");
  const std::string kind =
      detail::require_string(detail::require_field(model, "kind", "model.kind"), "model.kind");
  if (kind == "coffee_cup")
    cfg.model.kind = ModelKind::coffee_cup;
  else if (kind == "linear")
    cfg.model.kind = ModelKind::linear;
  else if (kind == "product")
    cfg.model.kind = ModelKind::product;
  else if (kind == "external")
    cfg.model.kind = ModelKind::external;
  else
    throw ValidationError("model.kind",
                          "unknown kind '" + kind + "' (coffee_cup|linear|product|external)");
  cfg.model.param_names = cfg.parameter_names;

  if (model.contains("time_grid")) {
    const auto& grid = model.at("time_grid");
    if (!grid.is_array() || grid.empty())
      throw ValidationError("model.time_grid", "expected a non-empty array");
    for (std::size_t i = 0; i < grid.size(); ++i)
      cfg.model.time_grid.push_back(
          detail::require_number(grid[i], "model.time_grid[" + std::to_string(i) + "]"));
    for (std::size_t i = 1; i < cfg.model.time_grid.size(); ++i)
      if (!(cfg.model.time_grid[i] > cfg.model.time_grid[i - 1]))
        throw ValidationError("model.time_grid", "must be strictly increasing");
  } else if (model.contains("t_end_min") || model.contains("time_steps")) {
    const double t_end = detail::require_number(
        detail::require_field(model, "t_end_min", "model.t_end_min"), "model.t_end_min");
    const double steps = detail::require_number(
        detail::require_field(model, "time_steps", "model.time_steps"), "model.time_steps");
    if (!(t_end > 0.0)) throw ValidationError("model.t_end_min", "must be positive");
    if (!(steps >= 1.0)) throw ValidationError("model.time_steps", "must be >= 1");
    cfg.model.time_grid = uniform_time_grid(t_end, static_cast<std::size_t>(steps));
  } else if (cfg.model.kind == ModelKind::coffee_cup) {
    cfg.model.time_grid = uniform_time_grid(200.0, 150);
  } else if (cfg.model.kind == ModelKind::external) {
    throw ValidationError("model.time_grid",
                          "external models need a time_grid or t_end_min/time_steps");
  } else {
    cfg.model.time_grid = {0.0};
  }

  switch (cfg.model.kind) {
    case ModelKind::coffee_cup:
      if (d != 2)
        throw ValidationError("marginals", "coffee_cup expects exactly 2 (kappa, t_env)");
      if (model.contains("t0"))
        cfg.model.initial_temperature = detail::require_number(model.at("t0"), "model.t0");
      break;
    case ModelKind::linear:
      if (model.contains("coefficients")) {
        const auto& coeffs = model.at("coefficients");
        if (!coeffs.is_array() || coeffs.size() != d)
          throw ValidationError("model.coefficients",
                                "expected an array of length " + std::to_string(d));
        for (std::size_t i = 0; i < coeffs.size(); ++i)
          cfg.model.coefficients.push_back(detail::require_number(
              coeffs[i], "model.coefficients[" + std::to_string(i) + "]"));
      }
      break;
    case ModelKind::product:
      break;
    case ModelKind::external:
      cfg.model.command = detail::require_string(
          detail::require_field(model, "command", "model.command"), "model.command");
      if (model.contains("timeout_s")) {
        cfg.model.timeout_seconds =
            detail::require_number(model.at("timeout_s"), "model.timeout_s");
        if (!(cfg.model.timeout_seconds > 0.0))
          throw ValidationError("model.timeout_s", "must be positive");
      }
      if (model.contains("workers")) {
        const double w = detail::require_number(model.at("workers"), "model.workers");
        if (!(w >= 1.0)) throw ValidationError("model.workers", "must be >= 1");
        cfg.model.workers = static_cast<unsigned>(w);
      }
      break;
  }

  if (j.contains("polynomial_order")) {
    const double p = detail::require_number(j.at("polynomial_order"), "polynomial_order");
    if (!(p >= 1.0)) throw ValidationError("polynomial_order", "must be >= 1");
    cfg.polynomial_order = static_cast<int>(p);
  }
  if (j.contains("node_multiplier")) {
    cfg.node_multiplier = detail::require_number(j.at("node_multiplier"), "node_multiplier");
    if (!(cfg.node_multiplier >= 1.0))
      throw ValidationError("node_multiplier", "must be >= 1");
  }
  if (j.contains("lambda")) {
    cfg.lambda = detail::require_number(j.at("lambda"), "lambda");
    if (cfg.lambda < 0.0) throw ValidationError("lambda", "must be non-negative");
  }
  if (j.contains("transform")) {
    const std::string t = detail::require_string(j.at("transform"), "transform");
    if (t == "rosenblatt")
      cfg.transform = TransformKind::rosenblatt;
    else if (t == "cholesky")
      cfg.transform = TransformKind::cholesky;
    else
      throw ValidationError("transform", "expected 'rosenblatt' or 'cholesky'");
  }
  if (j.contains("derivative_space")) {
    const std::string s = detail::require_string(j.at("derivative_space"), "derivative_space");
    if (s == "physical")
      cfg.derivative_space = DerivativeSpace::physical;
    else if (s == "standard")
      cfg.derivative_space = DerivativeSpace::standard;
    else
      throw ValidationError("derivative_space", "expected 'physical' or 'standard'");
  }
  if (j.contains("qmc")) {
    const auto& q = j.at("qmc");
    if (q.contains("n")) {
      const double n = detail::require_number(q.at("n"), "qmc.n");
      if (!(n >= 64.0)) throw ValidationError("qmc.n", "must be >= 64");
      cfg.qmc.n = static_cast<std::size_t>(n);
    }
    if (q.contains("seed"))
      cfg.qmc.seed =
          static_cast<std::uint64_t>(detail::require_number(q.at("seed"), "qmc.seed"));
  }
  if (j.contains("output")) {
    const auto& o = j.at("output");
    if (o.contains("dir")) cfg.output.dir = detail::require_string(o.at("dir"), "output.dir");
    if (o.contains("formats")) {
      if (!o.at("formats").is_array())
        throw ValidationError("output.formats", "expected an array");
      cfg.output.write_csv = false;
      cfg.output.write_json = false;
      for (const auto& f : o.at("formats")) {
        const std::string name = detail::require_string(f, "output.formats[]");
        if (name == "csv")
          cfg.output.write_csv = true;
        else if (name == "json")
          cfg.output.write_json = true;
        else
          throw ValidationError("output.formats", "unknown format '" + name + "'");
      }
    }
  }
  return cfg;
}

inline CampaignConfig load_campaign_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config", "cannot open file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config", std::string("invalid JSON: ") + e.what());
  }
  return load_campaign_config(j);
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<IndexRecord> sorted_records(const SensitivityReport& report) {
  std::vector<IndexRecord> recs = report.records;
  std::stable_sort(recs.begin(), recs.end(), [](const IndexRecord& a, const IndexRecord& b) {
    return std::tuple(a.time_index, a.parameter, static_cast<int>(a.kind),
                      static_cast<int>(a.provenance), a.permutation_id) <
           std::tuple(b.time_index, b.parameter, static_cast<int>(b.kind),
                      static_cast<int>(b.provenance), b.permutation_id);
  });
  return recs;
}

inline std::string parameter_label(const ReportMeta& meta, std::size_t parameter) {
  if (parameter < meta.parameter_names.size()) return meta.parameter_names[parameter];
  return "p" + std::to_string(parameter);
}

}  // namespace detail

inline void write_report_csv(const SensitivityReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << "t_min,parameter,kind,provenance,permutation,value\n";
  for (const auto& r : detail::sorted_records(report)) {
    out << detail::format_value(report.meta.time_grid[r.time_index]) << ','
        << detail::parameter_label(report.meta, r.parameter) << ','
        << index_kind_name(r.kind) << ',' << provenance_name(r.provenance) << ','
        << r.permutation_id << ',' << detail::format_value(r.value) << '\n';
  }
}

inline nlohmann::json report_to_json(const SensitivityReport& report) {
  nlohmann::json j;
  auto corr = nlohmann::json::array();
  for (std::size_t i = 0; i < report.meta.correlation.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (std::size_t k = 0; k < report.meta.correlation.cols(); ++k)
      row.push_back(report.meta.correlation(i, k));
    corr.push_back(std::move(row));
  }
  j["meta"] = {{"model", report.meta.model},
               {"order", report.meta.order},
               {"node_count", report.meta.node_count},
               {"lambda", report.meta.lambda},
               {"correlation", std::move(corr)},
               {"seed", report.meta.seed},
               {"derivative_space",
                report.meta.derivative_space == DerivativeSpace::physical ? "physical"
                                                                          : "standard"},
               {"parameters", report.meta.parameter_names},
               {"time_grid", report.meta.time_grid}};
  auto records = nlohmann::json::array();
  for (const auto& r : detail::sorted_records(report)) {
    records.push_back({{"t_min", report.meta.time_grid[r.time_index]},
                       {"time_index", r.time_index},
                       {"parameter", detail::parameter_label(report.meta, r.parameter)},
                       {"kind", index_kind_name(r.kind)},
                       {"provenance", provenance_name(r.provenance)},
                       {"permutation", r.permutation_id},
                       {"value", r.value}});
  }
  j["records"] = std::move(records);
  return j;
}

/// Mean/variance series of the fitted surrogate (defined at every step,
/// including those where Sobol indices are not).
inline void write_moments_csv(const Surrogate& s, std::span<const double> time_grid,
                              const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << "t_min,mean,variance\n";
  for (std::size_t t = 0; t < s.output_count(); ++t)
    out << detail::format_value(time_grid[t]) << ',' << detail::format_value(pce_mean(s, t))
        << ',' << detail::format_value(pce_variance(s, t)) << '\n';
}

// ---------------------------------------------------------------------------
// Campaign commands
// ---------------------------------------------------------------------------

/// Full analysis at the configured order: report.csv / report.json plus the
/// moments series of the first fitted surrogate.
inline void cmd_run(const CampaignConfig& cfg, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const SweepResult result = run_sweep(cfg.model, cfg.joint(), cfg.sweep());
  SensitivityReport report = result.report;
  report.meta.seed = 0;  // surrogate route is fully deterministic
  if (cfg.output.write_csv) {
    write_report_csv(report, out_dir + "/report.csv");
    write_moments_csv(result.surrogates.front(), report.meta.time_grid,
                      out_dir + "/moments.csv");
  }
  if (cfg.output.write_json) {
    std::ofstream out(out_dir + "/report.json", std::ios::binary);
    if (!out) throw Error("cannot write " + out_dir + "/report.json");
    out << report_to_json(report).dump(2) << '\n';
  }
}

/// Largest |PCE - QMC| gap per surrogate order and record family.
struct ConvergenceRow {
  int order;
  std::size_t parameter;
  IndexKind kind;
  Provenance provenance;
  double max_abs_diff;
};

struct ConvergenceStudy {
  SensitivityReport qmc;
  std::vector<SensitivityReport> pce;  // parallel to the requested orders
  std::vector<ConvergenceRow> rows;
};

inline ConvergenceStudy convergence_study(const CampaignConfig& cfg,
                                          const std::vector<int>& orders,
                                          std::size_t qmc_n) {
  if (orders.empty()) throw ValidationError("orders", "expected at least one order");
  const JointGaussian joint = cfg.joint();
  ConvergenceStudy study;
  study.qmc = qmc_sobol(cfg.model, joint, qmc_n, cfg.qmc.seed);

  // key: parameter, kind, provenance, permutation, time
  using Key = std::tuple<std::size_t, int, int, int, std::size_t>;
  std::map<Key, double> reference;
  for (const auto& r : study.qmc.records)
    reference[{r.parameter, static_cast<int>(r.kind), static_cast<int>(r.provenance),
               r.permutation_id, r.time_index}] = r.value;

  for (int order : orders) {
    SensitivityReport pce = run_sweep(cfg.model, joint, cfg.sweep(order)).report;
    std::map<std::tuple<std::size_t, int, int>, double> worst;
    for (const auto& r : pce.records) {
      const auto it = reference.find({r.parameter, static_cast<int>(r.kind),
                                      static_cast<int>(r.provenance), r.permutation_id,
                                      r.time_index});
      if (it == reference.end()) continue;  // derivative kinds, zero-variance steps
      auto& slot = worst[{r.parameter, static_cast<int>(r.kind),
                          static_cast<int>(r.provenance)}];
      slot = std::max(slot, std::fabs(r.value - it->second));
    }
    for (const auto& [key, diff] : worst)
      study.rows.push_back({order, std::get<0>(key),
                            static_cast<IndexKind>(std::get<1>(key)),
                            static_cast<Provenance>(std::get<2>(key)), diff});
    study.pce.push_back(std::move(pce));
  }
  return study;
}

/// Convergence study: one QMC reference, one surrogate run per order,
/// stacked max-difference table.
inline void cmd_convergence(const CampaignConfig& cfg, const std::vector<int>& orders,
                            std::size_t qmc_n, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const ConvergenceStudy study = convergence_study(cfg, orders, qmc_n);
  std::ofstream out(out_dir + "/convergence.csv", std::ios::binary);
  if (!out) throw Error("cannot write " + out_dir + "/convergence.csv");
  out << "order,parameter,kind,provenance,max_abs_diff\n";
  for (const auto& row : study.rows)
    out << row.order << ',' << detail::parameter_label(study.qmc.meta, row.parameter)
        << ',' << index_kind_name(row.kind) << ',' << provenance_name(row.provenance)
        << ',' << detail::format_value(row.max_abs_diff) << '\n';
}

/// Repeat the analysis over a list of correlation strengths. rho = 1 is
/// replaced by 1 - 1e-10 to keep the matrix positive definite.
inline void cmd_sweep_rho(const CampaignConfig& cfg, std::vector<double> rhos,
                          const std::string& out_dir) {
  if (rhos.empty()) throw ValidationError("rhos", "expected at least one value");
  for (double& rho : rhos) {
    if (!(rho >= 0.0 && rho <= 1.0))
      throw ValidationError("rhos", "values must lie in [0, 1]");
    if (rho == 1.0) rho = 1.0 - 1e-10;
  }
  std::filesystem::create_directories(out_dir);
  std::ofstream stacked(out_dir + "/rho_sweep.csv", std::ios::binary);
  if (!stacked) throw Error("cannot write " + out_dir + "/rho_sweep.csv");
  stacked << "rho,t_min,parameter,kind,provenance,permutation,value\n";
  for (std::size_t k = 0; k < rhos.size(); ++k) {
    const SweepResult result = run_sweep(cfg.model, cfg.joint_with_rho(rhos[k]), cfg.sweep());
    char name[32];
    std::snprintf(name, sizeof name, "report_rho_%02zu.csv", k);
    write_report_csv(result.report, out_dir + "/" + name);
    const std::string rho_label = detail::format_value(rhos[k]);
    for (const auto& r : detail::sorted_records(result.report))
      stacked << rho_label << ','
              << detail::format_value(result.report.meta.time_grid[r.time_index]) << ','
              << detail::parameter_label(result.report.meta, r.parameter) << ','
              << index_kind_name(r.kind) << ',' << provenance_name(r.provenance) << ','
              << r.permutation_id << ',' << detail::format_value(r.value) << '\n';
  }
}

/// Response surfaces of the uncorrelated and correlated surrogates over a
/// 41×41 grid spanning ±3 standard deviations, at the requested times
/// (snapped to the model grid). Two-parameter models only.
inline void cmd_surface(const CampaignConfig& cfg, const std::vector<double>& t_list,
                        const std::string& out_dir) {
  if (cfg.dim() != 2)
    throw ValidationError("marginals", "surface command requires exactly 2 parameters");
  if (t_list.empty()) throw ValidationError("times", "expected at least one time");
  for (double t : t_list)
    if (t < cfg.model.time_grid.front() || t > cfg.model.time_grid.back())
      throw ValidationError("times", "time " + detail::format_value(t) + " outside the grid");
  std::filesystem::create_directories(out_dir);

  const SweepConfig sweep = cfg.sweep();
  const MultiIndexBasis basis(2, sweep.order);
  const std::size_t node_count = static_cast<std::size_t>(
      std::ceil(sweep.node_multiplier * static_cast<double>(basis.size())));
  const SampleMatrix nodes = to_standard_normal(hammersley(node_count, 2));

  const JointGaussian ident = cfg.joint_with_rho(0.0);
  const Matrix y0 = evaluate_model(cfg.model, detail::physical_rows(ident, nodes));
  const Surrogate s0 = fit(basis, nodes, y0, sweep.lambda);

  const JointGaussian joint = cfg.joint();
  const Permutation perm = Permutation::identity(2);
  const SampleMatrix correlated = (sweep.transform == TransformKind::rosenblatt)
                                      ? rosenblatt_forward(nodes, joint, perm)
                                      : cholesky_transform(nodes, joint.correlation);
  const Matrix yc = evaluate_model(cfg.model, detail::physical_rows(joint, correlated));
  const Surrogate sc = fit(basis, nodes, yc, sweep.lambda);

  const Matrix& chol = joint.correlation.chol();

  std::ofstream out(out_dir + "/surface.csv", std::ios::binary);
  if (!out) throw Error("cannot write " + out_dir + "/surface.csv");
  const std::string p0 = cfg.parameter_names[0];
  const std::string p1 = cfg.parameter_names[1];
  out << "t_min," << p0 << ',' << p1 << ",uncorrelated,correlated,difference\n";

  constexpr int kGrid = 41;
  for (double t : t_list) {
    std::size_t ti = 0;
    double best = std::fabs(cfg.model.time_grid[0] - t);
    for (std::size_t i = 1; i < cfg.model.time_grid.size(); ++i) {
      const double dist = std::fabs(cfg.model.time_grid[i] - t);
      if (dist < best) { best = dist; ti = i; }
    }
    for (int a = 0; a < kGrid; ++a) {
      for (int b = 0; b < kGrid; ++b) {
        const double z0 = -3.0 + 6.0 * a / (kGrid - 1);
        const double z1 = -3.0 + 6.0 * b / (kGrid - 1);
        const std::vector<double> zq = {z0, z1};
        // Correlated surrogate is a function of the independent coordinates;
        // invert the Cholesky map to evaluate it at the same physical point.
        const auto zc = forward_substitute(chol, zq);
        const double q0 = cfg.marginals[0].mean + cfg.marginals[0].std * z0;
        const double q1 = cfg.marginals[1].mean + cfg.marginals[1].std * z1;
        const double v0 = eval(s0, zq)[ti];
        const double vc = eval(sc, zc)[ti];
        out << detail::format_value(cfg.model.time_grid[ti]) << ','
            << detail::format_value(q0) << ',' << detail::format_value(q1) << ','
            << detail::format_value(v0) << ',' << detail::format_value(vc) << ','
            << detail::format_value(vc - v0) << '\n';
      }
    }
  }
}

}  // namespace gsa
