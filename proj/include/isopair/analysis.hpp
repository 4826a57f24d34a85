#pragma once

// Batch analyses behind the CLI: realize a pair spec as a truncated model,
// run every cross-check the library offers, and emit one JSON report whose
// exit code states whether the internal consistency contract held. Reports
// embed the full configuration so every number is reproducible from the
// report alone; identical inputs give byte-identical reports.

#include <isopair/json_io.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace isopair {

struct AnalysisConfig {
  int degree = 12;
  TolerancePolicy tol;
  std::uint64_t seed = 0;
};

struct RunResult {
  Json report;
  int exit_code = 0;
};

// Exit contract shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInconsistent = 1;
inline constexpr int kExitSchema = 2;

inline TruncatedPair realize_pair(const PairSpec& spec, const AnalysisConfig& cfg) {
  if (spec.kind == "bcl") return bcl_truncated_pair(spec.bcl, cfg.degree, cfg.tol);
  if (spec.kind == "bidisc") {
    const TruncatedSubspace s =
        span_to_degree(spec.bidisc.generators, spec.bidisc.degree, spec.bidisc.guard, cfg.tol);
    return restricted_pair(s, cfg.tol);
  }
  if (spec.kind == "matrix-unitary") {
    try {
      return unitary_truncated_pair(spec.U1, spec.U2, cfg.tol);
    } catch (const std::invalid_argument& e) {
      throw SchemaError(std::string("matrix-unitary payload invalid: ") + e.what());
    }
  }
  // direct-sum: fold the parts left to right.
  TruncatedPair acc = realize_pair(spec.parts.front(), cfg);
  for (size_t i = 1; i < spec.parts.size(); ++i)
    acc = direct_sum_pair(acc, realize_pair(spec.parts[i], cfg));
  return acc;
}

inline Json config_to_json(const AnalysisConfig& cfg, const std::string& kind) {
  return Json{{"degree", cfg.degree},
              {"tol", cfg.tol.approx_tol},
              {"eq_tol", cfg.tol.eq_tol},
              {"seed", cfg.seed},
              {"kind", kind}};
}

inline Json pair_summary_json(const TruncatedPair& pair) {
  return Json{{"dim", pair.dim()},
              {"unitary_dim", pair.unitary_dim()},
              {"max_degree", pair.max_degree},
              {"guard", pair.guard},
              {"interior_degree", pair.interior_degree()},
              {"v1_pure", pair.v1_pure},
              {"v2_pure", pair.v2_pure},
              {"product_pure", pair.product_pure},
              {"commutation_residual", commutation_residual(pair)},
              {"adjoint_defect", pair.adjoint_defect}};
}

// Exchange-structure extraction on the truncated model: rebuild the unitary
// that swaps the two wandering decompositions and the projection onto W2, in
// the coordinates of W, and measure how well the structure closes. All checks
// run on the settled part of W so truncation edges cannot masquerade as
// structural failures.
inline Json truncated_extraction_json(const TruncatedPair& pair, const GeometricDefect& geo,
                                      const TolerancePolicy& tol) {
  Json j;
  j["dim_w"] = geo.W.dim();
  if (geo.W.dim() == 0) {
    j["note"] = "no wandering part; nothing to extract";
    return j;
  }
  const Subspace settled = settled_part(pair, geo.W, tol);
  j["settled_dim"] = settled.dim();
  const Matrix pw1 = projector(geo.W1), pv1w2 = projector(geo.V1W2);
  const Matrix v1w2 = pair.V1 * geo.W2.basis;
  const Matrix exchange = pair.V2 * pw1 + geo.W2.basis * v1w2.adjoint();
  j["decomposition_gap"] =
      settled.dim() == 0 ? 0.0 : ((pw1 + pv1w2) * settled.basis - settled.basis).norm();
  const Matrix g = exchange * settled.basis;
  j["isometry_gap"] =
      settled.dim() == 0
          ? 0.0
          : (g.adjoint() * g - Matrix::Identity(g.cols(), g.cols())).norm();
  j["into_w_gap"] =
      settled.dim() == 0
          ? 0.0
          : ((Matrix::Identity(pair.dim(), pair.dim()) - projector(geo.W)) * g).norm();
  j["U"] = matrix_to_json(geo.W.basis.adjoint() * exchange * geo.W.basis);
  j["P"] = matrix_to_json(geo.W.basis.adjoint() * projector(geo.W2) * geo.W.basis);
  return j;
}

// Tail statement for a series computed on a truncated model: probe a fixed
// number of coefficients past the reported degree; exactly-zero tails give a
// zero bound, geometric decay gives an extrapolated bound, anything else is
// declared unknown.
inline Json series_with_tail_json(const AnalyticSymbolSeries& full, int report_degree,
                                  const TolerancePolicy& tol) {
  AnalyticSymbolSeries head;
  head.domain_dim = full.domain_dim;
  head.codomain_dim = full.codomain_dim;
  for (int m = 0; m <= report_degree && m < int(full.coeffs.size()); ++m)
    head.coeffs.push_back(full.at(m));
  std::vector<double> extra;
  for (int m = report_degree + 1; m < int(full.coeffs.size()); ++m)
    extra.push_back(full.at(m).norm());
  double partial = 0.0, peak = 0.0;
  for (double x : extra) {
    partial += x;
    peak = std::max(peak, x);
  }
  if (extra.empty() || peak <= tol.eq_tol) return series_to_json(head, 0.0, "exact-zero");
  double ratio = 0.0;
  for (size_t k = extra.size() >= 5 ? extra.size() - 5 : 1; k < extra.size(); ++k) {
    if (extra[k - 1] <= tol.eq_tol) continue;
    ratio = std::max(ratio, extra[k] / extra[k - 1]);
  }
  if (ratio > 0.0 && ratio < 0.999) {
    const double bound = partial + extra.back() * ratio / (1.0 - ratio);
    return series_to_json(head, bound, "geometric-extrapolation");
  }
  return series_to_json(head, 0.0, "unknown");
}

inline Json theta_block_json(const TruncatedPair& pair, int factor, const AnalysisConfig& cfg) {
  if (!(factor == 1 ? pair.v1_pure : pair.v2_pure))
    return Json{{"skipped", "model factor is not declared pure"}};
  constexpr int kTailProbe = 25;
  const AnalyticSymbolSeries full = theta_series(pair, factor, cfg.degree + kTailProbe, cfg.tol);
  return series_with_tail_json(full, cfg.degree, cfg.tol);
}

inline Json characteristic_block_json(const TruncatedPair& pair, int factor,
                                      const AnalysisConfig& cfg) {
  const AnalyticSymbolSeries s = characteristic_series(pair, factor, cfg.degree, cfg.tol);
  Json j = series_to_json(s, 0.0, "not-declared");
  j["bridge_residual"] = characteristic_bridge_residual(pair, factor, cfg.degree, cfg.tol);
  return j;
}

inline RunResult run_validate(const Json& spec_json, const AnalysisConfig& cfg) {
  const PairSpec spec = pair_spec_from_json(spec_json, cfg.tol);
  const TruncatedPair pair = realize_pair(spec, cfg);
  RunResult out;
  out.report["config"] = config_to_json(cfg, spec.kind);
  out.report["pair"] = pair_summary_json(pair);
  const double comm = commutation_residual(pair);
  const bool ok = comm <= cfg.tol.approx_tol * (1.0 + double(pair.dim())) &&
                  pair.adjoint_defect <= cfg.tol.approx_tol;
  out.report["valid"] = ok;
  out.exit_code = ok ? kExitOk : kExitInconsistent;
  return out;
}

inline RunResult run_analyze(const Json& spec_json, const AnalysisConfig& cfg) {
  const PairSpec spec = pair_spec_from_json(spec_json, cfg.tol);
  const TruncatedPair pair = realize_pair(spec, cfg);
  RunResult out;
  out.report["config"] = config_to_json(cfg, spec.kind);
  out.report["pair"] = pair_summary_json(pair);

  const DefectReport defect = defect_verdict(pair, cfg.tol);
  out.report["defect"] = defect_report_to_json(defect);

  const GeometricDefect geo = defect_geometric(pair, cfg.tol);
  out.report["wandering"] = Json{{"dim_w", geo.W.dim()},
                                 {"dim_w1", geo.W1.dim()},
                                 {"dim_w2", geo.W2.dim()},
                                 {"dim_v1w2", geo.V1W2.dim()},
                                 {"dim_v2w1", geo.V2W1.dim()},
                                 {"expression_gap", geo.expression_gap}};
  const WoldContainments wc = wold_part_containments(pair, cfg.tol);
  out.report["wold_containments"] = Json{{"shift_residual1", wc.shift_residual1},
                                         {"shift_residual2", wc.shift_residual2},
                                         {"unitary_residual1", wc.unitary_residual1},
                                         {"unitary_residual2", wc.unitary_residual2}};

  Json extraction = truncated_extraction_json(pair, geo, cfg.tol);
  if (spec.kind == "bcl") {
    // Symbol-level round trip against the input data.
    const BCLPair mult = build_multipliers(spec.bcl, cfg.tol);
    const BCLData back = extract_bcl(mult, cfg.tol);
    extraction["symbol_round_trip"] = Json{{"u_mismatch", (back.U - spec.bcl.U).norm()},
                                           {"p_mismatch", (back.P - spec.bcl.P).norm()}};
  }
  out.report["bcl_extraction"] = extraction;

  out.report["theta"] = Json{{"factor1", theta_block_json(pair, 1, cfg)},
                             {"factor2", theta_block_json(pair, 2, cfg)}};
  out.report["characteristic"] = Json{{"factor1", characteristic_block_json(pair, 1, cfg)},
                                      {"factor2", characteristic_block_json(pair, 2, cfg)}};

  // Consistency contract: every residual the report carries must sit inside
  // the declared tolerance. Exit 1 when any check fails.
  const double scale = cfg.tol.approx_tol * (1.0 + double(pair.dim()));
  Json checks;
  checks["commutation"] = commutation_residual(pair) <= scale;
  checks["adjoint_defect"] = pair.adjoint_defect <= cfg.tol.approx_tol;
  checks["defect_verdicts_consistent"] = defect.verdicts.consistent;
  checks["defect_route_gap"] = defect.route_gap <= scale;
  checks["defect_expression_gap"] = defect.expression_gap <= scale;
  checks["wold_containments"] =
      std::max({wc.shift_residual1, wc.shift_residual2, wc.unitary_residual1,
                wc.unitary_residual2}) <= cfg.tol.approx_tol;
  checks["extraction_closes"] =
      geo.W.dim() == 0 ||
      std::max({extraction["decomposition_gap"].get<double>(),
                extraction["isometry_gap"].get<double>(),
                extraction["into_w_gap"].get<double>()}) <= scale;
  if (extraction.contains("symbol_round_trip"))
    checks["symbol_round_trip"] =
        std::max(extraction["symbol_round_trip"]["u_mismatch"].get<double>(),
                 extraction["symbol_round_trip"]["p_mismatch"].get<double>()) <= scale;
  checks["bridge_factor1"] =
      out.report["characteristic"]["factor1"]["bridge_residual"].get<double>() <= scale;
  checks["bridge_factor2"] =
      out.report["characteristic"]["factor2"]["bridge_residual"].get<double>() <= scale;

  bool all = true;
  for (const auto& [name, v] : checks.items()) all = all && v.get<bool>();
  out.report["consistency"] = std::move(checks);
  out.report["all_consistent"] = all;
  out.exit_code = all ? kExitOk : kExitInconsistent;
  return out;
}

inline RunResult run_compare(const Json& a_json, const Json& b_json, const AnalysisConfig& cfg) {
  const PairSpec a = pair_spec_from_json(a_json, cfg.tol);
  const PairSpec b = pair_spec_from_json(b_json, cfg.tol);
  RunResult out;
  out.report["config"] = config_to_json(cfg, a.kind + "/" + b.kind);
  // The joint invariant lives on the constant fiber of the multiplier model,
  // so comparison is defined for explicit exchange-data inputs only.
  if (a.kind != "bcl" || b.kind != "bcl") {
    out.report["error"] = "compare requires two specs of kind bcl";
    out.exit_code = kExitSchema;
    return out;
  }
  const PurityFlags fa = declared_purity(a.bcl, cfg.tol);
  const PurityFlags fb = declared_purity(b.bcl, cfg.tol);
  if (!(fa.v1 && fa.v2 && fb.v1 && fb.v2)) {
    out.report["error"] = "compare requires both factors of both pairs to be pure";
    out.report["purity"] = Json{{"a_v1", fa.v1}, {"a_v2", fa.v2}, {"b_v1", fb.v1}, {"b_v2", fb.v2}};
    out.exit_code = kExitSchema;
    return out;
  }
  const BCLPair pa = build_multipliers(a.bcl, cfg.tol);
  const BCLPair pb = build_multipliers(b.bcl, cfg.tol);
  const PairEquivalenceReport rep = pair_equivalence(pa, pb, cfg.tol);
  out.report["verdict"] = verdict_name(rep.verdict);
  out.report["coefficient_route"] = equivalence_report_to_json(rep.coefficient_route);
  out.report["exchange_route"] = equivalence_report_to_json(rep.exchange_route);
  out.exit_code = kExitOk;
  return out;
}

inline RunResult run_construct(Index dim, Index rank, std::uint64_t seed) {
  RunResult out;
  if (dim < 1 || rank < 0 || rank > dim) {
    out.report["error"] = "construct needs 1 <= dim and 0 <= rank <= dim";
    out.exit_code = kExitSchema;
    return out;
  }
  PairSpec spec;
  spec.kind = "bcl";
  spec.bcl = random_bcl(dim, rank, seed);
  out.report = pair_spec_to_json(spec);
  out.report["seed"] = seed;
  return out;
}

// Reports land whole or not at all: write a sibling temp file, then rename.
inline void write_report_atomic(const std::string& path, const Json& report) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + tmp + " for writing");
    os << report.dump(2) << '\n';
    if (!os.good()) throw std::runtime_error("short write on " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace isopair
