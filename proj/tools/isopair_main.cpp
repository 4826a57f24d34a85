#include <isopair/analysis.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace {

isopair::Json load_json(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw isopair::SchemaError("cannot read " + path);
  isopair::Json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw isopair::SchemaError("invalid JSON in " + path + ": " + e.what());
  }
  return j;
}

int emit(const isopair::RunResult& res, const std::string& out_path) {
  if (out_path.empty())
    std::cout << res.report.dump(2) << '\n';
  else
    isopair::write_report_atomic(out_path, res.report);
  return res.exit_code;
}

// --tol defaults to 1e-6 unless ISOPAIR_TOL overrides the default; an
// explicit flag always wins.
double default_tol() {
  if (const char* env = std::getenv("ISOPAIR_TOL")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end != env && v > 0.0) return v;
  }
  return 1e-6;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"analyzer for pairs of commuting isometries at finite truncation"};
  app.require_subcommand(1);

  std::string spec_path, spec_b_path, out_path;
  int degree = 12;
  double tol = default_tol();
  std::uint64_t seed = 0;
  long long dim = 4, rank = 2;

  const auto add_common = [&](CLI::App* sub, bool with_degree) {
    sub->add_option("--out", out_path, "write the report to this file instead of stdout");
    sub->add_option("--tol", tol, "comparison tolerance");
    sub->add_option("--seed", seed, "seed recorded in the report");
    if (with_degree) sub->add_option("--degree", degree, "truncation and series degree");
  };

  CLI::App* validate = app.add_subcommand("validate", "check a pair spec file");
  validate->add_option("spec", spec_path, "pair spec JSON file")->required();
  add_common(validate, true);

  CLI::App* analyze = app.add_subcommand("analyze", "full analysis report for one pair");
  analyze->add_option("spec", spec_path, "pair spec JSON file")->required();
  add_common(analyze, true);

  CLI::App* compare = app.add_subcommand("compare", "joint unitary equivalence of two pairs");
  compare->add_option("spec_a", spec_path, "first pair spec")->required();
  compare->add_option("spec_b", spec_b_path, "second pair spec")->required();
  add_common(compare, true);

  CLI::App* construct = app.add_subcommand("construct", "emit a seeded random exchange-data spec");
  construct->add_option("--dim", dim, "fiber dimension");
  construct->add_option("--rank", rank, "projection rank");
  add_common(construct, false);

  CLI11_PARSE(app, argc, argv);

  isopair::AnalysisConfig cfg;
  cfg.degree = degree;
  cfg.tol.approx_tol = tol;
  cfg.seed = seed;

  try {
    cfg.tol.validate();
    if (validate->parsed()) return emit(isopair::run_validate(load_json(spec_path), cfg), out_path);
    if (analyze->parsed()) return emit(isopair::run_analyze(load_json(spec_path), cfg), out_path);
    if (compare->parsed())
      return emit(isopair::run_compare(load_json(spec_path), load_json(spec_b_path), cfg),
                  out_path);
    return emit(isopair::run_construct(isopair::Index(dim), isopair::Index(rank), seed), out_path);
  } catch (const isopair::SchemaError& e) {
    isopair::RunResult res;
    res.report["error"] = e.what();
    res.exit_code = isopair::kExitSchema;
    return emit(res, out_path);
  } catch (const std::invalid_argument& e) {
    isopair::RunResult res;
    res.report["error"] = e.what();
    res.exit_code = isopair::kExitSchema;
    return emit(res, out_path);
  } catch (const std::exception& e) {
    isopair::RunResult res;
    res.report["error"] = e.what();
    res.exit_code = isopair::kExitInconsistent;
    return emit(res, out_path);
  }
}
