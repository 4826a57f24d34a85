#pragma once

// JSON wire formats. Complex numbers travel as [re, im], matrices as
// row-major nested arrays. Malformed input raises SchemaError so the callers
// can separate bad files (exit 2) from failed mathematics (exit 1).

#include <isopair/analytic.hpp>
#include <isopair/bcl.hpp>
#include <isopair/bidisc.hpp>
#include <isopair/defect.hpp>
#include <isopair/equivalence.hpp>

#include <json.hpp>

#include <string>
#include <vector>

namespace isopair {

using Json = nlohmann::json;

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline Json complex_to_json(const Complex& z) { return Json::array({z.real(), z.imag()}); }

inline Complex complex_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw SchemaError("complex entries must be [re, im] number pairs");
  return Complex(j[0].get<double>(), j[1].get<double>());
}

inline Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const Json& j) {
  if (!j.is_array()) throw SchemaError("matrix must be an array of rows");
  const Index rows = Index(j.size());
  if (rows == 0) return Matrix(0, 0);
  if (!j[0].is_array()) throw SchemaError("matrix rows must be arrays");
  const Index cols = Index(j[0].size());
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    if (!j[size_t(i)].is_array() || Index(j[size_t(i)].size()) != cols)
      throw SchemaError("matrix rows must all have the same length");
    for (Index c = 0; c < cols; ++c) m(i, c) = complex_from_json(j[size_t(i)][size_t(c)]);
  }
  if (!finite_entries(m)) throw SchemaError("matrix entries must be finite");
  return m;
}

inline Json vector_to_json(const Vector& v) {
  Json arr = Json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(complex_to_json(v(i)));
  return arr;
}

inline Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw SchemaError("vector must be an array");
  Vector v(Index(j.size()));
  for (Index i = 0; i < v.size(); ++i) v(i) = complex_from_json(j[size_t(i)]);
  return v;
}

inline Json graded_vector_to_json(const GradedVector& f) {
  Json coeffs = Json::array();
  for (const Vector& c : f.coeffs) coeffs.push_back(vector_to_json(c));
  return Json{{"dim", f.dim}, {"coeffs", std::move(coeffs)}};
}

inline GradedVector graded_vector_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("coeffs"))
    throw SchemaError("graded vector needs fields dim and coeffs");
  const Index dim = j.at("dim").get<Index>();
  if (dim < 0) throw SchemaError("graded vector dim must be nonnegative");
  std::vector<Vector> coeffs;
  for (const Json& c : j.at("coeffs")) {
    Vector v = vector_from_json(c);
    if (v.size() != dim) throw SchemaError("graded vector coefficient has the wrong dimension");
    coeffs.push_back(std::move(v));
  }
  return GradedVector(dim, std::move(coeffs));
}

inline Json poly_symbol_to_json(const PolySymbol& s) {
  Json mats = Json::array();
  for (const Matrix& m : s.mats) mats.push_back(matrix_to_json(m));
  return Json{{"dim", s.dim}, {"matrices", std::move(mats)}};
}

inline PolySymbol poly_symbol_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("matrices"))
    throw SchemaError("symbol needs fields dim and matrices");
  const Index dim = j.at("dim").get<Index>();
  if (dim <= 0) throw SchemaError("symbol dim must be positive");
  std::vector<Matrix> mats;
  for (const Json& m : j.at("matrices")) {
    Matrix mm = matrix_from_json(m);
    if (mm.rows() != dim || mm.cols() != dim)
      throw SchemaError("symbol coefficient has the wrong shape");
    mats.push_back(std::move(mm));
  }
  return PolySymbol(dim, std::move(mats));
}

inline Json bcl_data_to_json(const BCLData& d) {
  return Json{{"dim", d.dim}, {"U", matrix_to_json(d.U)}, {"P", matrix_to_json(d.P)}};
}

inline BCLData bcl_data_from_json(const Json& j, const TolerancePolicy& tol = {}) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("U") || !j.contains("P"))
    throw SchemaError("bcl payload needs fields dim, U, P");
  BCLData d;
  d.dim = j.at("dim").get<Index>();
  d.U = matrix_from_json(j.at("U"));
  d.P = matrix_from_json(j.at("P"));
  if (d.U.rows() != d.dim || d.U.cols() != d.dim || d.P.rows() != d.dim || d.P.cols() != d.dim)
    throw SchemaError("bcl payload shapes disagree with dim");
  try {
    d.validate(tol);
  } catch (const std::exception& e) {
    throw SchemaError(std::string("bcl payload invalid: ") + e.what());
  }
  return d;
}

inline Json generators_to_json(const std::vector<BivariatePoly>& gens, int degree, int guard) {
  Json gs = Json::array();
  for (const BivariatePoly& g : gens) {
    Json terms = Json::array();
    for (const auto& [ab, c] : g.terms)
      terms.push_back(Json{{"a", ab.first}, {"b", ab.second}, {"c", complex_to_json(c)}});
    gs.push_back(Json{{"terms", std::move(terms)}});
  }
  return Json{{"generators", std::move(gs)}, {"degree", degree}, {"guard", guard}};
}

struct GeneratorFile {
  std::vector<BivariatePoly> generators;
  int degree = 0;
  int guard = 3;
};

inline GeneratorFile generators_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("generators") || !j.contains("degree"))
    throw SchemaError("bidisc payload needs fields generators and degree");
  GeneratorFile out;
  out.degree = j.at("degree").get<int>();
  out.guard = j.value("guard", 3);
  if (out.degree < 0 || out.guard < 0) throw SchemaError("degree and guard must be nonnegative");
  for (const Json& g : j.at("generators")) {
    if (!g.is_object() || !g.contains("terms")) throw SchemaError("generator needs a terms array");
    BivariatePoly p;
    for (const Json& t : g.at("terms")) {
      if (!t.is_object() || !t.contains("a") || !t.contains("b") || !t.contains("c"))
        throw SchemaError("generator term needs fields a, b, c");
      try {
        p.add_term(t.at("a").get<int>(), t.at("b").get<int>(), complex_from_json(t.at("c")));
      } catch (const std::invalid_argument& e) {
        throw SchemaError(std::string("generator term invalid: ") + e.what());
      }
    }
    out.generators.push_back(std::move(p));
  }
  if (out.generators.empty()) throw SchemaError("bidisc payload needs at least one generator");
  return out;
}

// A pair description as it appears in input files. Exactly one payload is
// populated, selected by kind.
struct PairSpec {
  std::string kind;  // bcl | bidisc | matrix-unitary | direct-sum
  BCLData bcl;
  GeneratorFile bidisc;
  Matrix U1, U2;
  std::vector<PairSpec> parts;
};

inline PairSpec pair_spec_from_json(const Json& j, const TolerancePolicy& tol = {}) {
  if (!j.is_object() || !j.contains("kind")) throw SchemaError("pair spec needs field kind");
  PairSpec spec;
  spec.kind = j.at("kind").get<std::string>();
  if (spec.kind == "bcl") {
    if (!j.contains("bcl")) throw SchemaError("kind bcl needs field bcl");
    spec.bcl = bcl_data_from_json(j.at("bcl"), tol);
  } else if (spec.kind == "bidisc") {
    if (!j.contains("bidisc")) throw SchemaError("kind bidisc needs field bidisc");
    spec.bidisc = generators_from_json(j.at("bidisc"));
  } else if (spec.kind == "matrix-unitary") {
    if (!j.contains("U1") || !j.contains("U2"))
      throw SchemaError("kind matrix-unitary needs fields U1 and U2");
    spec.U1 = matrix_from_json(j.at("U1"));
    spec.U2 = matrix_from_json(j.at("U2"));
  } else if (spec.kind == "direct-sum") {
    if (!j.contains("parts") || !j.at("parts").is_array() || j.at("parts").empty())
      throw SchemaError("kind direct-sum needs a nonempty parts array");
    for (const Json& p : j.at("parts")) spec.parts.push_back(pair_spec_from_json(p, tol));
  } else {
    throw SchemaError("unknown pair kind: " + spec.kind);
  }
  return spec;
}

inline Json pair_spec_to_json(const PairSpec& spec) {
  Json j{{"kind", spec.kind}};
  if (spec.kind == "bcl") j["bcl"] = bcl_data_to_json(spec.bcl);
  if (spec.kind == "bidisc")
    j["bidisc"] = generators_to_json(spec.bidisc.generators, spec.bidisc.degree, spec.bidisc.guard);
  if (spec.kind == "matrix-unitary") {
    j["U1"] = matrix_to_json(spec.U1);
    j["U2"] = matrix_to_json(spec.U2);
  }
  if (spec.kind == "direct-sum") {
    Json parts = Json::array();
    for (const PairSpec& p : spec.parts) parts.push_back(pair_spec_to_json(p));
    j["parts"] = std::move(parts);
  }
  return j;
}

inline Json defect_report_to_json(const DefectReport& rep) {
  Json verdicts{{"nonneg", rep.verdicts.nonneg},
                {"v2w1_in_w1", rep.verdicts.v2w1_in_w1},
                {"doubly_commuting", rep.verdicts.doubly_commuting},
                {"projection", rep.verdicts.projection},
                {"fringe2_isometric", rep.verdicts.fringe2_isometric},
                {"consistent", rep.verdicts.consistent}};
  return Json{{"verdicts", std::move(verdicts)},
              {"spectrum", rep.spectrum},
              {"route_gap", rep.route_gap},
              {"expression_gap", rep.expression_gap},
              {"containment_residual", rep.containment_residual},
              {"commutation_defect", rep.commutation_defect},
              {"projection_defect", rep.projection_defect},
              {"fringe_defect", rep.fringe_defect},
              {"dim_w", rep.dim_w},
              {"dim_w1", rep.dim_w1},
              {"dim_w2", rep.dim_w2},
              {"v1_pure_declared", rep.v1_pure_declared},
              {"v2_pure_declared", rep.v2_pure_declared}};
}

// Series serialization carries whatever tail statement the producer can
// honestly make: an explicit bound, or null when no decay was observed.
inline Json series_to_json(const AnalyticSymbolSeries& s, double tail_bound,
                           const std::string& tail_kind) {
  Json mats = Json::array();
  for (const Matrix& m : s.coeffs) mats.push_back(matrix_to_json(m));
  Json j{{"domain_dim", s.domain_dim},
         {"codomain_dim", s.codomain_dim},
         {"matrices", std::move(mats)},
         {"tail_bound_kind", tail_kind}};
  if (tail_kind == "unknown")
    j["tail_bound"] = nullptr;
  else
    j["tail_bound"] = tail_bound;
  return j;
}

inline Json equivalence_report_to_json(const EquivalenceReport& rep) {
  Json j{{"verdict", verdict_name(rep.verdict)},
         {"words_checked", rep.words_checked},
         {"trace_test_complete", rep.trace_test_complete}};
  if (rep.verdict == Verdict::no) {
    j["distinguishing_word"] = word_label(rep.distinguishing_word);
    j["trace_gap"] = rep.trace_gap;
  } else {
    j["distinguishing_word"] = nullptr;
  }
  if (rep.verdict == Verdict::yes && rep.witness.size() > 0) {
    j["witness"] = matrix_to_json(rep.witness);
    j["witness_residual"] = rep.witness_residual;
  } else {
    j["witness"] = nullptr;
  }
  return j;
}

}  // namespace isopair
