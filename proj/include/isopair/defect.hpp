#pragma once

// Defect operator C(V1, V2) = I - V1 V1* - V2 V2* + V1 V2 V1* V2* of a
// commuting isometric pair, computed two independent ways on the trusted
// interior band, together with the five equivalent positivity/doubly-commuting
// verdicts and the fringe operators. The two routes must agree; disagreement
// signals an untrustworthy truncation, not a property of the pair.

#include <isopair/pair_model.hpp>

namespace isopair {

// Direct algebraic route, restricted to the interior band. Each product in
// the formula stays degree-exact there because adjoints are exact and forward
// maps get one degree of headroom.
inline Matrix defect_direct(const TruncatedPair& pair, const TolerancePolicy& tol = {}) {
  tol.validate();
  if (pair.max_degree < 2 && pair.unitary_dim() < pair.dim())
    throw std::invalid_argument("defect_direct: truncation degree must be >= 2");
  const Matrix id = Matrix::Identity(pair.dim(), pair.dim());
  const Matrix c = id - pair.V1 * pair.V1.adjoint() - pair.V2 * pair.V2.adjoint() +
                   pair.V1 * pair.V2 * pair.V1.adjoint() * pair.V2.adjoint();
  return compress_interior(pair, c);
}

struct GeometricDefect {
  Matrix interior;         // first expression P_W1 - P_{V2 W1}, interior block
  double expression_gap;   // interior-band distance to P_W2 - P_{V1 W2}
  Subspace W, W1, W2;
  Subspace V1W2, V2W1;
};

// Wandering-subspace route: both difference-of-projector expressions, checked
// against each other on the interior band.
inline GeometricDefect defect_geometric(const TruncatedPair& pair, const TolerancePolicy& tol = {}) {
  tol.validate();
  GeometricDefect out;
  out.W = wandering_subspace(pair, Factor::product, tol);
  out.W1 = wandering_subspace(pair, Factor::one, tol);
  out.W2 = wandering_subspace(pair, Factor::two, tol);
  out.V1W2 = forward_image(pair, Factor::one, out.W2, tol);
  out.V2W1 = forward_image(pair, Factor::two, out.W1, tol);
  const Matrix e = interior_embedding(pair);
  const Matrix first = e.adjoint() * (projector(out.W1) - projector(out.V2W1)) * e;
  const Matrix second = e.adjoint() * (projector(out.W2) - projector(out.V1W2)) * e;
  out.expression_gap = (first - second).norm();
  const double allowance =
      std::max(tol.eq_tol * (1.0 + double(pair.dim())), 10.0 * pair.adjoint_defect + tol.eq_tol);
  if (out.expression_gap > allowance)
    throw std::runtime_error("defect_geometric: the two projector expressions disagree (gap " +
                             std::to_string(out.expression_gap) + "), truncation guard too weak");
  out.interior = first;
  return out;
}

// Part of a subspace supported strictly below the top interior band (unitary
// summand included). One forward step from here is still representable, so
// statements quantified over a wandering subspace are decided on this part.
// For multiplier models whose wandering vectors sit at degree zero this is
// the whole space.
inline Subspace settled_part(const TruncatedPair& pair, const Subspace& s,
                             const TolerancePolicy& tol = {}) {
  if (s.dim() == 0) return s;
  std::vector<Index> top;
  for (Index i = 0; i < pair.dim(); ++i)
    if (pair.degrees[size_t(i)] == pair.interior_degree()) top.push_back(i);
  if (top.empty()) return s;
  Matrix rows(Index(top.size()), s.dim());
  for (size_t k = 0; k < top.size(); ++k) rows.row(Index(k)) = s.basis.row(top[k]);
  const Subspace c = kernel(rows, tol);
  return Subspace(s.ambient, s.basis * c.basis);
}

struct FringeOperator {
  Matrix matrix;   // P_{W_i} V_j restricted to W_i, in the basis of W_i
  Subspace basis;  // the wandering subspace W_i used
};

// Fringe operator F_j = P_{W_i} V_j |_{W_i} with {i, j} = {1, 2}. An empty
// W_i yields the 0x0 operator, not an error.
inline FringeOperator fringe_operator(const TruncatedPair& pair, int j,
                                      const TolerancePolicy& tol = {}) {
  if (j != 1 && j != 2) throw std::invalid_argument("fringe_operator: j must be 1 or 2");
  FringeOperator out;
  out.basis = wandering_subspace(pair, j == 2 ? Factor::one : Factor::two, tol);
  const Matrix& v = (j == 2) ? pair.V2 : pair.V1;
  if (out.basis.dim() == 0) {
    out.matrix = Matrix(0, 0);
    return out;
  }
  if (top_degree_support(pair, out.basis.basis, tol.eq_tol) > pair.max_degree - 1)
    throw std::invalid_argument("fringe_operator: wandering band touches the truncation edge");
  out.matrix = out.basis.basis.adjoint() * v * out.basis.basis;
  return out;
}

struct DefectVerdicts {
  bool nonneg = false;
  bool v2w1_in_w1 = false;
  bool doubly_commuting = false;
  bool projection = false;
  bool fringe2_isometric = false;
  bool consistent = false;

  bool all() const { return nonneg && v2w1_in_w1 && doubly_commuting && projection && fringe2_isometric; }
};

struct DefectReport {
  Matrix defect;                // interior block, geometric route
  std::vector<double> spectrum; // nondecreasing

  DefectVerdicts verdicts;
  double route_gap = 0.0;        // direct vs geometric on the interior band
  double expression_gap = 0.0;   // between the two geometric expressions
  double containment_residual = 0.0;   // ||(I - P_W1) V2|| on the settled part of W1
  double commutation_defect = 0.0;     // ||V1* V2 - V2 V1*|| on the interior
  double projection_defect = 0.0;      // ||C^2 - C||
  double fringe_defect = 0.0;          // Gram defect of F2 on the settled part of W1
  Matrix fringe1, fringe2;
  Index dim_w = 0, dim_w1 = 0, dim_w2 = 0;
  bool v1_pure_declared = false, v2_pure_declared = false;
};

// All five equivalent conditions, each decided by its own computation; the
// consistency flag records whether they agree. Values in the open band
// (-approx_tol, approx_tol) count as zero throughout.
inline DefectReport defect_verdict(const TruncatedPair& pair, const TolerancePolicy& tol = {}) {
  tol.validate();
  DefectReport rep;
  GeometricDefect geo = defect_geometric(pair, tol);
  rep.defect = geo.interior;
  rep.expression_gap = geo.expression_gap;
  rep.route_gap = (defect_direct(pair, tol) - geo.interior).norm();
  rep.spectrum = hermitian_spectrum((rep.defect + Matrix(rep.defect.adjoint())) / 2.0, tol);
  rep.dim_w = geo.W.dim();
  rep.dim_w1 = geo.W1.dim();
  rep.dim_w2 = geo.W2.dim();
  rep.v1_pure_declared = pair.v1_pure;
  rep.v2_pure_declared = pair.v2_pure;

  // (a) positivity of the interior defect.
  const double min_eig = rep.spectrum.empty() ? 0.0 : rep.spectrum.front();
  rep.verdicts.nonneg = min_eig >= -tol.approx_tol;

  // (b) V2 W1 inside W1, tested where the image stays on the trusted band.
  const Subspace w1_deep = settled_part(pair, geo.W1, tol);
  rep.containment_residual =
      w1_deep.dim() == 0
          ? 0.0
          : ((Matrix::Identity(pair.dim(), pair.dim()) - projector(geo.W1)) * pair.V2 *
             w1_deep.basis)
                .norm();
  rep.verdicts.v2w1_in_w1 = rep.containment_residual <= tol.approx_tol;

  // (c) doubly commuting: V1* V2 = V2 V1* on the interior band.
  rep.commutation_defect =
      compress_interior(pair, Matrix(pair.V1.adjoint() * pair.V2 - pair.V2 * pair.V1.adjoint()))
          .norm();
  rep.verdicts.doubly_commuting = rep.commutation_defect <= tol.approx_tol;

  // (d) the defect is a projection.
  rep.projection_defect = (rep.defect * rep.defect - rep.defect).norm();
  rep.verdicts.projection =
      rep.projection_defect <= tol.approx_tol &&
      (rep.defect - Matrix(rep.defect.adjoint())).norm() <= tol.approx_tol;

  // (e) the fringe operator F2 on W1 is an isometry, tested on the settled
  // part: its Gram matrix there must be the identity.
  FringeOperator f1 = fringe_operator(pair, 1, tol);
  FringeOperator f2 = fringe_operator(pair, 2, tol);
  rep.fringe1 = f1.matrix;
  rep.fringe2 = f2.matrix;
  const Matrix g = geo.W1.basis.adjoint() * pair.V2 * w1_deep.basis;
  rep.fringe_defect = (g.adjoint() * g - Matrix::Identity(g.cols(), g.cols())).norm();
  rep.verdicts.fringe2_isometric = rep.fringe_defect <= tol.approx_tol;

  const bool v = rep.verdicts.nonneg;
  rep.verdicts.consistent =
      rep.verdicts.v2w1_in_w1 == v && rep.verdicts.doubly_commuting == v &&
      rep.verdicts.projection == v && rep.verdicts.fringe2_isometric == v;
  return rep;
}

struct NegativityContext {
  bool some_vi_pure = false;
  bool some_dim_wj_finite = false;
};

struct NegativityResult {
  bool applicable = false;  // whether the spectrum lay in the C <= 0 band
  bool passed = false;      // if applicable: the defect vanished as required
  double max_eig = 0.0;
  double defect_norm = 0.0;
};

// A nonpositive defect must vanish outright when one factor is pure or one
// wandering space is finite-dimensional. The context records which hypothesis
// the caller certifies; without either the check is not meaningful.
inline NegativityResult negativity_check(const DefectReport& rep, const NegativityContext& ctx,
                                         const TolerancePolicy& tol = {}) {
  tol.validate();
  if (!ctx.some_vi_pure && !ctx.some_dim_wj_finite)
    throw std::invalid_argument("negativity_check: no applicable hypothesis declared");
  NegativityResult out;
  out.max_eig = rep.spectrum.empty() ? 0.0 : rep.spectrum.back();
  out.defect_norm = 0.0;
  for (double x : rep.spectrum) out.defect_norm = std::max(out.defect_norm, std::abs(x));
  out.applicable = out.max_eig <= tol.approx_tol;
  out.passed = !out.applicable || out.defect_norm <= tol.approx_tol;
  return out;
}

struct WoldContainments {
  // Largest mass a trusted shift-part vector of a factor has inside the
  // unitary summand of the product, per factor.
  double shift_residual1 = 0.0, shift_residual2 = 0.0;
  // Largest defect of a unitary-summand vector against the unitary part of a
  // factor (distance from being fixed-norm under repeated adjoints).
  double unitary_residual1 = 0.0, unitary_residual2 = 0.0;
};

// Shift/unitary part containments for a pair given as an explicit direct sum:
// the shift part of each factor lies in the shift part of the product, and the
// unitary part of the product lies in the unitary part of each factor.
inline WoldContainments wold_part_containments(const TruncatedPair& pair,
                                               const TolerancePolicy& tol = {}) {
  tol.validate();
  WoldContainments out;
  const Index d = pair.dim();
  Matrix punit = Matrix::Zero(d, d);
  for (Index i = 0; i < d; ++i)
    if (pair.degrees[size_t(i)] < 0) punit(i, i) = Complex(1.0);

  for (int j = 1; j <= 2; ++j) {
    const Matrix& v = (j == 1) ? pair.V1 : pair.V2;
    double& shift_res = (j == 1) ? out.shift_residual1 : out.shift_residual2;
    double& unit_res = (j == 1) ? out.unitary_residual1 : out.unitary_residual2;
    Subspace wj = wandering_subspace(pair, j == 1 ? Factor::one : Factor::two, tol);
    // Span of V_j^m W_j within the trusted band approximates the shift part.
    std::vector<Matrix> layers;
    Matrix cur = wj.basis;
    while (cur.cols() > 0 && top_degree_support(pair, cur, tol.eq_tol) < pair.interior_degree()) {
      layers.push_back(cur);
      cur = v * cur;
    }
    if (!layers.empty()) layers.push_back(cur);  // one more step stays <= max_degree - guard + 1
    Matrix stacked(d, 0);
    for (const Matrix& l : layers) {
      Matrix grown(d, stacked.cols() + l.cols());
      grown << stacked, l;
      stacked = grown;
    }
    for (Index c = 0; c < stacked.cols(); ++c)
      shift_res = std::max(shift_res, (punit * stacked.col(c)).norm());
    // Unitary summand of the product must be norm-preserved by V_j* forever;
    // at the model level: V_j restricted to that block is unitary.
    Matrix ub(d, pair.unitary_dim());
    Index k = 0;
    for (Index i = 0; i < d; ++i)
      if (pair.degrees[size_t(i)] < 0) ub.col(k++) = Matrix::Identity(d, d).col(i);
    if (ub.cols() > 0) {
      unit_res = std::max((v * ub).colwise().norm().maxCoeff() - 1.0,
                          1.0 - (v * ub).colwise().norm().minCoeff());
      unit_res = std::max(unit_res, ((Matrix::Identity(d, d) - punit) * v * ub).norm());
    }
  }
  return out;
}

}  // namespace isopair
