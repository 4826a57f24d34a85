#pragma once

// Restrictions of the two coordinate shifts on the bidisc Hardy space to a
// jointly invariant subspace spanned by polynomial generators, truncated by
// total degree. Monomials are the orthonormal model; forward maps are exact
// polynomial multiplication, adjoints are stabilized projections whose
// truncation gap is estimated by degree escalation and surfaced, never
// silently trusted.

#include <isopair/defect.hpp>
#include <isopair/pair_model.hpp>

#include <map>

namespace isopair {

struct BivariatePoly {
  std::map<std::pair<int, int>, Complex> terms;

  static BivariatePoly monomial(int a, int b, const Complex& c = Complex(1.0)) {
    BivariatePoly p;
    p.add_term(a, b, c);
    return p;
  }

  void add_term(int a, int b, const Complex& c) {
    if (a < 0 || b < 0) throw std::invalid_argument("BivariatePoly: negative exponent");
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw std::invalid_argument("BivariatePoly: non-finite coefficient");
    auto it = terms.find({a, b});
    if (it == terms.end()) {
      if (c != Complex(0.0)) terms[{a, b}] = c;
    } else {
      it->second += c;
      if (it->second == Complex(0.0)) terms.erase(it);
    }
  }

  int total_degree() const {
    int d = -1;
    for (const auto& [ab, c] : terms) d = std::max(d, ab.first + ab.second);
    return d;
  }

  double norm() const {
    double s = 0.0;
    for (const auto& [ab, c] : terms) s += std::norm(c);
    return std::sqrt(s);
  }

  BivariatePoly shifted(int p, int q) const {
    BivariatePoly out;
    for (const auto& [ab, c] : terms) out.add_term(ab.first + p, ab.second + q, c);
    return out;
  }

  BivariatePoly scaled(const Complex& s) const {
    BivariatePoly out;
    for (const auto& [ab, c] : terms) out.add_term(ab.first, ab.second, s * c);
    return out;
  }
};

// Enumeration of monomials z1^a z2^b with a + b <= degree, band-major:
// band d occupies indices d(d+1)/2 .. d(d+1)/2 + d, ordered by b.
struct MonomialGrid {
  int degree = 0;

  explicit MonomialGrid(int n = 0) : degree(n) {
    if (n < 0) throw std::invalid_argument("MonomialGrid: negative degree");
  }

  Index dim() const { return Index(degree + 1) * Index(degree + 2) / 2; }

  Index index(int a, int b) const {
    const int d = a + b;
    if (a < 0 || b < 0 || d > degree) throw std::invalid_argument("MonomialGrid: exponent out of range");
    return Index(d) * Index(d + 1) / 2 + Index(b);
  }

  std::pair<int, int> exponents(Index idx) const {
    int d = 0;
    while (Index(d + 1) * Index(d + 2) / 2 <= idx) ++d;
    const int b = int(idx - Index(d) * Index(d + 1) / 2);
    return {d - b, b};
  }

  int band_of(Index idx) const {
    auto [a, b] = exponents(idx);
    return a + b;
  }

  Vector embed(const BivariatePoly& p) const {
    Vector v = Vector::Zero(dim());
    for (const auto& [ab, c] : p.terms) v(index(ab.first, ab.second)) = c;
    return v;
  }

  BivariatePoly extract(const Vector& v, double drop_tol = 0.0) const {
    BivariatePoly p;
    for (Index i = 0; i < v.size(); ++i)
      if (std::abs(v(i)) > drop_tol) {
        auto [a, b] = exponents(i);
        p.add_term(a, b, v(i));
      }
    return p;
  }

  // Multiplication by z1 (var = 1) or z2 (var = 2); mass leaving the grid is
  // dropped, so callers must stay below the top band for exactness.
  Matrix mult_matrix(int var) const {
    Matrix m = Matrix::Zero(dim(), dim());
    for (Index i = 0; i < dim(); ++i) {
      auto [a, b] = exponents(i);
      const int na = var == 1 ? a + 1 : a;
      const int nb = var == 2 ? b + 1 : b;
      if (na + nb <= degree) m(index(na, nb), i) = Complex(1.0);
    }
    return m;
  }

  Vector regrid(const Vector& v, const MonomialGrid& from) const {
    Vector out = Vector::Zero(dim());
    for (Index i = 0; i < v.size(); ++i)
      if (v(i) != Complex(0.0)) {
        auto [a, b] = from.exponents(i);
        if (a + b <= degree) out(index(a, b)) = v(i);
      }
    return out;
  }
};

// Graded model of span{z1^p z2^q g_i : total degree <= N}: orthonormal basis
// assembled band by band, each column tagged with the band it entered at.
struct TruncatedSubspace {
  int degree = 0;
  int guard = 3;
  MonomialGrid grid{0};
  Matrix basis;
  std::vector<int> band;
  std::vector<BivariatePoly> generators;  // unit-normalized

  Index dim() const { return basis.cols(); }
};

inline TruncatedSubspace span_to_degree(const std::vector<BivariatePoly>& gens, int n,
                                        int guard = 3, const TolerancePolicy& tol = {}) {
  tol.validate();
  if (n < 0) throw std::invalid_argument("span_to_degree: negative degree");
  if (guard < 0) throw std::invalid_argument("span_to_degree: negative guard");
  std::vector<BivariatePoly> normalized;
  for (const BivariatePoly& g : gens)
    if (g.total_degree() >= 0) normalized.push_back(g.scaled(Complex(1.0 / g.norm())));
  if (normalized.empty()) throw std::invalid_argument("span_to_degree: no nonzero generator");

  TruncatedSubspace s;
  s.degree = n;
  s.guard = guard;
  s.grid = MonomialGrid(n);
  const Index amb = s.grid.dim();
  Matrix basis(amb, 0);
  std::vector<int> band;
  for (int d = 0; d <= n; ++d) {
    std::vector<Vector> cands;
    for (const BivariatePoly& g : normalized) {
      const int dg = g.total_degree();
      if (dg > d) continue;
      for (int p = 0; p <= d - dg; ++p) cands.push_back(s.grid.embed(g.shifted(p, d - dg - p)));
    }
    if (cands.empty()) continue;
    Matrix block(amb, Index(cands.size()));
    for (size_t k = 0; k < cands.size(); ++k) block.col(Index(k)) = cands[k];
    for (int pass = 0; pass < 2 && basis.cols() > 0; ++pass)
      block -= basis * (basis.adjoint() * block);
    Eigen::JacobiSVD<Matrix> svd(block, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    const double cut = tol.eq_tol * (1.0 + (sv.size() ? sv(0) : 0.0));
    Index keep = 0;
    while (keep < sv.size() && sv(keep) > cut) ++keep;
    if (keep > 0) {
      Matrix grown(amb, basis.cols() + keep);
      grown << basis, svd.matrixU().leftCols(keep);
      basis = std::move(grown);
      band.insert(band.end(), size_t(keep), d);
    }
  }
  s.basis = std::move(basis);
  s.band = std::move(band);
  s.generators = std::move(normalized);
  return s;
}

// Coordinates of a polynomial relative to the truncated basis.
inline Vector coordinates(const TruncatedSubspace& s, const BivariatePoly& p) {
  return s.basis.adjoint() * s.grid.embed(p);
}

struct ProjectionResult {
  BivariatePoly value;
  int stabilized_degree = 0;
  double last_delta = 0.0;
};

// Projection onto the generated subspace via degree escalation: computed
// against successive truncations until two agree, with an explicit failure
// when the escalation budget runs out. Cancellation between generator
// multiples can push components of the projection to degrees far above the
// input, which is why no single truncation is trusted.
inline ProjectionResult project_onto_S(const BivariatePoly& f, const std::vector<BivariatePoly>& gens,
                                       int n, int escalate_to = -1, int guard = 3,
                                       const TolerancePolicy& tol = {}) {
  tol.validate();
  if (escalate_to < 0) escalate_to = n + 8;
  if (f.total_degree() > n - guard)
    throw std::invalid_argument("project_onto_S: input degree exceeds the trusted band");
  auto project_at = [&](int m) {
    TruncatedSubspace s = span_to_degree(gens, m, guard, tol);
    const Vector x = s.grid.embed(f);
    return std::pair<Vector, MonomialGrid>(s.basis * (s.basis.adjoint() * x), s.grid);
  };
  auto [prev, prev_grid] = project_at(n);
  for (int m = n + 2; m <= escalate_to; m += 2) {
    auto [cur, cur_grid] = project_at(m);
    const double delta = (cur - cur_grid.regrid(prev, prev_grid)).norm();
    if (delta < tol.approx_tol) {
      ProjectionResult out;
      out.value = cur_grid.extract(cur, tol.eq_tol * (1.0 + f.norm()) * 1e-3);
      out.stabilized_degree = m;
      out.last_delta = delta;
      return out;
    }
    prev = std::move(cur);
    prev_grid = cur_grid;
  }
  throw std::runtime_error("project_onto_S: projection did not stabilize within the escalation budget");
}

// The pair of coordinate shifts compressed to the truncated subspace.
// Forward maps are exact below the top band; the adjoint truncation gap is
// estimated against a degree-escalated basis and recorded on the pair.
inline TruncatedPair restricted_pair(const TruncatedSubspace& s, const TolerancePolicy& tol = {}) {
  tol.validate();
  if (s.degree < s.guard + 2)
    throw std::invalid_argument("restricted_pair: degree too small for the guard band");
  TruncatedPair pair;
  const Matrix m1 = s.grid.mult_matrix(1);
  const Matrix m2 = s.grid.mult_matrix(2);
  pair.V1 = s.basis.adjoint() * m1 * s.basis;
  pair.V2 = s.basis.adjoint() * m2 * s.basis;
  pair.degrees = s.band;
  pair.max_degree = s.degree;
  pair.guard = s.guard;
  pair.product_pure = true;
  pair.v1_pure = true;
  pair.v2_pure = true;

  // Adjoint gap: compare this truncation's projection of adjoint images of
  // interior columns against the once-escalated one.
  TruncatedSubspace big = span_to_degree(s.generators, s.degree + 2, s.guard, tol);
  std::vector<Index> interior;
  for (Index c = 0; c < s.dim(); ++c)
    if (s.band[size_t(c)] <= s.degree - s.guard) interior.push_back(c);
  double defect = 0.0;
  for (int var : {1, 2}) {
    const Matrix adj = s.grid.mult_matrix(var).adjoint();
    for (Index c : interior) {
      const Vector a_small = adj * Vector(s.basis.col(c));
      const Vector a_big = big.grid.regrid(a_small, s.grid);
      const Vector p_small = big.grid.regrid(Vector(s.basis * (s.basis.adjoint() * a_small)), s.grid);
      const Vector p_big = big.basis * (big.basis.adjoint() * a_big);
      defect = std::max(defect, (p_big - p_small).norm());
    }
  }
  pair.adjoint_defect = defect;
  if (defect > tol.approx_tol)
    throw std::runtime_error(
        "restricted_pair: adjoint projections did not stabilize at this truncation; raise the degree");
  return pair;
}

struct SlocinskiReport {
  bool applicable = false;  // pair is doubly commuting on the trusted band
  bool defect_rank_one = false;
  bool band_growth_matches = false;
  bool passed = false;
  std::vector<Index> wandering_band_dims;  // cumulative product-wandering dims per band
};

// Structural comparison against the full bidisc Hardy shift pair, which every
// doubly commuting restriction must match: a rank-one projection defect and
// product-wandering band dimensions growing by two per degree.
inline SlocinskiReport slocinski_check(const TruncatedSubspace& s, const TolerancePolicy& tol = {}) {
  tol.validate();
  TruncatedPair pair = restricted_pair(s, tol);
  DefectReport rep = defect_verdict(pair, tol);
  SlocinskiReport out;
  out.applicable = rep.verdicts.doubly_commuting;
  if (!out.applicable) return out;

  const Index n = Index(rep.spectrum.size());
  bool rank_one = n > 0 && std::abs(rep.spectrum[size_t(n - 1)] - 1.0) <= tol.approx_tol;
  for (Index i = 0; i + 1 < n && rank_one; ++i)
    if (std::abs(rep.spectrum[size_t(i)]) > tol.approx_tol) rank_one = false;
  out.defect_rank_one = rank_one;

  const Matrix vh = (pair.V1 * pair.V2).adjoint();
  for (int d = 0; d <= pair.interior_degree(); ++d) {
    std::vector<Index> idx;
    for (Index c = 0; c < pair.dim(); ++c)
      if (pair.degrees[size_t(c)] <= d) idx.push_back(c);
    if (idx.empty()) {
      out.wandering_band_dims.push_back(0);
      continue;
    }
    Matrix e = Matrix::Zero(pair.dim(), Index(idx.size()));
    for (size_t k = 0; k < idx.size(); ++k) e(idx[k], Index(k)) = Complex(1.0);
    out.wandering_band_dims.push_back(kernel(Matrix(vh * e), tol).dim());
  }
  // Reference signature of the full bidisc shift pair: one seed vector, then
  // two new wandering directions per degree.
  int first = -1;
  for (size_t d = 0; d < out.wandering_band_dims.size(); ++d)
    if (out.wandering_band_dims[d] > 0) {
      first = int(d);
      break;
    }
  bool growth = first >= 0 && out.wandering_band_dims[size_t(first)] == 1;
  for (size_t d = size_t(first) + 1; growth && d < out.wandering_band_dims.size(); ++d)
    if (out.wandering_band_dims[d] - out.wandering_band_dims[d - 1] != 2) growth = false;
  out.band_growth_matches = growth;
  out.passed = out.defect_rank_one && out.band_growth_matches;
  return out;
}

}  // namespace isopair
