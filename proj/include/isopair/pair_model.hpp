#pragma once

// Finite truncation of a commuting isometric pair. The model is a graded
// coordinate space (degree label per basis index) plus an optional exact
// unitary summand, with the two forward maps stored as compressed matrices.
// Compressions of adjoints equal matrix adjoints, and since each forward map
// raises degree by at most one, products of compressions are exact on the
// interior band (degrees <= max_degree - guard). Everything downstream reads
// only that band.

#include <isopair/bcl.hpp>

namespace isopair {

struct TruncatedPair {
  Matrix V1, V2;
  // Degree label per basis index; -1 marks indices of the exact unitary
  // summand, which is always trusted.
  std::vector<int> degrees;
  int max_degree = 0;
  int guard = 1;
  bool product_pure = true;  // declared: graded-part product is a pure shift
  bool v1_pure = false;
  bool v2_pure = false;
  // Certified bound on the compression error of one adjoint application
  // (zero for multiplier models, where adjoints never raise degree).
  double adjoint_defect = 0.0;

  Index dim() const { return V1.rows(); }
  Index unitary_dim() const {
    Index c = 0;
    for (int d : degrees)
      if (d < 0) ++c;
    return c;
  }
  int interior_degree() const { return max_degree - guard; }
  bool is_interior(Index i) const {
    return degrees[size_t(i)] < 0 || degrees[size_t(i)] <= interior_degree();
  }
};

// Selection matrix embedding the interior band (plus unitary summand).
inline Matrix interior_embedding(const TruncatedPair& pair) {
  std::vector<Index> idx;
  for (Index i = 0; i < pair.dim(); ++i)
    if (pair.is_interior(i)) idx.push_back(i);
  Matrix e = Matrix::Zero(pair.dim(), Index(idx.size()));
  for (size_t k = 0; k < idx.size(); ++k) e(idx[k], Index(k)) = Complex(1.0);
  return e;
}

inline Matrix compress_interior(const TruncatedPair& pair, const Matrix& op) {
  const Matrix e = interior_embedding(pair);
  return e.adjoint() * op * e;
}

// Highest degree label carrying mass above tol in any column; -1 if none.
inline int top_degree_support(const TruncatedPair& pair, const Matrix& cols, double tol) {
  int top = -1;
  for (Index i = 0; i < pair.dim(); ++i) {
    if (pair.degrees[size_t(i)] < 0) continue;
    if (cols.row(i).norm() > tol) top = std::max(top, pair.degrees[size_t(i)]);
  }
  return top;
}

enum class Factor { one, two, product };

inline Matrix factor_matrix(const TruncatedPair& pair, Factor f) {
  switch (f) {
    case Factor::one:
      return pair.V1;
    case Factor::two:
      return pair.V2;
    default:
      return pair.V1 * pair.V2;
  }
}

// Wandering subspace of a factor on the trusted band: kernel of the adjoint
// restricted to interior inputs. For multiplier models the adjoint is exact,
// so this is a genuine slice of ker V*.
inline Subspace wandering_subspace(const TruncatedPair& pair, Factor f,
                                   const TolerancePolicy& tol = {}) {
  tol.validate();
  const Matrix e = interior_embedding(pair);
  const Matrix v = factor_matrix(pair, f);
  Subspace k = kernel(Matrix(v.adjoint() * e), tol);
  return Subspace(pair.dim(), e * k.basis);
}

// Image of a subspace under a forward map. Demands one degree of headroom so
// the compressed product is exact.
inline Subspace forward_image(const TruncatedPair& pair, Factor f, const Subspace& s,
                              const TolerancePolicy& tol = {}) {
  const int top = top_degree_support(pair, s.basis, tol.eq_tol);
  const int steps = (f == Factor::product) ? 2 : 1;
  if (top > pair.max_degree - steps)
    throw std::invalid_argument("forward_image: input support too close to the truncation edge");
  return image(factor_matrix(pair, f) * s.basis, tol);
}

// Pack/unpack between graded coefficient vectors on C^fiber and the flat
// coordinates of a multiplier-model truncation (index = degree * fiber + k).
inline Vector pack_graded(const GradedVector& f, int max_degree) {
  const Index n = f.dim;
  Vector x = Vector::Zero(n * Index(max_degree + 1));
  for (int m = 0; m <= std::min(f.degree(), max_degree); ++m) x.segment(Index(m) * n, n) = f.coeff(m);
  return x;
}

inline GradedVector unpack_graded(const Vector& x, Index fiber, int max_degree) {
  GradedVector f(fiber);
  for (int m = 0; m <= max_degree; ++m) {
    Vector c = x.segment(Index(m) * fiber, fiber);
    if (c.norm() > 0.0) f.set_coeff(m, c);
  }
  return f;
}

// Truncation of the multiplier pair generated by (U, P) to degrees
// <= max_degree. Exact: adjoint compressions introduce no error, so guard 1
// suffices for every interior computation.
inline TruncatedPair bcl_truncated_pair(const BCLData& data, int max_degree,
                                        const TolerancePolicy& tol = {}) {
  if (max_degree < 1) throw std::invalid_argument("bcl_truncated_pair: max_degree must be >= 1");
  const BCLPair symbols = build_multipliers(data, tol);
  const Index n = data.dim;
  const Index dim = n * Index(max_degree + 1);
  TruncatedPair pair;
  pair.V1 = Matrix::Zero(dim, dim);
  pair.V2 = Matrix::Zero(dim, dim);
  for (int d = 0; d <= max_degree; ++d) {
    pair.V1.block(Index(d) * n, Index(d) * n, n, n) = symbols.phi1.at(0);
    pair.V2.block(Index(d) * n, Index(d) * n, n, n) = symbols.phi2.at(0);
    if (d + 1 <= max_degree) {
      pair.V1.block(Index(d + 1) * n, Index(d) * n, n, n) = symbols.phi1.at(1);
      pair.V2.block(Index(d + 1) * n, Index(d) * n, n, n) = symbols.phi2.at(1);
    }
    for (Index k = 0; k < n; ++k) pair.degrees.push_back(d);
  }
  pair.max_degree = max_degree;
  pair.guard = 1;
  pair.product_pure = true;
  const PurityFlags purity = declared_purity(data, tol);
  pair.v1_pure = purity.v1;
  pair.v2_pure = purity.v2;
  return pair;
}

// A pair of commuting unitaries as an exact model with no graded part.
inline TruncatedPair unitary_truncated_pair(const Matrix& u1, const Matrix& u2,
                                            const TolerancePolicy& tol = {}) {
  tol.validate();
  if (u1.rows() != u1.cols() || u2.rows() != u2.cols() || u1.rows() != u2.rows())
    throw std::invalid_argument("unitary_truncated_pair: shape mismatch");
  if (!operator_class(u1, tol).unitary || !operator_class(u2, tol).unitary)
    throw std::invalid_argument("unitary_truncated_pair: factors must be unitary");
  if ((u1 * u2 - u2 * u1).norm() > tol.eq_tol * (1.0 + u1.norm() * u2.norm()))
    throw std::invalid_argument("unitary_truncated_pair: factors must commute");
  TruncatedPair pair;
  pair.V1 = u1;
  pair.V2 = u2;
  pair.degrees.assign(size_t(u1.rows()), -1);
  pair.max_degree = 0;
  pair.guard = 0;
  pair.product_pure = false;
  pair.v1_pure = pair.v2_pure = false;
  return pair;
}

// Block direct sum. Purity survives only if both summands have it, and any
// unitary summand kills product purity.
inline TruncatedPair direct_sum_pair(const TruncatedPair& a, const TruncatedPair& b) {
  TruncatedPair pair;
  const Index da = a.dim(), db = b.dim();
  pair.V1 = Matrix::Zero(da + db, da + db);
  pair.V2 = Matrix::Zero(da + db, da + db);
  pair.V1.topLeftCorner(da, da) = a.V1;
  pair.V1.bottomRightCorner(db, db) = b.V1;
  pair.V2.topLeftCorner(da, da) = a.V2;
  pair.V2.bottomRightCorner(db, db) = b.V2;
  pair.degrees = a.degrees;
  pair.degrees.insert(pair.degrees.end(), b.degrees.begin(), b.degrees.end());
  pair.max_degree = std::max(a.max_degree, b.max_degree);
  // The merged trusted band is the smallest interior any graded summand
  // certifies; purely unitary summands do not constrain it.
  int interior = pair.max_degree;
  const bool a_graded = a.unitary_dim() < a.dim(), b_graded = b.unitary_dim() < b.dim();
  if (a_graded) interior = std::min(interior, a.max_degree - a.guard);
  if (b_graded) interior = std::min(interior, b.max_degree - b.guard);
  pair.guard = (a_graded || b_graded) ? pair.max_degree - interior : 0;
  pair.product_pure = a.product_pure && b.product_pure && a.unitary_dim() + b.unitary_dim() == 0;
  pair.v1_pure = a.v1_pure && b.v1_pure && a.unitary_dim() + b.unitary_dim() == 0;
  pair.v2_pure = a.v2_pure && b.v2_pure && a.unitary_dim() + b.unitary_dim() == 0;
  pair.adjoint_defect = std::max(a.adjoint_defect, b.adjoint_defect);
  return pair;
}

// Commutation health of the compression itself, measured on the interior.
inline double commutation_residual(const TruncatedPair& pair) {
  return compress_interior(pair, pair.V1 * pair.V2 - pair.V2 * pair.V1).norm();
}

// Doubly commuting random instances: U built to commute with P by rotating
// within ran P and ker P separately.
inline BCLData random_bcl_doubly_commuting(Index dim, Index rank, std::uint64_t seed) {
  if (dim < 0 || rank < 0 || rank > dim)
    throw std::invalid_argument("random_bcl_doubly_commuting: need 0 <= rank <= dim");
  SeededGaussian rng(seed ^ 0xD1B54A32D192ED03ULL);
  Matrix z = haar_unitary(dim, rng);
  Matrix ua = haar_unitary(rank, rng);
  Matrix ub = haar_unitary(dim - rank, rng);
  Matrix blocks = Matrix::Zero(dim, dim);
  blocks.topLeftCorner(rank, rank) = ua;
  blocks.bottomRightCorner(dim - rank, dim - rank) = ub;
  Matrix sel = Matrix::Zero(dim, dim);
  for (Index i = 0; i < rank; ++i) sel(i, i) = Complex(1.0);
  BCLData data;
  data.dim = dim;
  data.U = z * blocks * z.adjoint();
  data.P = z * sel * z.adjoint();
  data.P = (data.P + Matrix(data.P.adjoint())) / 2.0;
  return data;
}

}  // namespace isopair
