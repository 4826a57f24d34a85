#pragma once

// The multiplier model for a commuting pair of isometries with pure product:
// a unitary U and an orthogonal projection P on C^n generate
//   Phi1(z) = U*(P + z P^perp),   Phi2(z) = (P^perp + z P) U,
// and (M_Phi1, M_Phi2) on H^2 ⊗ C^n is the model pair, with
// M_Phi1 M_Phi2 = M_z. This header builds the symbols, recovers the wandering
// geometry and the generating data back from a pair, and provides the seeded
// instance generator.

#include <isopair/hardy.hpp>

#include <cstdint>

namespace isopair {

struct BCLData {
  Index dim = 0;
  Matrix U;
  Matrix P;

  void validate(const TolerancePolicy& tol = {}) const {
    tol.validate();
    if (U.rows() != dim || U.cols() != dim || P.rows() != dim || P.cols() != dim)
      throw std::invalid_argument("BCLData: matrix shape mismatch");
    if (!finite_entries(U) || !finite_entries(P))
      throw std::invalid_argument("BCLData: non-finite entry");
    if (!operator_class(U, tol).unitary) throw std::invalid_argument("BCLData: U is not unitary");
    if (!operator_class(P, tol).projection)
      throw std::invalid_argument("BCLData: P is not an orthogonal projection");
  }
};

struct BCLPair {
  PolySymbol phi1;
  PolySymbol phi2;
};

// Degree-1 inner symbols multiplying to z in both orders; throws otherwise.
inline void validate_pair(const BCLPair& pair, const TolerancePolicy& tol = {}) {
  tol.validate();
  if (pair.phi1.dim != pair.phi2.dim) throw std::invalid_argument("BCLPair: dimension mismatch");
  if (pair.phi1.degree() > 1 || pair.phi2.degree() > 1)
    throw std::invalid_argument("BCLPair: symbols must have degree <= 1");
  if (!symbol_is_inner(pair.phi1, tol) || !symbol_is_inner(pair.phi2, tol))
    throw std::invalid_argument("BCLPair: symbols must be inner");
  const PolySymbol z = symbol_z_power(pair.phi1.dim, 1);
  const PolySymbol p12 = symbol_product(pair.phi1, pair.phi2);
  const PolySymbol p21 = symbol_product(pair.phi2, pair.phi1);
  for (int m = 0; m <= 2; ++m) {
    if ((p12.at(m) - z.at(m)).norm() > tol.eq_tol * (1.0 + double(pair.phi1.dim)) ||
        (p21.at(m) - z.at(m)).norm() > tol.eq_tol * (1.0 + double(pair.phi1.dim)))
      throw std::invalid_argument("BCLPair: symbol product is not z in both orders");
  }
}

inline BCLPair build_multipliers(const BCLData& data, const TolerancePolicy& tol = {}) {
  data.validate(tol);
  const Matrix perp = Matrix::Identity(data.dim, data.dim) - data.P;
  BCLPair pair;
  pair.phi1 = PolySymbol(data.dim, {data.U.adjoint() * data.P, data.U.adjoint() * perp});
  pair.phi2 = PolySymbol(data.dim, {perp * data.U, data.P * data.U});
  validate_pair(pair, tol);
  return pair;
}

// Structural purity of the two multipliers. The compression of M_Phi* to each
// coefficient slot has the same diagonal block at every degree, so the powers
// M_Phi*^m die out iff that block has spectral radius < 1; this decides purity
// from the generating data alone, with no truncation involved.
struct PurityFlags {
  bool v1 = false;
  bool v2 = false;
  double radius1 = 1.0;  // spectral radius of P U
  double radius2 = 1.0;  // spectral radius of U* P^perp
};

inline PurityFlags declared_purity(const BCLData& data, const TolerancePolicy& tol = {}) {
  tol.validate();
  PurityFlags f;
  if (data.dim == 0) {
    f.v1 = f.v2 = true;
    f.radius1 = f.radius2 = 0.0;
    return f;
  }
  const Matrix perp = Matrix::Identity(data.dim, data.dim) - data.P;
  Eigen::ComplexEigenSolver<Matrix> e1(data.P * data.U, false);
  Eigen::ComplexEigenSolver<Matrix> e2(data.U.adjoint() * perp, false);
  f.radius1 = e1.eigenvalues().cwiseAbs().maxCoeff();
  f.radius2 = e2.eigenvalues().cwiseAbs().maxCoeff();
  f.v1 = f.radius1 < 1.0 - tol.approx_tol;
  f.v2 = f.radius2 < 1.0 - tol.approx_tol;
  return f;
}

// Wandering geometry of a model pair, carried on the constant fiber C^n:
// W = C^n splits as W1 ⊕ V1 W2 and as V2 W1 ⊕ W2, and the exchange map
// eta1 + V1 eta2 -> V2 eta1 + eta2 is the unitary that regenerates the pair.
struct WanderingData {
  Subspace W;
  Subspace W1, W2;
  Subspace V1W2, V2W1;
  Matrix U;  // the exchange unitary on C^n
};

inline WanderingData wandering_data_of_pair(const BCLPair& pair, const TolerancePolicy& tol = {}) {
  validate_pair(pair, tol);
  const Index n = pair.phi1.dim;
  const Matrix a0 = pair.phi1.at(0), a1 = pair.phi1.at(1);
  const Matrix c0 = pair.phi2.at(0), c1 = pair.phi2.at(1);
  WanderingData wd;
  wd.W = Subspace(n, Matrix::Identity(n, n));
  wd.W1 = kernel(a0.adjoint(), tol);
  wd.W2 = kernel(c0.adjoint(), tol);
  // V1 and V2 send the opposite wandering space into constants: the degree-1
  // parts must vanish there.
  if ((a1 * wd.W2.basis).norm() > tol.eq_tol * (1.0 + std::sqrt(double(n))) ||
      (c1 * wd.W1.basis).norm() > tol.eq_tol * (1.0 + std::sqrt(double(n))))
    throw std::runtime_error("wandering_data_of_pair: image of opposite wandering space leaves the constant fiber");
  wd.V1W2 = image(a0 * wd.W2.basis, tol);
  wd.V2W1 = image(c0 * wd.W1.basis, tol);
  const Matrix id = Matrix::Identity(n, n);
  if ((projector(wd.W1) + projector(wd.V1W2) - id).norm() > tol.eq_tol * (1.0 + double(n)) ||
      (projector(wd.V2W1) + projector(wd.W2) - id).norm() > tol.eq_tol * (1.0 + double(n)))
    throw std::runtime_error("wandering_data_of_pair: wandering decomposition is not a direct sum");
  // Exchange unitary: on W1 act by V2, on V1 W2 invert V1.
  wd.U = c0 * projector(wd.W1) + wd.W2.basis * (a0 * wd.W2.basis).adjoint();
  if (!operator_class(wd.U, tol).unitary)
    throw std::runtime_error("wandering_data_of_pair: exchange map failed to be unitary");
  return wd;
}

// Degree-0/1 coefficients of both symbols reconstructed from the wandering
// geometry: Phi1 = (V1 P_{W2}) + z (V2* P_{V2 W1}), and dually for Phi2. The
// reconstruction uses only multiplier applications and the subspaces, then is
// checked against the pair's own coefficients.
struct PairCoefficients {
  Matrix A, B;  // Phi1 = A + B z
  Matrix C, D;  // Phi2 = C + D z
  double mismatch = 0.0;
};

inline PairCoefficients coefficients_from_geometry(const WanderingData& wd, const BCLPair& pair,
                                               const TolerancePolicy& tol = {}) {
  tol.validate();
  const Index n = pair.phi1.dim;
  PairCoefficients out;
  out.A = Matrix::Zero(n, n);
  out.B = Matrix::Zero(n, n);
  out.C = Matrix::Zero(n, n);
  out.D = Matrix::Zero(n, n);
  const Matrix pw1 = projector(wd.W1), pw2 = projector(wd.W2);
  const Matrix pv1w2 = projector(wd.V1W2), pv2w1 = projector(wd.V2W1);
  for (Index k = 0; k < n; ++k) {
    GradedVector ek(n);
    Vector e = Vector::Zero(n);
    e(k) = Complex(1.0);
    // Phi1 constant coefficient: push the W2 component through V1.
    ek.set_coeff(0, pw2 * e);
    GradedVector f = mult_apply(pair.phi1, ek);
    if (f.coeff(1).norm() > tol.eq_tol)
      throw std::runtime_error("coefficients_from_geometry: V1 leaks out of the constant fiber on W2");
    out.A.col(k) = f.coeff(0);
    // Phi1 degree-1 coefficient: pull the V2 W1 component back through V2*.
    ek.set_coeff(0, pv2w1 * e);
    out.B.col(k) = mult_adjoint_apply(pair.phi2, ek).coeff(0);
    // Dual pair.
    ek.set_coeff(0, pw1 * e);
    f = mult_apply(pair.phi2, ek);
    if (f.coeff(1).norm() > tol.eq_tol)
      throw std::runtime_error("coefficients_from_geometry: V2 leaks out of the constant fiber on W1");
    out.C.col(k) = f.coeff(0);
    ek.set_coeff(0, pv1w2 * e);
    out.D.col(k) = mult_adjoint_apply(pair.phi1, ek).coeff(0);
  }
  out.mismatch = std::max({(out.A - pair.phi1.at(0)).norm(), (out.B - pair.phi1.at(1)).norm(),
                           (out.C - pair.phi2.at(0)).norm(), (out.D - pair.phi2.at(1)).norm()});
  if (out.mismatch > tol.eq_tol * (1.0 + double(n)))
    throw std::runtime_error("coefficients_from_geometry: reconstructed coefficients disagree with the pair");
  return out;
}

// Same coefficients from the exchange unitary and P_{W2} alone:
// Phi1 = U*(P + z P^perp), Phi2 = (P^perp + z P) U with P = P_{W2}.
inline PairCoefficients coefficients_from_exchange(const WanderingData& wd) {
  const Index n = wd.W.ambient;
  const Matrix p = projector(wd.W2);
  const Matrix perp = Matrix::Identity(n, n) - p;
  PairCoefficients out;
  out.A = wd.U.adjoint() * p;
  out.B = wd.U.adjoint() * perp;
  out.C = perp * wd.U;
  out.D = p * wd.U;
  return out;
}

// Wandering coefficients of h for the product isometry V = M_Phi1 M_Phi2,
// whose wandering subspace is exactly the constant fiber.
inline WoldExpansion wold_coefficients(const BCLPair& pair, const GradedVector& h,
                                       const TolerancePolicy& tol = {}) {
  validate_pair(pair, tol);
  const Index n = pair.phi1.dim;
  ShiftModel v;
  v.apply = [pair](const GradedVector& f) { return mult_apply(pair.phi1, mult_apply(pair.phi2, f)); };
  v.apply_adjoint = [pair](const GradedVector& f) {
    return mult_adjoint_apply(pair.phi2, mult_adjoint_apply(pair.phi1, f));
  };
  for (Index i = 0; i < n; ++i) {
    GradedVector w(n);
    Vector e = Vector::Zero(n);
    e(i) = Complex(1.0);
    w.set_coeff(0, e);
    v.wandering.push_back(w);
  }
  WoldExpansion out = wold_expand(v, h, h.degree() + 1, tol);
  if (out.reconstruction_residual > tol.eq_tol * (1.0 + h.norm()))
    throw std::runtime_error("wold_coefficients: expansion does not reconstruct the input");
  return out;
}

// Recover generating data from a model pair. The basis of the constant fiber
// is kept as the ambient coordinate basis, so on a pair built from (U, P)
// this returns (U, P) on the nose.
inline BCLData extract_bcl(const BCLPair& pair, const TolerancePolicy& tol = {}) {
  WanderingData wd = wandering_data_of_pair(pair, tol);
  BCLData data;
  data.dim = pair.phi1.dim;
  data.U = wd.U;
  data.P = projector(wd.W2);
  data.validate(tol);
  return data;
}

// Deterministic pseudo-random instances. Gaussians come from a hand-rolled
// Box-Muller over a 64-bit LCG-seeded mt19937_64 so that identical seeds give
// identical matrices on every platform.
class SeededGaussian {
 public:
  explicit SeededGaussian(std::uint64_t seed) : state_(seed * 0x9E3779B97F4A7C15ULL + 1) {}

  double uniform() {
    state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
    std::uint64_t x = state_;
    x ^= x >> 33;
    x *= 0xFF51AFD7ED558CCDULL;
    x ^= x >> 33;
    return double(x >> 11) * 0x1.0p-53;
  }

  double gaussian() {
    if (have_) {
      have_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    have_ = true;
    spare_ = r * std::sin(2.0 * M_PI * u2);
    return r * std::cos(2.0 * M_PI * u2);
  }

  Matrix gaussian_matrix(Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) m(i, j) = Complex(gaussian(), gaussian());
    return m;
  }

 private:
  std::uint64_t state_;
  bool have_ = false;
  double spare_ = 0.0;
};

// QR of a complex Gaussian with the R diagonal rephased: Haar-distributed
// and deterministic for a fixed seed.
inline Matrix haar_unitary(Index n, SeededGaussian& rng) {
  if (n == 0) return Matrix(0, 0);
  Matrix g = rng.gaussian_matrix(n, n);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  Vector phase(n);
  for (Index i = 0; i < n; ++i) {
    const Complex d = r(i, i);
    phase(i) = (std::abs(d) > 0.0) ? d / std::abs(d) : Complex(1.0);
  }
  return q * phase.asDiagonal();
}

inline BCLData random_bcl(Index dim, Index rank, std::uint64_t seed) {
  if (dim < 0 || rank < 0 || rank > dim)
    throw std::invalid_argument("random_bcl: need 0 <= rank <= dim");
  SeededGaussian rng(seed);
  BCLData data;
  data.dim = dim;
  data.U = haar_unitary(dim, rng);
  Matrix z = haar_unitary(dim, rng);
  Matrix sel = Matrix::Zero(dim, dim);
  for (Index i = 0; i < rank; ++i) sel(i, i) = Complex(1.0);
  data.P = z * sel * z.adjoint();
  // Symmetrize away rounding so the projection test is comfortably met.
  data.P = (data.P + Matrix(data.P.adjoint())) / 2.0;
  return data;
}

}  // namespace isopair
