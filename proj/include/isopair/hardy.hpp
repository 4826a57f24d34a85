#pragma once

// Vector-valued Hardy space machinery at finite truncation: graded coefficient
// vectors, matrix polynomial symbols acting as multipliers, Szego kernel
// vectors, and Taylor-coefficient extraction for operators commuting with a
// shift. Multiplier arithmetic on polynomials is exact; truncation enters only
// through kernel vectors and declared series cutoffs.

#include <isopair/linalg.hpp>

#include <functional>
#include <utility>

namespace isopair {

// Coefficient list f_0..f_d of a polynomial in H^2 ⊗ C^dim. Normal form has
// no trailing zero coefficients, so degree() is honest; the zero vector has
// degree -1.
struct GradedVector {
  Index dim = 0;
  std::vector<Vector> coeffs;

  GradedVector() = default;
  explicit GradedVector(Index d) : dim(d) {}
  GradedVector(Index d, std::vector<Vector> c) : dim(d), coeffs(std::move(c)) {
    for (const auto& v : coeffs)
      if (v.size() != dim) throw std::invalid_argument("GradedVector: coefficient size mismatch");
    trim();
  }

  int degree() const { return int(coeffs.size()) - 1; }

  Vector coeff(int m) const {
    if (m < 0 || m >= int(coeffs.size())) return Vector::Zero(dim);
    return coeffs[size_t(m)];
  }

  void set_coeff(int m, const Vector& v) {
    if (v.size() != dim) throw std::invalid_argument("GradedVector: coefficient size mismatch");
    if (m < 0) throw std::invalid_argument("GradedVector: negative degree");
    if (m >= int(coeffs.size())) coeffs.resize(size_t(m) + 1, Vector::Zero(dim));
    coeffs[size_t(m)] = v;
    trim();
  }

  void trim() {
    while (!coeffs.empty() && coeffs.back().norm() == 0.0) coeffs.pop_back();
  }

  double norm() const {
    double s = 0.0;
    for (const auto& v : coeffs) s += v.squaredNorm();
    return std::sqrt(s);
  }
};

inline Complex graded_inner(const GradedVector& f, const GradedVector& g) {
  if (f.dim != g.dim) throw std::invalid_argument("graded_inner: dimension mismatch");
  Complex s(0.0, 0.0);
  const int d = std::min(f.degree(), g.degree());
  for (int m = 0; m <= d; ++m) s += f.coeffs[size_t(m)].dot(g.coeffs[size_t(m)]);
  return s;
}

inline GradedVector graded_axpy(const Complex& a, const GradedVector& x, const GradedVector& y) {
  if (x.dim != y.dim) throw std::invalid_argument("graded_axpy: dimension mismatch");
  GradedVector out(x.dim);
  const int d = std::max(x.degree(), y.degree());
  out.coeffs.resize(size_t(d + 1), Vector::Zero(x.dim));
  for (int m = 0; m <= d; ++m) out.coeffs[size_t(m)] = a * x.coeff(m) + y.coeff(m);
  out.trim();
  return out;
}

// Matrix polynomial Phi(z) = A_0 + A_1 z + ... + A_d z^d with square
// coefficients. Normal form keeps A_d nonzero unless the symbol is constant.
struct PolySymbol {
  Index dim = 0;
  std::vector<Matrix> mats;

  PolySymbol() = default;
  PolySymbol(Index d, std::vector<Matrix> m) : dim(d), mats(std::move(m)) {
    if (mats.empty()) mats.push_back(Matrix::Zero(dim, dim));
    for (const auto& a : mats)
      if (a.rows() != dim || a.cols() != dim)
        throw std::invalid_argument("PolySymbol: coefficient shape mismatch");
    trim();
  }

  int degree() const { return int(mats.size()) - 1; }

  Matrix at(int m) const {
    if (m < 0 || m >= int(mats.size())) return Matrix::Zero(dim, dim);
    return mats[size_t(m)];
  }

  void trim() {
    while (mats.size() > 1 && mats.back().norm() == 0.0) mats.pop_back();
  }

  Matrix eval(const Complex& z) const {
    Matrix acc = Matrix::Zero(dim, dim);
    for (size_t m = mats.size(); m-- > 0;) acc = acc * z + mats[m];
    return acc;
  }
};

// (Phi f)_n = sum_k A_k f_{n-k}; exact, degree grows by deg Phi.
inline GradedVector mult_apply(const PolySymbol& phi, const GradedVector& f) {
  if (phi.dim != f.dim) throw std::invalid_argument("mult_apply: dimension mismatch");
  GradedVector out(f.dim);
  if (f.degree() < 0) return out;
  const int dout = f.degree() + phi.degree();
  out.coeffs.assign(size_t(dout + 1), Vector::Zero(f.dim));
  for (int n = 0; n <= f.degree(); ++n)
    for (int k = 0; k <= phi.degree(); ++k)
      out.coeffs[size_t(n + k)] += phi.mats[size_t(k)] * f.coeffs[size_t(n)];
  out.trim();
  return out;
}

// (Phi* f)_n = sum_k A_k^H f_{n+k}; the Toeplitz adjoint, degree never grows.
inline GradedVector mult_adjoint_apply(const PolySymbol& phi, const GradedVector& f) {
  if (phi.dim != f.dim) throw std::invalid_argument("mult_adjoint_apply: dimension mismatch");
  GradedVector out(f.dim);
  if (f.degree() < 0) return out;
  out.coeffs.assign(size_t(f.degree()) + 1, Vector::Zero(f.dim));
  for (int n = 0; n <= f.degree(); ++n) {
    Vector acc = Vector::Zero(f.dim);
    for (int k = 0; k <= phi.degree() && n + k <= f.degree(); ++k)
      acc += phi.mats[size_t(k)].adjoint() * f.coeffs[size_t(n + k)];
    out.coeffs[size_t(n)] = acc;
  }
  out.trim();
  return out;
}

inline PolySymbol symbol_product(const PolySymbol& a, const PolySymbol& b) {
  if (a.dim != b.dim) throw std::invalid_argument("symbol_product: dimension mismatch");
  std::vector<Matrix> out(size_t(a.degree() + b.degree()) + 1, Matrix::Zero(a.dim, a.dim));
  for (int i = 0; i <= a.degree(); ++i)
    for (int j = 0; j <= b.degree(); ++j) out[size_t(i + j)] += a.mats[size_t(i)] * b.mats[size_t(j)];
  return PolySymbol(a.dim, std::move(out));
}

inline PolySymbol symbol_scale(const Complex& c, const PolySymbol& a) {
  std::vector<Matrix> out = a.mats;
  for (auto& m : out) m *= c;
  return PolySymbol(a.dim, std::move(out));
}

// z^k * identity symbol.
inline PolySymbol symbol_z_power(Index dim, int k) {
  std::vector<Matrix> out(size_t(k) + 1, Matrix::Zero(dim, dim));
  out.back() = Matrix::Identity(dim, dim);
  return PolySymbol(dim, std::move(out));
}

// Inner test. Degree <= 1 admits the exact algebraic criterion
// A0^H A0 + A1^H A1 = I, A0^H A1 = 0; higher degrees fall back to unitarity
// of Phi at equispaced boundary samples.
inline bool symbol_is_inner(const PolySymbol& phi, const TolerancePolicy& tol = {},
                            int boundary_samples = 64) {
  tol.validate();
  const Index n = phi.dim;
  if (phi.degree() <= 1) {
    const Matrix a0 = phi.at(0), a1 = phi.at(1);
    const double scale = 1.0 + a0.norm() + a1.norm();
    const double r1 = (a0.adjoint() * a0 + a1.adjoint() * a1 - Matrix::Identity(n, n)).norm();
    const double r2 = (a0.adjoint() * a1).norm();
    return r1 <= tol.eq_tol * scale && r2 <= tol.eq_tol * scale;
  }
  for (int s = 0; s < boundary_samples; ++s) {
    const double th = 2.0 * M_PI * double(s) / double(boundary_samples);
    const Matrix v = phi.eval(Complex(std::cos(th), std::sin(th)));
    if ((v.adjoint() * v - Matrix::Identity(n, n)).norm() > tol.approx_tol * (1.0 + v.norm()))
      return false;
  }
  return true;
}

// Szego kernel direction S(., w) eta, |w| < 1.
struct KernelVector {
  Complex w;
  Vector eta;
  int truncation = 0;
};

struct TruncatedKernel {
  GradedVector vec;
  double tail_bound = 0.0;  // l2 norm of the dropped tail, exactly summable
};

inline TruncatedKernel kernel_vector_truncate(const KernelVector& k) {
  const double aw = std::abs(k.w);
  if (!(aw < 1.0)) throw std::invalid_argument("kernel_vector_truncate: |w| must be < 1");
  if (k.truncation < 0) throw std::invalid_argument("kernel_vector_truncate: negative truncation");
  GradedVector out(k.eta.size());
  out.coeffs.resize(size_t(k.truncation) + 1);
  Complex pw(1.0, 0.0);
  for (int m = 0; m <= k.truncation; ++m) {
    out.coeffs[size_t(m)] = pw * k.eta;
    pw *= std::conj(k.w);
  }
  out.trim();
  TruncatedKernel res;
  res.vec = std::move(out);
  res.tail_bound = std::pow(aw, k.truncation + 1) / std::sqrt(1.0 - aw * aw) * k.eta.norm();
  return res;
}

// Black-box isometry on a graded model, together with an orthonormal basis of
// its wandering subspace W = ker V*. This is the access needed to read off
// Taylor coefficients of operators in the commutant.
using GradedOp = std::function<GradedVector(const GradedVector&)>;

struct ShiftModel {
  GradedOp apply;
  GradedOp apply_adjoint;
  std::vector<GradedVector> wandering;
};

inline void check_wandering_basis(const ShiftModel& v, const TolerancePolicy& tol) {
  for (size_t i = 0; i < v.wandering.size(); ++i) {
    if (v.apply_adjoint(v.wandering[i]).norm() > tol.eq_tol)
      throw std::invalid_argument("wandering basis vector not annihilated by the adjoint");
    for (size_t j = 0; j <= i; ++j) {
      const Complex g = graded_inner(v.wandering[j], v.wandering[i]);
      const Complex want = (i == j) ? Complex(1.0) : Complex(0.0);
      if (std::abs(g - want) > tol.eq_tol)
        throw std::invalid_argument("wandering basis not orthonormal");
    }
  }
}

// Taylor coefficients Theta_m = P_W V*^m C|_W of a black-box operator C,
// m = 0..degree, expressed in the supplied wandering basis. When C commutes
// with V these are the coefficients of its multiplier symbol.
inline PolySymbol taylor_extract(const ShiftModel& v, const GradedOp& c, int degree,
                                 const TolerancePolicy& tol = {}) {
  tol.validate();
  if (degree < 0) throw std::invalid_argument("taylor_extract: negative degree");
  check_wandering_basis(v, tol);
  const Index dw = Index(v.wandering.size());
  std::vector<Matrix> theta(size_t(degree) + 1, Matrix::Zero(dw, dw));
  for (Index i = 0; i < dw; ++i) {
    GradedVector g = c(v.wandering[size_t(i)]);
    for (int m = 0; m <= degree; ++m) {
      for (Index j = 0; j < dw; ++j) theta[size_t(m)](j, i) = graded_inner(v.wandering[size_t(j)], g);
      if (m < degree) g = v.apply_adjoint(g);
    }
  }
  return PolySymbol(dw, std::move(theta));
}

struct WoldExpansion {
  std::vector<Vector> coefficients;  // eta_m = P_W V*^m h in wandering coordinates
  double reconstruction_residual = 0.0;
};

// Wandering coefficients of h with respect to a pure shift: h = sum V^m eta_m.
// The reconstruction residual certifies the expansion; it vanishes iff h lies
// in the shift part.
inline WoldExpansion wold_expand(const ShiftModel& v, const GradedVector& h, int max_terms,
                                 const TolerancePolicy& tol = {}) {
  tol.validate();
  check_wandering_basis(v, tol);
  const Index dw = Index(v.wandering.size());
  WoldExpansion out;
  GradedVector g = h;
  const double floor = tol.eq_tol * (1.0 + h.norm());
  for (int m = 0; m <= max_terms && g.norm() > floor; ++m) {
    Vector eta(dw);
    for (Index j = 0; j < dw; ++j) eta(j) = graded_inner(v.wandering[size_t(j)], g);
    out.coefficients.push_back(eta);
    g = v.apply_adjoint(g);
  }
  while (!out.coefficients.empty() && out.coefficients.back().norm() <= floor)
    out.coefficients.pop_back();
  // Rebuild sum V^m (sum_j eta_m(j) w_j) and compare.
  GradedVector rec(h.dim);
  for (size_t m = out.coefficients.size(); m-- > 0;) {
    GradedVector layer(h.dim);
    for (Index j = 0; j < dw; ++j)
      layer = graded_axpy(out.coefficients[m](j), v.wandering[size_t(j)], layer);
    rec = v.apply(rec);
    rec = graded_axpy(Complex(1.0), layer, rec);
  }
  out.reconstruction_residual = graded_axpy(Complex(-1.0), rec, h).norm();
  return out;
}

}  // namespace isopair
