#pragma once

// Analytic objects attached to a truncated commuting pair: the symbol of one
// factor inside the pure shift model of the other, the canonical intertwiners
// between the product model and the factor models evaluated on
// reproducing-kernel sections, and the characteristic-style coefficient
// series built from the wandering projections. Every closed formula is
// cross-checked against the defining composition; the defining route is the
// returned value.

#include <isopair/pair_model.hpp>

namespace isopair {

// Rectangular coefficient series T_0 + T_1 z + ... mapping one wandering
// fiber into another.
struct AnalyticSymbolSeries {
  Index domain_dim = 0;
  Index codomain_dim = 0;
  std::vector<Matrix> coeffs;

  int degree() const { return int(coeffs.size()) - 1; }

  Matrix at(int m) const {
    if (m < 0 || m >= int(coeffs.size())) return Matrix::Zero(codomain_dim, domain_dim);
    return coeffs[size_t(m)];
  }

  Matrix eval(const Complex& z) const {
    Matrix acc = Matrix::Zero(codomain_dim, domain_dim);
    for (size_t m = coeffs.size(); m-- > 0;) acc = acc * z + coeffs[m];
    return acc;
  }

  double tail_norm_from(int m0) const {
    double s = 0.0;
    for (int m = m0; m < int(coeffs.size()); ++m) s += coeffs[size_t(m)].norm();
    return s;
  }

  void validate() const {
    for (const Matrix& t : coeffs) {
      if (t.rows() != codomain_dim || t.cols() != domain_dim)
        throw std::invalid_argument("AnalyticSymbolSeries: coefficient shape mismatch");
      if (!finite_entries(t)) throw std::invalid_argument("AnalyticSymbolSeries: non-finite entry");
    }
  }
};

inline PolySymbol series_as_symbol(const AnalyticSymbolSeries& s) {
  if (s.domain_dim != s.codomain_dim)
    throw std::invalid_argument("series_as_symbol: series is not square");
  return PolySymbol(s.domain_dim, s.coeffs);
}

namespace detail {

inline Factor factor_tag(int factor) {
  if (factor == 1) return Factor::one;
  if (factor == 2) return Factor::two;
  throw std::invalid_argument("factor index must be 1 or 2");
}

inline bool factor_declared_pure(const TruncatedPair& pair, int factor) {
  return factor == 1 ? pair.v1_pure : pair.v2_pure;
}

// Forward application guarded against the truncation edge: the stored maps
// are isometries, so any norm loss means mass escaped the band.
inline Vector isometric_apply(const Matrix& v, const Vector& x, const TolerancePolicy& tol,
                              const char* who) {
  Vector y = v * x;
  if (std::abs(y.norm() - x.norm()) > tol.eq_tol * (1.0 + x.norm()))
    throw std::runtime_error(std::string(who) +
                             ": truncation band too small for the requested degree");
  return y;
}

inline Matrix isometric_apply_cols(const Matrix& v, const Matrix& x, const TolerancePolicy& tol,
                                   const char* who) {
  Matrix y(v.rows(), x.cols());
  for (Index c = 0; c < x.cols(); ++c) y.col(c) = isometric_apply(v, Vector(x.col(c)), tol, who);
  return y;
}

}  // namespace detail

// Taylor coefficients of the symbol that represents the other factor inside
// the pure shift model of model_factor: T_m = (wandering compression of the
// m-th adjoint power of V_i composed with V_j), a square series on the
// wandering fiber of V_i. Requires the declared purity of the model factor.
inline AnalyticSymbolSeries theta_series(const TruncatedPair& pair, int model_factor,
                                         int degree_n, const TolerancePolicy& tol = {}) {
  tol.validate();
  if (degree_n < 0) throw std::invalid_argument("theta_series: negative degree");
  if (!detail::factor_declared_pure(pair, model_factor))
    throw std::invalid_argument("theta_series: model factor is not declared pure");
  const int other = 3 - model_factor;
  const Subspace wi = wandering_subspace(pair, detail::factor_tag(model_factor), tol);
  const Matrix vi = factor_matrix(pair, detail::factor_tag(model_factor));
  const Matrix vj = factor_matrix(pair, detail::factor_tag(other));
  AnalyticSymbolSeries s;
  s.domain_dim = wi.dim();
  s.codomain_dim = wi.dim();
  Matrix y = detail::isometric_apply_cols(vj, wi.basis, tol, "theta_series");
  for (int m = 0; m <= degree_n; ++m) {
    s.coeffs.push_back(wi.basis.adjoint() * y);
    y = vi.adjoint() * y;
  }
  return s;
}

// Graded expansion of a model vector through one factor's shift structure:
// coefficient m is the wandering component of the m-th adjoint power. For a
// pure factor this inverts the layered sum of forward images.
inline GradedVector factor_expansion(const TruncatedPair& pair, int factor, const Vector& h,
                                     int count, const TolerancePolicy& tol = {}) {
  tol.validate();
  const Subspace w = wandering_subspace(pair, detail::factor_tag(factor), tol);
  const Matrix v = factor_matrix(pair, detail::factor_tag(factor));
  GradedVector out(w.dim());
  out.coeffs.assign(size_t(count + 1), Vector::Zero(w.dim()));
  Vector cur = h;
  for (int m = 0; m <= count; ++m) {
    out.coeffs[size_t(m)] = w.basis.adjoint() * cur;
    cur = v.adjoint() * cur;
  }
  out.trim();
  return out;
}

namespace detail {

inline void require_in_subspace(const Subspace& s, const Vector& x, const TolerancePolicy& tol,
                                const char* who) {
  const Vector p = s.basis * (s.basis.adjoint() * x);
  if ((x - p).norm() > tol.eq_tol * (1.0 + x.norm()))
    throw std::invalid_argument(std::string(who) + ": vector is not in the required wandering subspace");
}

inline void require_disc_point(const Complex& w, const char* who) {
  if (!(std::abs(w) < 1.0)) throw std::invalid_argument(std::string(who) + ": point must lie in the open disc");
}

inline double kernel_tail(const Complex& w, int n, double eta_norm) {
  const double a = std::abs(w);
  return std::pow(a, n + 1) / std::sqrt(1.0 - a * a) * eta_norm;
}

}  // namespace detail

struct KernelActionResult {
  GradedVector value;  // coefficients over the target wandering fiber
  double route_difference = 0.0;
  double tail_bound = 0.0;
  double intertwine_residual = 0.0;
};

// The unitary carrying the product shift model onto the model of one factor,
// applied to a plain graded section over the product wandering fiber: lift
// through the product layering, re-expand through the factor.
inline GradedVector intertwiner_map(const TruncatedPair& pair, int model_factor,
                                    const GradedVector& f, int out_degree,
                                    const TolerancePolicy& tol = {}) {
  tol.validate();
  const Subspace w = wandering_subspace(pair, Factor::product, tol);
  if (f.dim != w.dim()) throw std::invalid_argument("intertwiner_map: fiber dimension mismatch");
  const Matrix v = factor_matrix(pair, Factor::product);
  Vector h = Vector::Zero(pair.dim());
  Vector layer;
  for (int m = 0; m <= f.degree(); ++m) {
    Vector lifted = w.basis * f.coeff(m);
    for (int s = 0; s < m; ++s) lifted = detail::isometric_apply(v, lifted, tol, "intertwiner_map");
    h += lifted;
  }
  return factor_expansion(pair, model_factor, h, out_degree, tol);
}

// Same map evaluated on a truncated kernel section at w with direction eta
// (an ambient vector in the product wandering subspace). The closed formula
// runs the resolvent expansion through the factor symbol and must agree with
// the defining composition up to the dropped kernel tail.
inline KernelActionResult intertwiner_on_kernel(const TruncatedPair& pair, int model_factor,
                                                const Complex& w, const Vector& eta, int n,
                                                const TolerancePolicy& tol = {}) {
  tol.validate();
  if (n < 0) throw std::invalid_argument("intertwiner_on_kernel: negative truncation");
  detail::require_disc_point(w, "intertwiner_on_kernel");
  if (!detail::factor_declared_pure(pair, model_factor) || !pair.product_pure)
    throw std::invalid_argument("intertwiner_on_kernel: purity not declared for the requested model");
  const Subspace wprod = wandering_subspace(pair, Factor::product, tol);
  detail::require_in_subspace(wprod, eta, tol, "intertwiner_on_kernel");

  // Defining route: lift the truncated kernel section, expand through the factor.
  const Matrix v = factor_matrix(pair, Factor::product);
  Vector h = eta;
  Vector term = eta;
  Complex pw(1.0, 0.0);
  for (int m = 1; m <= n; ++m) {
    term = detail::isometric_apply(v, term, tol, "intertwiner_on_kernel");
    pw *= std::conj(w);
    h += pw * term;
  }
  GradedVector composed = factor_expansion(pair, model_factor, h, n, tol);

  // Closed route: r = g + conj(w) z Theta(z) r with g_m the wandering
  // components of the adjoint powers of the factor applied to eta.
  const Subspace wi = wandering_subspace(pair, detail::factor_tag(model_factor), tol);
  const Matrix vi = factor_matrix(pair, detail::factor_tag(model_factor));
  const AnalyticSymbolSeries theta = theta_series(pair, model_factor, n, tol);
  std::vector<Vector> g(size_t(n + 1));
  Vector cur = eta;
  for (int m = 0; m <= n; ++m) {
    g[size_t(m)] = wi.basis.adjoint() * cur;
    cur = vi.adjoint() * cur;
  }
  std::vector<Vector> r(size_t(n + 1));
  for (int m = 0; m <= n; ++m) {
    Vector acc = g[size_t(m)];
    for (int k = 0; k < m; ++k) acc += std::conj(w) * (theta.at(k) * r[size_t(m - 1 - k)]);
    r[size_t(m)] = acc;
  }

  KernelActionResult out;
  out.value = composed;
  double diff2 = 0.0;
  for (int m = 0; m <= n; ++m) diff2 += (r[size_t(m)] - composed.coeff(m)).squaredNorm();
  out.route_difference = std::sqrt(diff2);
  out.tail_bound = detail::kernel_tail(w, n, eta.norm());
  if (out.route_difference > out.tail_bound + tol.approx_tol * (1.0 + eta.norm()))
    throw std::runtime_error(
        "intertwiner_on_kernel: closed formula and defining composition disagree beyond the certified tail");
  return out;
}

// The unitary carrying the model of the first factor onto the model of the
// second, on a plain graded section over the first factor's wandering fiber.
inline GradedVector cross_intertwiner_map(const TruncatedPair& pair, const GradedVector& f,
                                          int out_degree, const TolerancePolicy& tol = {}) {
  tol.validate();
  const Subspace w1 = wandering_subspace(pair, Factor::one, tol);
  if (f.dim != w1.dim())
    throw std::invalid_argument("cross_intertwiner_map: fiber dimension mismatch");
  const Matrix v1 = pair.V1;
  Vector h = Vector::Zero(pair.dim());
  for (int m = 0; m <= f.degree(); ++m) {
    Vector lifted = w1.basis * f.coeff(m);
    for (int s = 0; s < m; ++s) lifted = detail::isometric_apply(v1, lifted, tol, "cross_intertwiner_map");
    h += lifted;
  }
  return factor_expansion(pair, 2, h, out_degree, tol);
}

// Cross intertwiner on a truncated kernel section at w with direction eta1 in
// the wandering subspace of the first factor. The closed route inverts
// (I - conj(w) Theta(z)) degree by degree; note the geometric factor carries
// no extra z here, so the constant term already mixes.
inline KernelActionResult cross_intertwiner_on_kernel(const TruncatedPair& pair, const Complex& w,
                                                      const Vector& eta1, int n,
                                                      const TolerancePolicy& tol = {}) {
  tol.validate();
  if (n < 0) throw std::invalid_argument("cross_intertwiner_on_kernel: negative truncation");
  detail::require_disc_point(w, "cross_intertwiner_on_kernel");
  if (!pair.v1_pure || !pair.v2_pure)
    throw std::invalid_argument("cross_intertwiner_on_kernel: both factors must be declared pure");
  const Subspace w1 = wandering_subspace(pair, Factor::one, tol);
  const Subspace w2 = wandering_subspace(pair, Factor::two, tol);
  detail::require_in_subspace(w1, eta1, tol, "cross_intertwiner_on_kernel");

  // Defining route.
  Vector h = eta1;
  Vector term = eta1;
  Complex pw(1.0, 0.0);
  for (int m = 1; m <= n; ++m) {
    term = detail::isometric_apply(pair.V1, term, tol, "cross_intertwiner_on_kernel");
    pw *= std::conj(w);
    h += pw * term;
  }
  GradedVector composed = factor_expansion(pair, 2, h, n, tol);

  // Closed route.
  const AnalyticSymbolSeries theta = theta_series(pair, 2, n, tol);
  std::vector<Vector> g(size_t(n + 1));
  Vector cur = eta1;
  for (int m = 0; m <= n; ++m) {
    g[size_t(m)] = w2.basis.adjoint() * cur;
    cur = pair.V2.adjoint() * cur;
  }
  const Matrix lhs = Matrix::Identity(w2.dim(), w2.dim()) - std::conj(w) * theta.at(0);
  Eigen::PartialPivLU<Matrix> lu(lhs);
  std::vector<Vector> r(size_t(n + 1));
  for (int m = 0; m <= n; ++m) {
    Vector acc = g[size_t(m)];
    for (int k = 1; k <= m; ++k) acc += std::conj(w) * (theta.at(k) * r[size_t(m - k)]);
    r[size_t(m)] = lu.solve(acc);
  }

  KernelActionResult out;
  out.value = composed;
  double diff2 = 0.0;
  for (int m = 0; m <= n; ++m) diff2 += (r[size_t(m)] - composed.coeff(m)).squaredNorm();
  out.route_difference = std::sqrt(diff2);
  out.tail_bound = detail::kernel_tail(w, n, eta1.norm());
  if (out.route_difference > out.tail_bound + tol.approx_tol * (1.0 + eta1.norm()))
    throw std::runtime_error(
        "cross_intertwiner_on_kernel: closed formula and defining composition disagree beyond the certified tail");

  // The map must carry the coordinate shift to multiplication by the symbol:
  // check on each shifted fiber direction, away from the truncation edge.
  if (n >= 2) {
    double worst = 0.0;
    for (Index c = 0; c < w1.dim(); ++c) {
      GradedVector e(w1.dim());
      e.set_coeff(0, Vector(Vector::Unit(w1.dim(), c)));
      GradedVector shifted(w1.dim());
      shifted.set_coeff(1, Vector(Vector::Unit(w1.dim(), c)));
      GradedVector lhs_v = cross_intertwiner_map(pair, shifted, n, tol);
      GradedVector base = cross_intertwiner_map(pair, e, n, tol);
      for (int m = 0; m < n; ++m) {
        Vector acc = Vector::Zero(w2.dim());
        for (int k = 0; k <= m; ++k) acc += theta.at(k) * base.coeff(m - k);
        worst = std::max(worst, (lhs_v.coeff(m) - acc).norm());
      }
    }
    out.intertwine_residual = worst;
    if (worst > tol.approx_tol)
      throw std::runtime_error(
          "cross_intertwiner_on_kernel: symbol intertwining fails on shifted fiber directions");
  }
  return out;
}

// Characteristic-style series of factor i against factor j: the constant
// term is minus the forward action of V_i on the other factor's wandering
// fiber, and higher terms compress the adjoint powers of V_i between the two
// fibers, all written in the product wandering coordinates.
inline AnalyticSymbolSeries characteristic_series(const TruncatedPair& pair, int i, int degree_n,
                                                  const TolerancePolicy& tol = {}) {
  tol.validate();
  if (degree_n < 0) throw std::invalid_argument("characteristic_series: negative degree");
  const int j = 3 - i;
  const Subspace wi = wandering_subspace(pair, detail::factor_tag(i), tol);
  const Subspace wj = wandering_subspace(pair, detail::factor_tag(j), tol);
  const Subspace w = wandering_subspace(pair, Factor::product, tol);
  const Matrix vi = factor_matrix(pair, detail::factor_tag(i));
  AnalyticSymbolSeries s;
  s.domain_dim = wj.dim();
  s.codomain_dim = w.dim();
  if (wj.dim() == 0) {
    s.coeffs.assign(size_t(degree_n + 1), Matrix::Zero(w.dim(), 0));
    return s;
  }
  s.coeffs.push_back(-(w.basis.adjoint() *
                       detail::isometric_apply_cols(vi, wj.basis, tol, "characteristic_series")));
  Matrix y = wj.basis;
  const Matrix embed = w.basis.adjoint() * wi.basis;  // fiber of i inside the product fiber
  for (int m = 1; m <= degree_n; ++m) {
    s.coeffs.push_back(embed * (wi.basis.adjoint() * y));
    y = vi.adjoint() * y;
  }
  return s;
}

// Residual of the reconstruction identity tying the characteristic series to
// the layered expansion of the product wandering subspace: for every m the
// compression of the m-th adjoint power of V_i to the product fiber must be
// reproduced by the series composed with the adjoint of V_i on that fiber
// (plus the identity at m = 0).
inline double characteristic_bridge_residual(const TruncatedPair& pair, int i, int degree_n,
                                             const TolerancePolicy& tol = {}) {
  tol.validate();
  const int j = 3 - i;
  const AnalyticSymbolSeries s = characteristic_series(pair, i, degree_n, tol);
  const Subspace wi = wandering_subspace(pair, detail::factor_tag(i), tol);
  const Subspace wj = wandering_subspace(pair, detail::factor_tag(j), tol);
  const Subspace w = wandering_subspace(pair, Factor::product, tol);
  const Matrix vi = factor_matrix(pair, detail::factor_tag(i));
  // Adjoint of V_i maps the product fiber into the other factor's fiber.
  const Matrix vih_w = vi.adjoint() * w.basis;
  const Matrix k = wj.basis.adjoint() * vih_w;
  double resid = (vih_w - wj.basis * k).norm();
  const Matrix pi_amb = wi.basis * wi.basis.adjoint();
  Matrix y = w.basis;
  for (int m = 0; m <= degree_n; ++m) {
    const Matrix lhs = w.basis.adjoint() * (pi_amb * y);
    Matrix rhs = s.at(m) * k;
    if (m == 0) rhs += Matrix::Identity(w.dim(), w.dim());
    resid = std::max(resid, (lhs - rhs).norm());
    y = vi.adjoint() * y;
  }
  return resid;
}

}  // namespace isopair
