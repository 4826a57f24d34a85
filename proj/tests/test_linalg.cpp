#include <catch2/catch_amalgamated.hpp>

#include <isopair/linalg.hpp>

#include <complex>

using namespace isopair;
using Catch::Approx;

namespace {
const Complex I1(0.0, 1.0);

// Deterministic pseudo-random matrix, independent of library RNG choices.
Matrix dense(Index rows, Index cols, unsigned seed) {
  Matrix m(rows, cols);
  unsigned long long s = seed * 6364136223846793005ULL + 1442695040888963407ULL;
  auto next = [&s]() {
    s = s * 6364136223846793005ULL + 1442695040888963407ULL;
    return double((s >> 11) % 2000000) / 1000000.0 - 1.0;
  };
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = Complex(next(), next());
  return m;
}
}  // namespace

TEST_CASE("orthonormal_basis spans the input columns") {
  Matrix v(2, 2);
  v << Complex(1), Complex(1), Complex(1), Complex(-1);
  Subspace s = orthonormal_basis(v);
  REQUIRE(s.dim() == 2);
  // Gram oracle: basis columns orthonormal, projector reproduces the span.
  REQUIRE((s.basis.adjoint() * s.basis - Matrix::Identity(2, 2)).norm() < 1e-12);
  REQUIRE((projector(s) - Matrix::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("orthonormal_basis collapses dependent columns") {
  Matrix v(3, 3);
  v.col(0) = dense(3, 1, 7);
  v.col(1) = 2.0 * v.col(0);
  v.col(2) = (0.5 + 0.25 * I1) * v.col(0);
  Subspace s = orthonormal_basis(v);
  REQUIRE(s.dim() == 1);
  // Span oracle: original columns reproduced by the projector.
  REQUIRE((projector(s) * v - v).norm() < 1e-10);
}

TEST_CASE("orthonormal_basis of numerically zero input is the zero subspace") {
  Matrix v = Matrix::Zero(4, 2);
  Subspace s = orthonormal_basis(v);
  REQUIRE(s.dim() == 0);
  REQUIRE(s.ambient == 4);
  REQUIRE(projector(s).norm() == 0.0);
}

TEST_CASE("orthonormal_basis rejects non-finite entries") {
  Matrix v = Matrix::Zero(2, 1);
  v(0, 0) = Complex(std::numeric_limits<double>::quiet_NaN(), 0.0);
  REQUIRE_THROWS_AS(orthonormal_basis(v), std::invalid_argument);
}

TEST_CASE("projector of a line has the outer-product form") {
  Matrix v(2, 1);
  v << Complex(1), Complex(1);
  Subspace s = orthonormal_basis(v);
  Matrix p = projector(s);
  // Outer-product oracle: P = u u^H with u = (e1+e2)/sqrt(2), all entries 1/2.
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j) REQUIRE(std::abs(p(i, j) - Complex(0.5)) < 1e-12);
  OperatorClass c = operator_class(p);
  REQUIRE(c.projection);
  REQUIRE(c.self_adjoint);
  REQUIRE_FALSE(c.unitary);
}

TEST_CASE("ortho_complement_within splits C^3") {
  Matrix all = Matrix::Identity(3, 3);
  Subspace s(3, all);
  Matrix v(3, 1);
  v << Complex(0), Complex(1), Complex(0);
  Subspace t = orthonormal_basis(v);
  Subspace comp = ortho_complement_within(s, t);
  REQUIRE(comp.dim() == 2);
  REQUIRE((projector(comp) + projector(t) - projector(s)).norm() < 1e-12);
}

TEST_CASE("ortho_complement_within rejects non-contained subspace") {
  Matrix v1(3, 1), v2(3, 1);
  v1 << Complex(1), Complex(0), Complex(0);
  v2 << Complex(0), Complex(1), Complex(0);
  Subspace s = orthonormal_basis(v1);
  Subspace t = orthonormal_basis(v2);
  REQUIRE_THROWS_AS(ortho_complement_within(s, t), std::invalid_argument);
}

TEST_CASE("complement of the zero subspace is the whole space") {
  Subspace s(3, Matrix::Identity(3, 3));
  Subspace z = Subspace::zero(3);
  Subspace comp = ortho_complement_within(s, z);
  REQUIRE(comp.dim() == 3);
  Subspace full_minus_full = ortho_complement_within(s, s);
  REQUIRE(full_minus_full.dim() == 0);
}

TEST_CASE("hermitian_spectrum matches the characteristic polynomial on 2x2") {
  Matrix m(2, 2);
  m << Complex(0.5), Complex(0.5), Complex(0.5), Complex(0.5);
  auto ev = hermitian_spectrum(m);
  REQUIRE(ev.size() == 2);
  // Char-poly oracle: trace 1, det 0 -> eigenvalues {0, 1}, nondecreasing.
  REQUIRE(ev[0] == Approx(0.0).margin(1e-12));
  REQUIRE(ev[1] == Approx(1.0).margin(1e-12));
}

TEST_CASE("hermitian_spectrum rejects a non-Hermitian matrix") {
  Matrix m(2, 2);
  m << Complex(0), Complex(1), Complex(0), Complex(0);
  REQUIRE_THROWS_AS(hermitian_spectrum(m), std::invalid_argument);
}

TEST_CASE("hermitian_spectrum is nondecreasing on random Hermitian input") {
  Matrix a = dense(5, 5, 3);
  Matrix h = a + Matrix(a.adjoint());
  auto ev = hermitian_spectrum(h);
  for (size_t i = 1; i < ev.size(); ++i) REQUIRE(ev[i - 1] <= ev[i] + 1e-14);
  // Trace oracle.
  double tr = 0.0;
  for (double x : ev) tr += x;
  REQUIRE(tr == Approx(h.trace().real()).margin(1e-9));
}

TEST_CASE("operator_class recognizes the standard classes") {
  Matrix u(2, 2);
  u << Complex(0), Complex(1), Complex(1), Complex(0);
  OperatorClass cu = operator_class(u);
  REQUIRE(cu.unitary);
  REQUIRE(cu.isometry);
  REQUIRE(cu.self_adjoint);
  REQUIRE_FALSE(cu.projection);

  // Tall isometry: first two columns of the 3x3 identity.
  Matrix iso = Matrix::Identity(3, 3).leftCols(2);
  OperatorClass ci = operator_class(iso);
  REQUIRE(ci.isometry);
  REQUIRE_FALSE(ci.unitary);

  Matrix n(2, 2);
  n << Complex(0), Complex(1), Complex(0), Complex(0);
  OperatorClass cn = operator_class(n);
  REQUIRE_FALSE(cn.isometry);
  REQUIRE_FALSE(cn.self_adjoint);
}

TEST_CASE("kernel and image are orthogonal complements for a rank-1 map") {
  Matrix m(2, 2);
  m << Complex(1), Complex(1), Complex(1), Complex(1);
  Subspace k = kernel(m);
  Subspace im = image(m);
  REQUIRE(k.dim() == 1);
  REQUIRE(im.dim() == 1);
  REQUIRE((m * k.basis).norm() < 1e-12);
  // Kernel of [[1,1],[1,1]] is the line through (1,-1).
  Matrix expect(2, 1);
  expect << Complex(1), Complex(-1);
  REQUIRE(subspace_distance(k, orthonormal_basis(expect)) < 1e-12);
}

TEST_CASE("subspace_distance separates distinct lines and matches equal ones") {
  Matrix v1(2, 1), v2(2, 1);
  v1 << Complex(1), Complex(0);
  v2 << Complex(1), Complex(1);
  Subspace a = orthonormal_basis(v1);
  Subspace b = orthonormal_basis(v2);
  REQUIRE(subspace_distance(a, b) > 0.5);
  // Same span through a different (scaled, rotated) generator.
  Matrix v3 = v2 * (2.0 * I1);
  REQUIRE(subspace_distance(b, orthonormal_basis(v3)) < 1e-12);
}

TEST_CASE("tolerance policy validates its ordering invariant") {
  TolerancePolicy bad;
  bad.eq_tol = 1e-3;
  bad.approx_tol = 1e-6;
  REQUIRE_THROWS_AS(orthonormal_basis(Matrix::Identity(2, 2), bad), std::invalid_argument);
  TolerancePolicy zero;
  zero.eq_tol = 0.0;
  REQUIRE_THROWS_AS(orthonormal_basis(Matrix::Identity(2, 2), zero), std::invalid_argument);
}
