#include <catch2/catch_amalgamated.hpp>

#include <isopair/bcl.hpp>

using namespace isopair;
using Catch::Approx;

namespace {

BCLData diag_data() {
  BCLData d;
  d.dim = 2;
  d.U = Matrix::Identity(2, 2);
  d.P = Matrix::Zero(2, 2);
  d.P(0, 0) = Complex(1.0);
  return d;
}

BCLData swap_data() {
  BCLData d;
  d.dim = 2;
  d.U = Matrix::Zero(2, 2);
  d.U(0, 1) = Complex(1.0);
  d.U(1, 0) = Complex(1.0);
  d.P = Matrix::Zero(2, 2);
  d.P(0, 0) = Complex(1.0);
  return d;
}

Vector e(Index n, Index k) {
  Vector v = Vector::Zero(n);
  v(k) = Complex(1.0);
  return v;
}

}  // namespace

TEST_CASE("build_multipliers on the diagonal instance") {
  BCLPair pair = build_multipliers(diag_data());
  // Phi1 = diag(1, z), Phi2 = diag(z, 1).
  Matrix a0 = pair.phi1.at(0), a1 = pair.phi1.at(1);
  REQUIRE(std::abs(a0(0, 0) - Complex(1)) < 1e-15);
  REQUIRE(std::abs(a1(1, 1) - Complex(1)) < 1e-15);
  REQUIRE(std::abs(a0(1, 1)) < 1e-15);
  REQUIRE(std::abs(a1(0, 0)) < 1e-15);
  Matrix c0 = pair.phi2.at(0), c1 = pair.phi2.at(1);
  REQUIRE(std::abs(c0(1, 1) - Complex(1)) < 1e-15);
  REQUIRE(std::abs(c1(0, 0) - Complex(1)) < 1e-15);
}

TEST_CASE("build_multipliers on the swap instance") {
  BCLPair pair = build_multipliers(swap_data());
  // Phi1 = Phi2 = [[0, z], [1, 0]].
  for (const PolySymbol* phi : {&pair.phi1, &pair.phi2}) {
    REQUIRE(std::abs(phi->at(0)(1, 0) - Complex(1)) < 1e-15);
    REQUIRE(std::abs(phi->at(1)(0, 1) - Complex(1)) < 1e-15);
    REQUIRE(std::abs(phi->at(0)(0, 0)) < 1e-15);
    REQUIRE(std::abs(phi->at(0)(0, 1)) < 1e-15);
    REQUIRE(std::abs(phi->at(1)(1, 1)) < 1e-15);
  }
}

TEST_CASE("built symbols are inner and multiply to z in both orders") {
  BCLData d = random_bcl(4, 2, 123);
  BCLPair pair = build_multipliers(d);
  REQUIRE(symbol_is_inner(pair.phi1));
  REQUIRE(symbol_is_inner(pair.phi2));
  const PolySymbol z = symbol_z_power(4, 1);
  const PolySymbol p12 = symbol_product(pair.phi1, pair.phi2);
  const PolySymbol p21 = symbol_product(pair.phi2, pair.phi1);
  for (int m = 0; m <= 2; ++m) {
    REQUIRE((p12.at(m) - z.at(m)).norm() < 1e-12);
    REQUIRE((p21.at(m) - z.at(m)).norm() < 1e-12);
  }
}

TEST_CASE("build_multipliers validates its generating data") {
  BCLData bad = diag_data();
  bad.U(0, 0) = Complex(2.0);
  REQUIRE_THROWS_AS(build_multipliers(bad), std::invalid_argument);
  BCLData badp = diag_data();
  badp.P(0, 1) = Complex(0.5);
  REQUIRE_THROWS_AS(build_multipliers(badp), std::invalid_argument);
}

TEST_CASE("wandering geometry of the diagonal instance") {
  BCLPair pair = build_multipliers(diag_data());
  WanderingData wd = wandering_data_of_pair(pair);
  REQUIRE(wd.W1.dim() == 1);
  REQUIRE(wd.W2.dim() == 1);
  REQUIRE(subspace_distance(wd.W1, orthonormal_basis(e(2, 1))) < 1e-12);
  REQUIRE(subspace_distance(wd.W2, orthonormal_basis(e(2, 0))) < 1e-12);
  REQUIRE(subspace_distance(wd.V2W1, orthonormal_basis(e(2, 1))) < 1e-12);
  REQUIRE(subspace_distance(wd.V1W2, orthonormal_basis(e(2, 0))) < 1e-12);
  REQUIRE((wd.U - Matrix::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("wandering geometry of the swap instance") {
  BCLPair pair = build_multipliers(swap_data());
  WanderingData wd = wandering_data_of_pair(pair);
  REQUIRE(subspace_distance(wd.W1, orthonormal_basis(e(2, 0))) < 1e-12);
  REQUIRE(subspace_distance(wd.W2, orthonormal_basis(e(2, 0))) < 1e-12);
  REQUIRE(subspace_distance(wd.V2W1, orthonormal_basis(e(2, 1))) < 1e-12);
  REQUIRE(subspace_distance(wd.V1W2, orthonormal_basis(e(2, 1))) < 1e-12);
  REQUIRE((wd.U - swap_data().U).norm() < 1e-12);
}

TEST_CASE("wandering decomposition splits the constant fiber on random data") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    BCLData d = random_bcl(5, 2, seed);
    BCLPair pair = build_multipliers(d);
    WanderingData wd = wandering_data_of_pair(pair);
    REQUIRE(wd.W1.dim() + wd.V1W2.dim() == 5);
    REQUIRE(wd.V2W1.dim() + wd.W2.dim() == 5);
    REQUIRE((projector(wd.W1) + projector(wd.V1W2) - Matrix::Identity(5, 5)).norm() < 1e-10);
    // The exchange map agrees with the generating unitary in these coordinates.
    REQUIRE((wd.U - d.U).norm() < 1e-10);
  }
}

TEST_CASE("constant-fiber projection intertwines with the multipliers") {
  // P_W V1 = V1 P_{W2} on the graded model: both sides of a random vector.
  BCLData d = random_bcl(4, 3, 55);
  BCLPair pair = build_multipliers(d);
  WanderingData wd = wandering_data_of_pair(pair);
  SeededGaussian rng(99);
  GradedVector f(4);
  for (int m = 0; m <= 3; ++m) {
    Vector v(4);
    for (Index i = 0; i < 4; ++i) v(i) = Complex(rng.gaussian(), rng.gaussian());
    f.set_coeff(m, v);
  }
  const Vector lhs = mult_apply(pair.phi1, f).coeff(0);  // constant part of V1 f
  GradedVector projected(4);
  projected.set_coeff(0, projector(wd.W2) * f.coeff(0));
  GradedVector v1p = mult_apply(pair.phi1, projected);
  REQUIRE((lhs - v1p.coeff(0)).norm() < 1e-10);
  REQUIRE(v1p.coeff(1).norm() < 1e-10);
}

TEST_CASE("coefficients reconstructed from the wandering geometry") {
  BCLPair pair = build_multipliers(swap_data());
  WanderingData wd = wandering_data_of_pair(pair);
  PairCoefficients pc = coefficients_from_geometry(wd, pair);
  Matrix a_expect = Matrix::Zero(2, 2), b_expect = Matrix::Zero(2, 2);
  a_expect(1, 0) = Complex(1.0);
  b_expect(0, 1) = Complex(1.0);
  REQUIRE((pc.A - a_expect).norm() < 1e-12);
  REQUIRE((pc.B - b_expect).norm() < 1e-12);
  REQUIRE((pc.C - a_expect).norm() < 1e-12);
  REQUIRE((pc.D - b_expect).norm() < 1e-12);
  REQUIRE(pc.mismatch < 1e-12);
}

TEST_CASE("both coefficient routes agree on random instances") {
  for (std::uint64_t seed : {10u, 11u, 12u, 13u}) {
    BCLData d = random_bcl(4, 2, seed);
    BCLPair pair = build_multipliers(d);
    WanderingData wd = wandering_data_of_pair(pair);
    PairCoefficients via_restriction = coefficients_from_geometry(wd, pair);
    PairCoefficients via_exchange = coefficients_from_exchange(wd);
    REQUIRE((via_restriction.A - via_exchange.A).norm() < 1e-10);
    REQUIRE((via_restriction.B - via_exchange.B).norm() < 1e-10);
    REQUIRE((via_restriction.C - via_exchange.C).norm() < 1e-10);
    REQUIRE((via_restriction.D - via_exchange.D).norm() < 1e-10);
  }
}

TEST_CASE("wold_coefficients reads off graded coefficients for the product shift") {
  BCLData d = random_bcl(3, 1, 31);
  BCLPair pair = build_multipliers(d);
  GradedVector h(3);
  h.set_coeff(2, e(3, 1));  // h = z^2 e2 -> coefficients (0, 0, e2)
  WoldExpansion wx = wold_coefficients(pair, h);
  REQUIRE(wx.coefficients.size() == 3);
  REQUIRE(wx.coefficients[0].norm() < 1e-12);
  REQUIRE(wx.coefficients[1].norm() < 1e-12);
  REQUIRE((wx.coefficients[2] - e(3, 1)).norm() < 1e-12);
  REQUIRE(wx.reconstruction_residual < 1e-12);

  SeededGaussian rng(7);
  GradedVector g(3);
  for (int m = 0; m <= 4; ++m) {
    Vector v(3);
    for (Index i = 0; i < 3; ++i) v(i) = Complex(rng.gaussian(), rng.gaussian());
    g.set_coeff(m, v);
  }
  REQUIRE(wold_coefficients(pair, g).reconstruction_residual < 1e-10);
}

TEST_CASE("extract_bcl returns the generating data in ambient coordinates") {
  for (std::uint64_t seed : {5u, 6u}) {
    BCLData d = random_bcl(4, 2, seed);
    BCLPair pair = build_multipliers(d);
    BCLData back = extract_bcl(pair);
    REQUIRE((back.U - d.U).norm() < 1e-10);
    REQUIRE((back.P - d.P).norm() < 1e-10);
  }
  // Dimension-1 pair (M_z, M_1): U = [1], P = [0].
  BCLData one;
  one.dim = 1;
  one.U = Matrix::Identity(1, 1);
  one.P = Matrix::Zero(1, 1);
  BCLData back = extract_bcl(build_multipliers(one));
  REQUIRE(std::abs(back.U(0, 0) - Complex(1)) < 1e-12);
  REQUIRE(std::abs(back.P(0, 0)) < 1e-12);
}

TEST_CASE("random_bcl is deterministic and well formed") {
  BCLData a = random_bcl(5, 3, 42);
  BCLData b = random_bcl(5, 3, 42);
  REQUIRE((a.U - b.U).norm() == 0.0);
  REQUIRE((a.P - b.P).norm() == 0.0);
  BCLData c = random_bcl(5, 3, 43);
  REQUIRE((a.U - c.U).norm() > 1e-3);
  REQUIRE(operator_class(a.U).unitary);
  REQUIRE(operator_class(a.P).projection);
  REQUIRE(Index(std::round(a.P.trace().real())) == 3);
  REQUIRE_THROWS_AS(random_bcl(3, 4, 1), std::invalid_argument);
}

TEST_CASE("structural purity via the spectral radius of the diagonal block") {
  // Swap instance: both multipliers are pure shifts.
  PurityFlags sw = declared_purity(swap_data());
  REQUIRE(sw.v1);
  REQUIRE(sw.v2);
  REQUIRE(sw.radius1 < 1e-8);
  // Diagonal instance: each multiplier has a unitary direct summand.
  PurityFlags dg = declared_purity(diag_data());
  REQUIRE_FALSE(dg.v1);
  REQUIRE_FALSE(dg.v2);
  REQUIRE(dg.radius1 == Approx(1.0).margin(1e-10));
  // P = 0: Phi1 = z U* is pure, Phi2 = U is a constant unitary.
  BCLData p0;
  p0.dim = 3;
  SeededGaussian rng(17);
  p0.U = haar_unitary(3, rng);
  p0.P = Matrix::Zero(3, 3);
  PurityFlags f0 = declared_purity(p0);
  REQUIRE(f0.v1);
  REQUIRE_FALSE(f0.v2);
  // P = I: mirrored.
  BCLData p1 = p0;
  p1.P = Matrix::Identity(3, 3);
  PurityFlags f1 = declared_purity(p1);
  REQUIRE_FALSE(f1.v1);
  REQUIRE(f1.v2);
}
