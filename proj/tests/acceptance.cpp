// Acceptance gate: every numbered criterion runs at its stated tolerance and
// prints one verdict line. A failed line fails the binary.

#include <isopair/analysis.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cstdio>

using namespace isopair;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void verdict_line(int n, const char* what, bool ok) {
  std::printf("%s criterion %2d: %s\n", ok ? "[PASS]" : "[FAIL]", n, what);
  std::fflush(stdout);
  REQUIRE(ok);
}

// Shared instance corpus: every dimension 1..6 with every projection rank,
// repeated until at least 100 instances exist. Seeds are fixed so criteria
// 1 and 2 see the same instances.
std::vector<BCLData> small_corpus() {
  std::vector<BCLData> out;
  std::uint64_t seed = 1000;
  for (int copy = 0; copy < 4; ++copy)
    for (Index dim = 1; dim <= 6; ++dim)
      for (Index rank = 0; rank <= dim; ++rank) out.push_back(random_bcl(dim, rank, seed++));
  return out;
}

double symbol_distance(const PolySymbol& a, const PolySymbol& b) {
  double worst = 0.0;
  const int top = std::max(a.degree(), b.degree());
  for (int m = 0; m <= top; ++m) worst = std::max(worst, (a.at(m) - b.at(m)).norm());
  return worst;
}

GradedVector random_graded(Index dim, int degree, SeededGaussian& rng) {
  GradedVector f(dim);
  for (int m = 0; m <= degree; ++m) {
    Vector c(dim);
    for (Index i = 0; i < dim; ++i) c(i) = Complex(rng.gaussian(), rng.gaussian());
    f.set_coeff(m, c);
  }
  return f;
}

const std::vector<Complex> kKernelPoints = {Complex(0.3, 0.1), Complex(-0.45, 0.0),
                                            Complex(0.2, -0.4), Complex(0.0, 0.45),
                                            Complex(-0.25, -0.3)};

}  // namespace

TEST_CASE("criterion 1: multiplier identities on the seeded corpus") {
  const auto t0 = Clock::now();
  const std::vector<BCLData> corpus = small_corpus();
  bool ok = corpus.size() >= 100;
  for (const BCLData& data : corpus) {
    const BCLPair pair = build_multipliers(data);
    const PolySymbol z = symbol_z_power(data.dim, 1);
    ok = ok && symbol_distance(symbol_product(pair.phi1, pair.phi2), z) <= 1e-12;
    ok = ok && symbol_distance(symbol_product(pair.phi2, pair.phi1), z) <= 1e-12;
    ok = ok && symbol_is_inner(pair.phi1) && symbol_is_inner(pair.phi2);
  }
  const double dt = seconds_since(t0);
  ok = ok && dt < 5.0;
  std::printf("           products = z and inner on %zu instances, %.2fs\n", corpus.size(), dt);
  verdict_line(1, "exchange-data multipliers commute to the shift and are inner", ok);
}

TEST_CASE("criterion 2: coefficient reconstruction agreement") {
  bool ok = true;
  double worst = 0.0;
  for (const BCLData& data : small_corpus()) {
    const BCLPair pair = build_multipliers(data);
    const WanderingData wd = wandering_data_of_pair(pair);
    const PairCoefficients geo = coefficients_from_geometry(wd, pair);
    const PairCoefficients exch = coefficients_from_exchange(wd);
    const double gap = std::max({(geo.A - exch.A).norm(), (geo.B - exch.B).norm(),
                                 (geo.C - exch.C).norm(), (geo.D - exch.D).norm(), geo.mismatch});
    worst = std::max(worst, gap);
    ok = ok && gap <= 1e-9;
  }
  std::printf("           worst route gap %.2e\n", worst);
  verdict_line(2, "wandering-geometry and exchange-data coefficient routes agree", ok);
}

TEST_CASE("criterion 3: extraction round trip is equivalence-exact") {
  const auto t0 = Clock::now();
  bool ok = true;
  std::uint64_t seed = 1500;
  for (int k = 0; k < 50; ++k) {
    const Index dim = 1 + Index(k % 5);
    const Index rank = Index(seed % std::uint64_t(dim + 1));
    const BCLPair pair = build_multipliers(random_bcl(dim, rank, seed++));
    const BCLPair rebuilt = build_multipliers(extract_bcl(pair));
    const PairEquivalenceReport rep = pair_equivalence(pair, rebuilt);
    ok = ok && rep.verdict == Verdict::yes &&
         rep.coefficient_route.witness.rows() == dim &&
         rep.coefficient_route.witness_residual <= 1e-6;
  }
  const double dt = seconds_since(t0);
  ok = ok && dt < 30.0;
  std::printf("           50 round trips certified with witnesses, %.2fs\n", dt);
  verdict_line(3, "rebuild after extraction stays jointly unitarily equivalent", ok);
}

TEST_CASE("criterion 4: commutant Taylor extraction and its converse") {
  bool ok = true;
  std::uint64_t seed = 2200;
  for (int k = 0; k < 50; ++k) {
    const Index dim = 1 + Index(k % 4);
    SeededGaussian rng(seed++);
    std::vector<Matrix> coeffs;
    for (int m = 0; m <= 3; ++m) {
      Matrix c(dim, dim);
      for (Index i = 0; i < dim; ++i)
        for (Index j = 0; j < dim; ++j) c(i, j) = Complex(rng.gaussian(), rng.gaussian());
      coeffs.push_back(c / (2.0 * std::sqrt(double(dim))));
    }
    const PolySymbol psi(dim, coeffs);

    ShiftModel shift;
    const PolySymbol z = symbol_z_power(dim, 1);
    shift.apply = [z](const GradedVector& f) { return mult_apply(z, f); };
    shift.apply_adjoint = [z](const GradedVector& f) { return mult_adjoint_apply(z, f); };
    for (Index i = 0; i < dim; ++i) {
      GradedVector e(dim);
      Vector v = Vector::Zero(dim);
      v(i) = Complex(1.0);
      e.set_coeff(0, v);
      shift.wandering.push_back(e);
    }

    const GradedOp commuting = [psi](const GradedVector& f) { return mult_apply(psi, f); };
    const PolySymbol recovered = taylor_extract(shift, commuting, 3);
    ok = ok && symbol_distance(recovered, psi) <= 1e-10;

    // Rank-one perturbation supported off the constant fiber: extraction sees
    // nothing, so the reconstruction residual must expose the non-commutation.
    const GradedOp perturbed = [psi, dim](const GradedVector& f) {
      GradedVector g = mult_apply(psi, f);
      Vector bump = Vector::Zero(dim);
      bump(0) = f.coeff(1)(0);
      return graded_axpy(Complex(1.0), GradedVector(dim, {bump}), g);
    };
    const PolySymbol wrong = taylor_extract(shift, perturbed, 3);
    SeededGaussian prng(seed ^ 0x9E3779B9u);
    double residual = 0.0;
    for (int probe = 0; probe < 4; ++probe) {
      GradedVector f = random_graded(dim, 4, prng);
      const GradedVector lhs = perturbed(f);
      const GradedVector rhs = mult_apply(wrong, f);
      residual = std::max(residual, graded_axpy(Complex(-1.0), rhs, lhs).norm() / f.norm());
    }
    ok = ok && residual > 1e-3;
  }
  verdict_line(4, "multiplier symbols round trip; non-commutant operators are exposed", ok);
}

namespace {

// Shared by criteria 5 and 6: verdict reports for 200 seeded exchange-data
// pairs plus the three monomial invariant-subspace fixtures.
struct VerdictCorpus {
  std::vector<DefectReport> reports;
  std::vector<double> exchange_commutators;  // ||UP - PU||, one per exchange instance
  size_t exchange_count = 0;
};

const VerdictCorpus& verdict_corpus() {
  static const VerdictCorpus corpus = [] {
    VerdictCorpus c;
    std::uint64_t seed = 3000;
    while (c.reports.size() < 200) {
      const Index dim = 1 + Index(seed % 6);
      const Index rank = Index(seed % std::uint64_t(dim + 1));
      const BCLData data = random_bcl(dim, rank, seed++);
      c.reports.push_back(defect_verdict(bcl_truncated_pair(data, 6)));
      c.exchange_commutators.push_back((data.U * data.P - data.P * data.U).norm());
    }
    c.exchange_count = c.reports.size();
    const std::vector<std::vector<BivariatePoly>> gens = {
        {BivariatePoly::monomial(0, 0)},
        {BivariatePoly::monomial(1, 0)},
        {BivariatePoly::monomial(1, 0), BivariatePoly::monomial(0, 1)}};
    for (const auto& g : gens)
      c.reports.push_back(defect_verdict(restricted_pair(span_to_degree(g, 10))));
    return c;
  }();
  return corpus;
}

}  // namespace

TEST_CASE("criterion 5: five-way verdict consistency") {
  const VerdictCorpus& corpus = verdict_corpus();
  bool ok = true;
  for (const DefectReport& rep : corpus.reports) ok = ok && rep.verdicts.consistent;
  for (size_t i = 0; i < corpus.exchange_count; ++i) {
    const bool commutes = corpus.exchange_commutators[i] <= 1e-9;
    ok = ok && corpus.reports[i].verdicts.doubly_commuting == commutes;
  }
  std::printf("           %zu instances, all five verdicts agree per instance\n",
              corpus.reports.size());
  verdict_line(5, "positivity, containment, commutation, projection, isometry align", ok);
}

TEST_CASE("criterion 6: defect route agreement") {
  bool ok = true;
  double worst = 0.0;
  for (const DefectReport& rep : verdict_corpus().reports) {
    worst = std::max(worst, rep.route_gap);
    ok = ok && rep.route_gap <= 1e-9;
  }
  std::printf("           worst interior route gap %.2e\n", worst);
  verdict_line(6, "algebraic and wandering-geometry defects coincide", ok);
}

TEST_CASE("criterion 7: no nonzero nonpositive defect exists") {
  const auto t0 = Clock::now();
  const TolerancePolicy tol;
  bool ok = true;
  int violations = 0;

  std::uint64_t seed = 4000;
  int accepted = 0;
  while (accepted < 500) {
    const Index dim = 2 + Index(seed % 5);
    const Index rank = 1 + Index(seed % std::uint64_t(dim - 1));
    const BCLData data = random_bcl(dim, rank, seed++);
    const PurityFlags purity = declared_purity(data);
    if (!(purity.v1 && purity.v2)) continue;
    ++accepted;
    const TruncatedPair pair = bcl_truncated_pair(data, 6);
    const Matrix c = defect_direct(pair);
    const auto spec = hermitian_spectrum((c + Matrix(c.adjoint())) / 2.0);
    if (spec.back() <= tol.approx_tol && c.norm() > tol.approx_tol) ++violations;
  }

  for (int k = 0; k < 100; ++k) {
    const Index dim = 5 + Index(k % 4);
    const Index rank = dim - 4 + Index(seed % 4);
    const BCLData data = random_bcl(dim, std::min(rank, dim - 1), seed++);
    const TruncatedPair pair = bcl_truncated_pair(data, 6);
    const Matrix c = defect_direct(pair);
    const auto spec = hermitian_spectrum((c + Matrix(c.adjoint())) / 2.0);
    if (spec.back() <= tol.approx_tol && c.norm() > tol.approx_tol) ++violations;
  }

  const double dt = seconds_since(t0);
  ok = violations == 0 && dt < 60.0;
  std::printf("           600 instances searched, %d violations, %.2fs\n", violations, dt);
  verdict_line(7, "nonpositive defects vanish under purity or finite wandering rank", ok);
}

TEST_CASE("criterion 8: kernel transport routes and intertwining") {
  bool ok = true;
  double worst_route = 0.0, worst_intertwine = 0.0;
  std::uint64_t seed = 5000;
  int accepted = 0;
  while (accepted < 20) {
    const Index dim = 2 + Index(seed % 2);
    const Index rank = 1 + Index(seed % std::uint64_t(dim - 1));
    const BCLData data = random_bcl(dim, rank, seed++);
    const int factor = 1 + int(seed % 2);
    const PurityFlags purity = declared_purity(data);
    if (!(factor == 1 ? purity.v1 : purity.v2)) continue;
    ++accepted;
    const TruncatedPair pair = bcl_truncated_pair(data, 24);
    const Subspace w = wandering_subspace(pair, factor == 1 ? Factor::one : Factor::two);
    SeededGaussian rng(seed ^ 0xABCDEFu);
    Vector mix(w.dim());
    for (Index i = 0; i < w.dim(); ++i) mix(i) = Complex(rng.gaussian(), rng.gaussian());
    const Vector eta = (w.basis * mix).normalized();

    for (const Complex& point : kKernelPoints) {
      const KernelActionResult res = intertwiner_on_kernel(pair, factor, point, eta, 20);
      worst_route = std::max(worst_route, res.route_difference - res.tail_bound);
      ok = ok && res.route_difference <= res.tail_bound + 1e-6;
    }

    // Transport intertwines the product shift with multiplication by z Theta.
    const Index fiber = pair.dim() > 0 ? wandering_subspace(pair, Factor::product).dim() : 0;
    GradedVector f = random_graded(fiber, 3, rng);
    GradedVector zf(fiber);
    for (int m = 0; m <= f.degree(); ++m) zf.set_coeff(m + 1, f.coeff(m));
    const int out = 12;
    const GradedVector lhs = intertwiner_map(pair, factor, zf, out);
    const GradedVector img = intertwiner_map(pair, factor, f, out);
    const AnalyticSymbolSeries theta = theta_series(pair, factor, out);
    for (int m = 0; m <= out; ++m) {
      Vector want = Vector::Zero(lhs.dim);
      for (int k = 0; k + 1 <= m; ++k) want += theta.at(k) * img.coeff(m - 1 - k);
      worst_intertwine = std::max(worst_intertwine, (lhs.coeff(m) - want).norm());
    }
    ok = ok && worst_intertwine <= 1e-8;
  }
  std::printf("           worst route excess %.2e, worst intertwining gap %.2e\n",
              std::max(worst_route, 0.0), worst_intertwine);
  verdict_line(8, "closed-formula kernel transport matches the definitional route", ok);
}

TEST_CASE("criterion 9: resolvent bridge identity") {
  bool ok = true;
  double worst = 0.0;
  std::uint64_t seed = 6000;
  for (int k = 0; k < 20; ++k) {
    const Index dim = 3 + Index(k % 2);
    const Index rank = 1 + Index(seed % std::uint64_t(dim - 1));
    const TruncatedPair pair = bcl_truncated_pair(random_bcl(dim, rank, seed++), 16);
    for (int factor : {1, 2}) {
      const double r = characteristic_bridge_residual(pair, factor, 10);
      worst = std::max(worst, r);
      ok = ok && r <= 1e-9;
    }
  }
  std::printf("           worst coefficientwise residual %.2e over 20 instances\n", worst);
  verdict_line(9, "characteristic series reproduces the compressed resolvent", ok);
}

TEST_CASE("criterion 10: invariant-subspace fixtures and stability") {
  const auto t0 = Clock::now();
  bool ok = true;

  const auto count_near = [](const std::vector<double>& xs, double target, double tol) {
    int c = 0;
    for (double x : xs)
      if (std::abs(x - target) <= tol) ++c;
    return c;
  };

  const DefectReport full =
      defect_verdict(restricted_pair(span_to_degree({BivariatePoly::monomial(0, 0)}, 10)));
  ok = ok && full.verdicts.all() && count_near(full.spectrum, 1.0, 1e-8) == 1 &&
       count_near(full.spectrum, 0.0, 1e-8) == int(full.spectrum.size()) - 1;

  const DefectReport shifted =
      defect_verdict(restricted_pair(span_to_degree({BivariatePoly::monomial(1, 0)}, 10)));
  ok = ok && shifted.verdicts.doubly_commuting && count_near(shifted.spectrum, 1.0, 1e-8) == 1 &&
       count_near(shifted.spectrum, 0.0, 1e-8) == int(shifted.spectrum.size()) - 1;

  const std::vector<BivariatePoly> corner = {BivariatePoly::monomial(1, 0),
                                             BivariatePoly::monomial(0, 1)};
  const DefectReport c10 = defect_verdict(restricted_pair(span_to_degree(corner, 10)));
  const DefectReport c12 = defect_verdict(restricted_pair(span_to_degree(corner, 12)));
  ok = ok && !c10.verdicts.nonneg && c10.spectrum.front() <= -0.1;
  ok = ok && std::abs(c10.spectrum.front() - c12.spectrum.front()) <= 1e-4 &&
       std::abs(c10.spectrum.back() - c12.spectrum.back()) <= 1e-4;

  const double dt = seconds_since(t0);
  ok = ok && dt < 20.0;
  std::printf("           rank-one, shifted, and corner fixtures as enumerated, %.2fs\n", dt);
  verdict_line(10, "restricted monomial models reproduce the frozen spectra", ok);
}

TEST_CASE("criterion 11: equivalence soundness") {
  bool ok = true;

  // 50 conjugated instances must certify with a working witness.
  std::uint64_t seed = 7000;
  int certified = 0;
  for (int k = 0; k < 50; ++k) {
    const Index dim = 2 + Index(k % 3);
    const Index rank = 1 + Index(seed % std::uint64_t(dim - 1));
    const InvariantTuple a = invariant_tuple(build_multipliers(random_bcl(dim, rank, seed++)));
    SeededGaussian rng(seed ^ 0x1234567u);
    const Matrix z = haar_unitary(a.dim, rng);
    const InvariantTuple b{a.dim, z * a.C1 * z.adjoint(), z * a.C2 * z.adjoint()};
    const EquivalenceReport rep = simultaneous_unitary_equiv(a, b);
    if (rep.verdict == Verdict::yes && rep.witness_residual <= 1e-6) ++certified;
  }
  ok = ok && certified == 50;

  // Fixed distinct fixture: rotation exchange data is not equivalent to the
  // transposition, and a short word proves it.
  BCLData swap;
  swap.dim = 2;
  swap.U = (Matrix(2, 2) << 0, 1, 1, 0).finished();
  swap.P = (Matrix(2, 2) << 1, 0, 0, 0).finished();
  BCLData rotation = swap;
  rotation.U = (Matrix(2, 2) << 0, 1, -1, 0).finished();
  const PairEquivalenceReport fixed =
      pair_equivalence(build_multipliers(swap), build_multipliers(rotation));
  ok = ok && fixed.verdict == Verdict::no &&
       fixed.coefficient_route.distinguishing_word.size() <= 3;

  // The verdict must not move under joint conjugation of either input.
  SeededGaussian rng(99);
  const Matrix z = haar_unitary(2, rng);
  BCLData swap_conj = swap;
  swap_conj.U = z * swap.U * z.adjoint();
  swap_conj.P = z * swap.P * z.adjoint();
  BCLData rot_conj = rotation;
  rot_conj.U = z * rotation.U * z.adjoint();
  rot_conj.P = z * rotation.P * z.adjoint();
  ok = ok &&
       pair_equivalence(build_multipliers(swap_conj), build_multipliers(rotation)).verdict ==
           Verdict::no &&
       pair_equivalence(build_multipliers(swap), build_multipliers(rot_conj)).verdict ==
           Verdict::no &&
       pair_equivalence(build_multipliers(swap_conj), build_multipliers(swap)).verdict ==
           Verdict::yes;

  std::printf("           50/50 certified, fixed fixture separated by a word of length <= 3\n");
  verdict_line(11, "joint unitary equivalence is certified or refuted correctly", ok);
}
