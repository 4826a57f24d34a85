#pragma once

// Dense complex linear algebra used everywhere else: orthonormal bases,
// projectors, orthogonal complements, Hermitian spectra, operator
// classification. Eigen supplies the decompositions; every routine here fixes
// the rank thresholds and tolerance semantics the rest of the library relies
// on.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace isopair {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

// Two-level tolerance scheme: eq_tol for identities that hold to rounding
// (rank cuts, adjoint symmetry), approx_tol for model-level verdicts
// (positivity bands, truncation-limited residuals).
struct TolerancePolicy {
  double eq_tol = 1e-9;
  double approx_tol = 1e-6;

  void validate() const {
    if (!(eq_tol > 0.0) || !(eq_tol <= approx_tol) || !(approx_tol < 1.0))
      throw std::invalid_argument("TolerancePolicy: need 0 < eq_tol <= approx_tol < 1");
  }
};

inline bool finite_entries(const Matrix& m) {
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
  return true;
}

// A subspace of C^ambient carried as a matrix with orthonormal columns.
// dim() == 0 is a legitimate state (basis is ambient x 0).
struct Subspace {
  Index ambient = 0;
  Matrix basis;  // ambient x dim, orthonormal columns

  Subspace() = default;
  Subspace(Index ambient_dim, Matrix b) : ambient(ambient_dim), basis(std::move(b)) {
    if (basis.rows() != ambient)
      throw std::invalid_argument("Subspace: basis rows do not match ambient dimension");
  }
  static Subspace zero(Index ambient_dim) { return Subspace(ambient_dim, Matrix(ambient_dim, 0)); }
  Index dim() const { return basis.cols(); }
};

// Column span of `vectors` as an orthonormal basis. Rank cut: singular values
// below eq_tol * sigma_max are treated as zero, so a numerically zero input
// yields the zero subspace rather than noise directions.
inline Subspace orthonormal_basis(const Matrix& vectors, const TolerancePolicy& tol = {}) {
  tol.validate();
  if (!finite_entries(vectors)) throw std::invalid_argument("orthonormal_basis: non-finite entry");
  if (vectors.cols() == 0) return Subspace::zero(vectors.rows());
  Eigen::JacobiSVD<Matrix> svd(vectors, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  // Operators here live at unit scale, so the cut gets an absolute floor:
  // a matrix that is rounding noise must have an empty image, even though
  // its largest singular value dominates the rest.
  const double cut = tol.eq_tol * std::max(1.0, sv.size() ? sv(0) : 0.0);
  Index rank = 0;
  while (rank < sv.size() && sv(rank) > cut && sv(rank) > 0.0) ++rank;
  return Subspace(vectors.rows(), svd.matrixU().leftCols(rank));
}

inline Matrix projector(const Subspace& s) {
  return s.basis * s.basis.adjoint();
}

// Distance between subspaces as projector gap; this is the notion of subspace
// equality used throughout (distance <= eq_tol).
inline double subspace_distance(const Subspace& a, const Subspace& b) {
  if (a.ambient != b.ambient)
    throw std::invalid_argument("subspace_distance: ambient dimensions differ");
  return (projector(a) - projector(b)).norm();
}

// Orthogonal complement of t inside s. Demands t ⊆ s up to eq_tol and returns
// a basis of s ⊖ t; complement dimension must come out as dim s - dim t.
inline Subspace ortho_complement_within(const Subspace& s, const Subspace& t,
                                        const TolerancePolicy& tol = {}) {
  tol.validate();
  if (s.ambient != t.ambient)
    throw std::invalid_argument("ortho_complement_within: ambient dimensions differ");
  if (t.dim() > 0) {
    const double residual = (t.basis - projector(s) * t.basis).norm();
    if (residual > tol.eq_tol * (1.0 + std::sqrt(double(t.dim()))))
      throw std::invalid_argument(
          "ortho_complement_within: second subspace not contained in first (residual " +
          std::to_string(residual) + ")");
  }
  Matrix reduced = s.basis - projector(t) * s.basis;
  Subspace comp = orthonormal_basis(reduced, tol);
  if (comp.dim() != s.dim() - t.dim())
    throw std::runtime_error("ortho_complement_within: complement dimension mismatch");
  return comp;
}

// Eigenvalues of a Hermitian matrix, nondecreasing. Refuses matrices that are
// not Hermitian within eq_tol relative to their size.
inline std::vector<double> hermitian_spectrum(const Matrix& m, const TolerancePolicy& tol = {}) {
  tol.validate();
  if (m.rows() != m.cols()) throw std::invalid_argument("hermitian_spectrum: matrix not square");
  if (m.rows() == 0) return {};
  const double asym = (m - m.adjoint()).norm();
  if (asym > tol.eq_tol * (1.0 + m.norm()))
    throw std::invalid_argument("hermitian_spectrum: matrix not Hermitian (defect " +
                                std::to_string(asym) + ")");
  Eigen::SelfAdjointEigenSolver<Matrix> es((m + Matrix(m.adjoint())) / 2.0);
  std::vector<double> out(es.eigenvalues().data(), es.eigenvalues().data() + m.rows());
  return out;
}

struct OperatorClass {
  bool isometry = false;
  bool unitary = false;
  bool projection = false;
  bool self_adjoint = false;
};

// Flags are independent checks at eq_tol, relative to matrix scale where the
// identity being tested scales (projection, self-adjointness).
inline OperatorClass operator_class(const Matrix& m, const TolerancePolicy& tol = {}) {
  tol.validate();
  OperatorClass c;
  const Index n = m.rows(), k = m.cols();
  const double scale = 1.0 + m.norm();
  c.isometry = (m.adjoint() * m - Matrix::Identity(k, k)).norm() <= tol.eq_tol * scale;
  if (n == k) {
    c.unitary = c.isometry &&
                (m * m.adjoint() - Matrix::Identity(n, n)).norm() <= tol.eq_tol * scale;
    c.self_adjoint = (m - m.adjoint()).norm() <= tol.eq_tol * scale;
    c.projection = c.self_adjoint && (m * m - m).norm() <= tol.eq_tol * scale;
  }
  return c;
}

// Null space of m as a subspace of its column domain.
inline Subspace kernel(const Matrix& m, const TolerancePolicy& tol = {}) {
  tol.validate();
  if (m.rows() == 0 || m.cols() == 0)
    return Subspace(m.cols(), Matrix::Identity(m.cols(), m.cols()));
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // Same absolute floor as orthonormal_basis: the kernel of a matrix that is
  // rounding noise is the whole domain.
  const double cut = tol.eq_tol * std::max(1.0, sv.size() ? sv(0) : 0.0);
  Index rank = 0;
  while (rank < sv.size() && sv(rank) > cut && sv(rank) > 0.0) ++rank;
  return Subspace(m.cols(), svd.matrixV().rightCols(m.cols() - rank));
}

// Column space of m.
inline Subspace image(const Matrix& m, const TolerancePolicy& tol = {}) {
  return orthonormal_basis(m, tol);
}

}  // namespace isopair
