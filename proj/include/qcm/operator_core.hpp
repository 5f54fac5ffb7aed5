#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "qcm/errors.hpp"

namespace qcm {

template <typename Real>
using ComplexMatrixT = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using ComplexVectorT = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

using Complex = std::complex<double>;
using ComplexMatrix = ComplexMatrixT<double>;
using ComplexVector = ComplexVectorT<double>;

// Role aliases. Invariants are checked at API boundaries, not by the type system.
using HermitianMatrix = ComplexMatrix;
using DensityMatrix = ComplexMatrix;
using NNAPState = ComplexMatrix;

struct Tolerances {
    double herm = 1e-10;
    double psd = 1e-10;
    double trace = 1e-8;
    double eigRel = 1e-10;
    double degeneracy = 1e-8;
    double zero = 1e-12;
    double jump = 1e-12;
    double support = 1e-10;
};

inline constexpr Tolerances kDefaultTolerances{};

// ---------------------------------------------------------------------------
// Expression helpers

template <typename Derived>
auto hermitianPart(const Eigen::MatrixBase<Derived>& m) {
    using Scalar = typename Derived::Scalar;
    return (Scalar(0.5) * (m + m.adjoint())).eval();
}

template <typename Derived>
typename Eigen::NumTraits<typename Derived::Scalar>::Real hermiticityDefect(
    const Eigen::MatrixBase<Derived>& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

/// Tr{a b} without forming the product.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar traceProduct(const Eigen::MatrixBase<DerivedA>& a,
                                       const Eigen::MatrixBase<DerivedB>& b) {
    return a.cwiseProduct(b.transpose()).sum();
}

/// Re Tr{a tau}, the pairing <a, tau> for Hermitian arguments.
template <typename DerivedA, typename DerivedB>
typename Eigen::NumTraits<typename DerivedA::Scalar>::Real expectation(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& tau) {
    return std::real(traceProduct(a, tau));
}

/// Column-stacking vectorization: vec(A X B) = (B^T kron A) vec(X).
template <typename Derived>
ComplexVectorT<typename Eigen::NumTraits<typename Derived::Scalar>::Real> vec(
    const Eigen::MatrixBase<Derived>& m) {
    using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
    const ComplexMatrixT<Real> plain = m;
    return plain.reshaped();
}

ComplexMatrix unvec(const ComplexVector& v, Eigen::Index dim);

ComplexMatrix identity(Eigen::Index dim);

bool allFinite(const ComplexMatrix& m);

// ---------------------------------------------------------------------------
// Spectral tools

struct SpectralPair {
    double eigenvalue;
    HermitianMatrix projector;
};

void requireHermitian(const ComplexMatrix& m, double hermTol, const char* what = "matrix");

/// Ascending eigenvalues; eigenvalues closer than `tol.degeneracy` share a projector.
std::vector<SpectralPair> spectralDecompose(const HermitianMatrix& m,
                                            const Tolerances& tol = kDefaultTolerances);

/// Eigenvalues of the Hermitian part, ascending.
Eigen::VectorXd hermitianEigenvalues(const HermitianMatrix& m);

double minEigenvalue(const HermitianMatrix& m);

/// f applied to the eigenvalues above zeroTol; the rest are sent to 0.
HermitianMatrix matrixFunctionOnSupport(const HermitianMatrix& m, const std::function<double(double)>& f,
                                        double zeroTol = kDefaultTolerances.zero,
                                        const Tolerances& tol = kDefaultTolerances);

/// Trace norm of a Hermitian matrix.
double traceNorm(const HermitianMatrix& m);

// ---------------------------------------------------------------------------
// Exponentials and superoperators

/// exp(A) by scaling and squaring with a Pade approximant.
ComplexMatrix expmScaled(const ComplexMatrix& a);

/// A linear map on d x d matrices stored as a d^2 x d^2 matrix acting on vec(X).
struct Superoperator {
    Eigen::Index dim = 0;
    ComplexMatrix matrix;

    ComplexMatrix apply(const ComplexMatrix& x) const { return unvec(matrix * vec(x), dim); }
};

using MatrixMap = std::function<ComplexMatrix(const ComplexMatrix&)>;

Superoperator vectorizeSuperoperator(const MatrixMap& action, Eigen::Index dim);

/// Largest entrywise mismatch between s.apply(E_ij) and action(E_ij) over matrix units.
double superoperatorResidual(const Superoperator& s, const MatrixMap& action);

// ---------------------------------------------------------------------------
// Positivity repair

struct RepairStats {
    std::size_t repairs = 0;   ///< steps where clipping changed the state
    std::size_t warnings = 0;  ///< clips deeper than the warning threshold
    double maxClip = 0.0;      ///< most negative eigenvalue seen, as a positive number
};

/// Hermitize, clip negative eigenvalues to zero, rescale to unit trace.
/// A clip deeper than clipTol (default 1e-6 * trace) counts as a warning.
DensityMatrix projectToDensity(const HermitianMatrix& m, double clipTol = -1.0, RepairStats* stats = nullptr);

/// As projectToDensity, but the original trace is kept.
NNAPState repairPositivity(const HermitianMatrix& m, double clipTol = -1.0, RepairStats* stats = nullptr);

void requireDensity(const ComplexMatrix& m, const Tolerances& tol = kDefaultTolerances,
                    const char* what = "state");

}  // namespace qcm
