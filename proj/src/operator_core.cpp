#include "qcm/operator_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

namespace qcm {

ComplexMatrix unvec(const ComplexVector& v, Eigen::Index dim) {
    if (v.size() != dim * dim) throw Error(ErrorCode::BadShape, "unvec: size is not dim^2");
    return v.reshaped(dim, dim);
}

ComplexMatrix identity(Eigen::Index dim) { return ComplexMatrix::Identity(dim, dim); }

bool allFinite(const ComplexMatrix& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        if (!std::isfinite(m.data()[i].real()) || !std::isfinite(m.data()[i].imag())) return false;
    }
    return true;
}

void requireHermitian(const ComplexMatrix& m, double hermTol, const char* what) {
    if (m.rows() != m.cols() || m.rows() < 1) throw Error(ErrorCode::BadShape, std::string(what) + " is not square");
    const double defect = hermiticityDefect(m);
    if (!(defect <= hermTol)) {
        throw Error(ErrorCode::NonHermitian,
                    std::string(what) + " deviates from its adjoint by " + std::to_string(defect));
    }
}

std::vector<SpectralPair> spectralDecompose(const HermitianMatrix& m, const Tolerances& tol) {
    requireHermitian(m, tol.herm);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitianPart(m));
    const Eigen::VectorXd& values = es.eigenvalues();
    const ComplexMatrix& vectors = es.eigenvectors();

    std::vector<SpectralPair> out;
    Eigen::Index start = 0;
    const Eigen::Index n = values.size();
    while (start < n) {
        Eigen::Index end = start + 1;
        while (end < n && values(end) - values(end - 1) < tol.degeneracy) ++end;
        const auto block = vectors.middleCols(start, end - start);
        out.push_back({values.segment(start, end - start).mean(), block * block.adjoint()});
        start = end;
    }
    return out;
}

Eigen::VectorXd hermitianEigenvalues(const HermitianMatrix& m) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitianPart(m), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

double minEigenvalue(const HermitianMatrix& m) {
    if (m.rows() == 2) {
        const double a = m(0, 0).real();
        const double d = m(1, 1).real();
        const Complex b = 0.5 * (m(0, 1) + std::conj(m(1, 0)));
        const double half = 0.5 * (a - d);
        return 0.5 * (a + d) - std::sqrt(half * half + std::norm(b));
    }
    return hermitianEigenvalues(m)(0);
}

HermitianMatrix matrixFunctionOnSupport(const HermitianMatrix& m, const std::function<double(double)>& f,
                                        double zeroTol, const Tolerances& tol) {
    requireHermitian(m, tol.herm);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitianPart(m));
    const Eigen::VectorXd& values = es.eigenvalues();
    if (values(0) < -tol.psd) {
        throw Error(ErrorCode::NotPSD, "eigenvalue " + std::to_string(values(0)) + " below -psdTol");
    }
    Eigen::VectorXd mapped(values.size());
    for (Eigen::Index i = 0; i < values.size(); ++i) mapped(i) = values(i) > zeroTol ? f(values(i)) : 0.0;
    const ComplexMatrix& v = es.eigenvectors();
    return v * mapped.cast<Complex>().asDiagonal() * v.adjoint();
}

double traceNorm(const HermitianMatrix& m) { return hermitianEigenvalues(m).cwiseAbs().sum(); }

ComplexMatrix expmScaled(const ComplexMatrix& a) {
    if (a.rows() != a.cols()) throw Error(ErrorCode::BadShape, "expmScaled needs a square matrix");
    if (!allFinite(a)) throw Error(ErrorCode::NonFinite, "expmScaled input has NaN or Inf entries");
    return a.exp();
}

Superoperator vectorizeSuperoperator(const MatrixMap& action, Eigen::Index dim) {
    const Eigen::Index n = dim * dim;
    Superoperator s{dim, ComplexMatrix::Zero(n, n)};
    ComplexMatrix unit = ComplexMatrix::Zero(dim, dim);
    for (Eigen::Index col = 0; col < dim; ++col) {
        for (Eigen::Index row = 0; row < dim; ++row) {
            unit(row, col) = 1.0;
            s.matrix.col(col * dim + row) = vec(action(unit));
            unit(row, col) = 0.0;
        }
    }
    return s;
}

double superoperatorResidual(const Superoperator& s, const MatrixMap& action) {
    double worst = 0.0;
    ComplexMatrix unit = ComplexMatrix::Zero(s.dim, s.dim);
    for (Eigen::Index col = 0; col < s.dim; ++col) {
        for (Eigen::Index row = 0; row < s.dim; ++row) {
            unit(row, col) = 1.0;
            worst = std::max(worst, (s.apply(unit) - action(unit)).cwiseAbs().maxCoeff());
            unit(row, col) = 0.0;
        }
    }
    return worst;
}

namespace {

ComplexMatrix clipNegative(const ComplexMatrix& h, double trace, double clipTol, RepairStats* stats) {
    const double lowest = minEigenvalue(h);
    if (lowest >= 0.0) return h;
    if (clipTol < 0.0) clipTol = 1e-6 * trace;
    if (stats) {
        ++stats->repairs;
        if (-lowest > clipTol) ++stats->warnings;
        stats->maxClip = std::max(stats->maxClip, -lowest);
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
    const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
    const double kept = clipped.sum();
    if (!(kept > 0.0)) throw Error(ErrorCode::ZeroTrace, "nothing left after clipping negative eigenvalues");
    const ComplexMatrix& v = es.eigenvectors();
    ComplexMatrix out = v * (clipped * (trace / kept)).cast<Complex>().asDiagonal() * v.adjoint();
    return hermitianPart(out);
}

}  // namespace

DensityMatrix projectToDensity(const HermitianMatrix& m, double clipTol, RepairStats* stats) {
    const double trace = m.trace().real();
    if (!(trace > 0.0)) throw Error(ErrorCode::ZeroTrace, "projectToDensity needs a positive trace");
    ComplexMatrix h = hermitianPart(m);
    h = clipNegative(h, trace, clipTol, stats);
    return h / h.trace().real();
}

NNAPState repairPositivity(const HermitianMatrix& m, double clipTol, RepairStats* stats) {
    const double trace = m.trace().real();
    if (!(trace > 0.0)) throw Error(ErrorCode::ZeroTrace, "repairPositivity needs a positive trace");
    return clipNegative(hermitianPart(m), trace, clipTol, stats);
}

void requireDensity(const ComplexMatrix& m, const Tolerances& tol, const char* what) {
    requireHermitian(m, tol.herm, what);
    const double lowest = hermitianEigenvalues(m)(0);
    if (lowest < -tol.psd) {
        throw Error(ErrorCode::NotPSD, std::string(what) + " has eigenvalue " + std::to_string(lowest));
    }
    const double trace = m.trace().real();
    if (std::abs(trace - 1.0) > tol.trace) {
        throw Error(ErrorCode::BadShape, std::string(what) + " has trace " + std::to_string(trace));
    }
}

}  // namespace qcm
