#include "qcm/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include <Eigen/SVD>

namespace qcm {

TestFunction TestFunction::constant(double kappa, double t) { return TestFunction{{0.0, t}, {kappa}}; }

void TestFunction::validate() const {
    if (breakpoints.size() < 2 || values.size() + 1 != breakpoints.size()) {
        throw Error(ErrorCode::BadConfig, "test function needs p+1 breakpoints for p values");
    }
    if (breakpoints.front() != 0.0) throw Error(ErrorCode::BadConfig, "test function must start at t = 0");
    for (std::size_t i = 1; i < breakpoints.size(); ++i) {
        if (!(breakpoints[i] > breakpoints[i - 1])) throw Error(ErrorCode::BadConfig, "breakpoints must ascend");
    }
}

double TestFunction::valueAt(double t) const {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (t >= breakpoints[i] && t < breakpoints[i + 1]) return values[i];
    }
    return 0.0;
}

StateSeries propagateMaster(const MeasurementModel& model, const DensityMatrix& rho0,
                            const std::vector<double>& times, const Tolerances& tol) {
    requireDensity(rho0, tol, "rho0");
    StateSeries out;
    const ComplexMatrix& gen = model.liouvillianMatrix().matrix;
    std::map<double, ComplexMatrix> propagators;
    ComplexVector current = vec(rho0);
    double last = 0.0;
    for (double t : times) {
        if (t < last) throw Error(ErrorCode::BadConfig, "propagateMaster times must ascend from 0");
        const double step = t - last;
        if (step > 0.0) {
            auto it = propagators.find(step);
            if (it == propagators.end()) it = propagators.emplace(step, expmScaled(step * gen)).first;
            current = it->second * current;
        }
        out.times.push_back(t);
        out.states.push_back(hermitianPart(unvec(current, model.dim())));
        last = t;
    }
    return out;
}

DensityMatrix aprioriState(const MeasurementModel& model, const DensityMatrix& rho0, double t) {
    return propagateMaster(model, rho0, {t}).states.front();
}

ComplexMatrix characteristicOperator(const MeasurementModel& model, const DensityMatrix& rho0,
                                     const TestFunction& k) {
    k.validate();
    ComplexVector current = vec(rho0);
    for (std::size_t i = 0; i < k.values.size(); ++i) {
        const double span = k.breakpoints[i + 1] - k.breakpoints[i];
        current = expmScaled(span * generatorKMatrix(model, k.values[i]).matrix) * current;
    }
    return unvec(current, model.dim());
}

Complex characteristicFunctional(const MeasurementModel& model, const DensityMatrix& rho0, const TestFunction& k,
                                 const ComplexMatrix& a) {
    return traceProduct(a, characteristicOperator(model, rho0, k));
}

Complex incrementCharacteristic(const MeasurementModel& model, const DensityMatrix& rho0, double kappa, double t) {
    if (t < 0.0) throw Error(ErrorCode::BadConfig, "incrementCharacteristic needs t >= 0");
    if (t == 0.0) return rho0.trace();
    return characteristicOperator(model, rho0, TestFunction::constant(kappa, t)).trace();
}

namespace {

/// Right null space of m as columns, via SVD.
ComplexMatrix nullSpace(const ComplexMatrix& m) {
    Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullV);
    const Eigen::VectorXd& s = svd.singularValues();
    const double cutoff = 1e-10 * std::max(1.0, s(0));
    Eigen::Index rank = 0;
    while (rank < s.size() && s(rank) > cutoff) ++rank;
    return svd.matrixV().rightCols(m.cols() - rank);
}

std::optional<Equilibrium> finish(const MeasurementModel& model, ComplexMatrix candidate, bool nonUnique) {
    candidate = hermitianPart(candidate);
    const double trace = candidate.trace().real();
    if (std::abs(trace) < 1e-12) return std::nullopt;
    candidate /= trace;
    if (minEigenvalue(candidate) < -1e-10) return std::nullopt;
    Equilibrium eq{candidate, nonUnique, traceNorm(hermitianPart(liouvillian(model, candidate)))};
    if (eq.residual > 1e-8) return std::nullopt;
    return eq;
}

}  // namespace

std::optional<Equilibrium> equilibriumState(const MeasurementModel& model) {
    const ComplexMatrix& gen = model.liouvillianMatrix().matrix;
    const Eigen::Index d = model.dim();
    const ComplexMatrix right = nullSpace(gen);
    if (right.cols() == 0) return std::nullopt;

    if (right.cols() == 1) {
        ComplexMatrix x = unvec(right.col(0), d);
        // Fix the arbitrary phase so that the trace is real and positive.
        const Complex tr = x.trace();
        if (std::abs(tr) < 1e-12) return std::nullopt;
        x *= std::conj(tr) / std::abs(tr);
        return finish(model, x, false);
    }

    // Degenerate kernel: project the maximally mixed state onto the Hermitian part of the kernel.
    std::vector<ComplexVector> basis;
    auto addOrthonormal = [&basis](ComplexVector v) {
        for (const ComplexVector& b : basis) v -= b.dot(v).real() * b;
        const double n = v.norm();
        if (n > 1e-9) basis.push_back(v / n);
    };
    for (Eigen::Index c = 0; c < right.cols(); ++c) {
        const ComplexMatrix x = unvec(right.col(c), d);
        addOrthonormal(vec(hermitianPart(x)));
        addOrthonormal(vec(hermitianPart(ComplexMatrix(Complex(0.0, -1.0) * x))));
    }
    const ComplexVector target = vec(ComplexMatrix(identity(d) / static_cast<double>(d)));
    ComplexVector projected = ComplexVector::Zero(d * d);
    for (const ComplexVector& b : basis) projected += b.dot(target).real() * b;
    if (auto eq = finish(model, unvec(projected, d), true)) return eq;

    // Otherwise the ergodic projection of the maximally mixed state, which is always a state.
    const ComplexMatrix left = nullSpace(gen.adjoint());
    const ComplexMatrix overlap = left.adjoint() * right;
    const ComplexVector coeffs = overlap.fullPivLu().solve(left.adjoint() * target);
    return finish(model, unvec(right * coeffs, d), true);
}

}  // namespace qcm
