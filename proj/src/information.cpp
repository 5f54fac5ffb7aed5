#include "qcm/information.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qcm/json_io.hpp"

namespace qcm {

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

namespace {

Eigen::SelfAdjointEigenSolver<ComplexMatrix> eigen(const ComplexMatrix& m) {
    return Eigen::SelfAdjointEigenSolver<ComplexMatrix>(hermitianPart(m));
}

void requirePSD(const Eigen::VectorXd& eigenvalues, const Tolerances& tol, const char* what) {
    if (eigenvalues.size() > 0 && eigenvalues.minCoeff() < -tol.psd) {
        throw Error(ErrorCode::NotPSD, std::string(what) + " has a negative eigenvalue " +
                                           std::to_string(eigenvalues.minCoeff()));
    }
}

double realTrace(const ComplexMatrix& m) { return m.trace().real(); }

/// Kernel projector of a PSD matrix: eigenvectors with eigenvalue <= cutoff.
ComplexMatrix kernelProjector(const Eigen::SelfAdjointEigenSolver<ComplexMatrix>& es, double cutoff) {
    const Eigen::Index d = es.eigenvalues().size();
    ComplexMatrix p = ComplexMatrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        if (es.eigenvalues()(i) <= cutoff) p += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
    }
    return p;
}

Estimate mixtureOf(const std::vector<double>& values) {
    RunningStats stats;
    for (double v : values) stats.add(v);
    return stats.estimate();
}

}  // namespace

double vonNeumannEntropy(const DensityMatrix& tau, const Tolerances& tol) {
    const Eigen::VectorXd lambda = hermitianEigenvalues(tau);
    requirePSD(lambda, tol, "state");
    double s = 0.0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) s -= xlogx(lambda(i));
    return std::max(0.0, s);
}

double quantumRelativeEntropy(const DensityMatrix& x, const DensityMatrix& y, const Tolerances& tol) {
    const auto ex = eigen(x);
    const auto ey = eigen(y);
    requirePSD(ex.eigenvalues(), tol, "first argument");
    requirePSD(ey.eigenvalues(), tol, "second argument");
    const Eigen::Index d = x.rows();
    // overlap(i, j) = |<u_j | v_i>|^2
    const Eigen::MatrixXd overlap = (ey.eigenvectors().adjoint() * ex.eigenvectors()).cwiseAbs2().transpose();
    double value = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        const double lambda = ex.eigenvalues()(i);
        if (lambda <= tol.support) continue;
        double kernelWeight = 0.0;
        double logTerm = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) {
            const double mu = ey.eigenvalues()(j);
            if (mu <= tol.support) {
                kernelWeight += overlap(i, j);
            } else {
                logTerm += overlap(i, j) * std::log(mu);
            }
        }
        if (kernelWeight > tol.support) return kInfinity;
        value += xlogx(lambda) - lambda * logTerm;
    }
    return std::max(0.0, value);
}

double linearEntropy(const DensityMatrix& tau) {
    return realTrace(tau) - std::real(traceProduct(tau, tau));
}

Estimate aposterioriPurity(const std::vector<DensityMatrix>& states) {
    RunningStats stats;
    for (const DensityMatrix& s : states) stats.add(linearEntropy(s));
    return stats.estimate();
}

PurityRateTerms purityRateTerms(const MeasurementModel& model, const DensityMatrix& rho, const Tolerances& tol) {
    PurityRateTerms out;
    const ComplexMatrix root = matrixFunctionOnSupport(rho, [](double x) { return std::sqrt(x); }, tol.zero, tol);
    const ComplexMatrix rho2 = rho * rho;

    for (const ComplexMatrix& l : model.Ls()) {
        const ComplexMatrix ldl = l.adjoint() * l;
        out.p1 += 2.0 * (std::real(traceProduct(rho, ComplexMatrix(ldl * rho))) -
                         std::real(traceProduct(root, ComplexMatrix(l.adjoint() * rho * l * root))));
    }

    const Eigen::Index d = model.dim();
    const ComplexMatrix a = model.driftObservable() - meanDrift(model, rho) * identity(d);
    out.p2 = std::real((root * a * rho * a * root).trace());

    for (std::size_t k = 0; k < model.amplitudes().size(); ++k) {
        const Amplitude& amp = model.amplitudes()[k];
        const double intensity = jumpIntensity(model, k, rho);
        const ComplexMatrix jumped = jumpMapAt(model, k, rho);
        const double effectRho2 = expectation(amp.effect, rho2);
        const double purityRho = std::real(traceProduct(rho, rho));
        if (intensity > tol.jump) {
            const ComplexMatrix x = root * amp.effect * root;
            const ComplexMatrix centered = x - intensity * rho;
            const double second = std::real(traceProduct(centered, centered)) +
                                  std::real(traceProduct(jumped, jumped)) - std::real(traceProduct(x, x));
            out.p3 += amp.mu * second / intensity;
            out.p3FirstForm +=
                amp.mu * (std::real(traceProduct(jumped, jumped)) / intensity - 2.0 * effectRho2 + intensity * purityRho);
        } else {
            out.p3FirstForm += amp.mu * (-2.0 * effectRho2 + intensity * purityRho);
        }
    }
    return out;
}

PurityRates purityRates(const MeasurementModel& model, const std::vector<DensityMatrix>& states,
                        const Tolerances& tol) {
    RunningStats p1, p2, p3, p3f, total;
    for (const DensityMatrix& s : states) {
        const PurityRateTerms t = purityRateTerms(model, s, tol);
        p1.add(t.p1);
        p2.add(t.p2);
        p3.add(t.p3);
        p3f.add(t.p3FirstForm);
        total.add(t.p1 - t.p2 - t.p3);
    }
    return PurityRates{p1.estimate(), p2.estimate(), p3.estimate(), p3f.estimate(), total.estimate()};
}

double entropyRateD1(const MeasurementModel& model, const DensityMatrix& tau, const Tolerances& tol) {
    if (model.Ls().empty()) return 0.0;
    const auto es = eigen(tau);
    requirePSD(es.eigenvalues(), tol, "state");
    const ComplexMatrix kernel = kernelProjector(es, tol.zero);
    const ComplexMatrix logTau =
        matrixFunctionOnSupport(tau, [](double x) { return std::log(x); }, tol.zero, tol);
    double value = 0.0;
    double leak = 0.0;
    for (const ComplexMatrix& l : model.Ls()) {
        const ComplexMatrix sandwich = l * tau * l.adjoint();
        leak += expectation(kernel, sandwich);
        value += std::real(traceProduct(ComplexMatrix(l.adjoint() * l * tau - sandwich), logTau));
    }
    // Weight moved into ker(tau) meets ln 0.
    if (leak > tol.support) return kInfinity;
    return value;
}

double entropyRateD2(const MeasurementModel& model, const DensityMatrix& tau, const Tolerances& tol) {
    const std::vector<SpectralPair> spec = spectralDecompose(tau, tol);
    const HermitianMatrix& a = model.driftObservable();
    const Eigen::Index d = model.dim();
    const ComplexMatrix centered = a - expectation(a, tau) * identity(d);
    double value = 0.0;
    for (const SpectralPair& k : spec) {
        if (k.eigenvalue <= tol.zero) continue;
        const ComplexMatrix block = k.projector * centered * k.projector;
        value += 0.5 * k.eigenvalue * std::real(traceProduct(block, block));
    }
    for (const SpectralPair& k : spec) {
        for (const SpectralPair& r : spec) {
            if (&k == &r || k.eigenvalue <= tol.zero || r.eigenvalue <= tol.zero) continue;
            const double lk = k.eigenvalue;
            const double lr = r.eigenvalue;
            // lk lr / (lk - lr) ln(lk / lr), with the logarithm taken as log1p for nearby values.
            const double weight = lk * lr * std::log1p((lk - lr) / lr) / (lk - lr);
            const double overlap = std::real((k.projector * a * r.projector * a * k.projector).trace());
            value += 0.5 * overlap * weight;
        }
    }
    return value;
}

double entropyRateD2Quadrature(const MeasurementModel& model, const DensityMatrix& tau, double absTol) {
    const Eigen::Index d = model.dim();
    // Work in the eigenbasis of tau, where every resolvent (u + tau)^-1 is diagonal.
    const auto es = eigen(tau);
    requirePSD(es.eigenvalues(), kDefaultTolerances, "state");
    const ComplexMatrix& v = es.eigenvectors();
    const Eigen::VectorXd lambda = es.eigenvalues().cwiseMax(0.0);
    const ComplexMatrix r = v.adjoint() * model.R() * v;
    const ComplexMatrix rd = r.adjoint();
    const ComplexMatrix b =
        v.adjoint() * model.driftObservable() * v - expectation(model.driftObservable(), tau) * identity(d);
    const ComplexMatrix commTauR = lambda.asDiagonal() * r - r * lambda.asDiagonal();

    double lambdaBar = 0.0;
    int positive = 0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda(i) > kDefaultTolerances.zero) {
            lambdaBar += lambda(i);
            ++positive;
        }
    }
    if (positive == 0) throw Error(ErrorCode::NotPSD, "state has no positive eigenvalue");
    lambdaBar /= positive;

    auto integrandU = [&](double u) {
        const Eigen::VectorXd f = lambda.array() / (u + lambda.array());         // tau / (u + tau)
        const Eigen::VectorXd f2 = f.array() / (u + lambda.array());             // tau / (u + tau)^2
        const ComplexMatrix fb = f.asDiagonal() * b;
        const ComplexMatrix frd = f.asDiagonal() * rd;
        const ComplexMatrix term1 = u * (f2.asDiagonal() * b) * fb;
        const ComplexMatrix term2 = (f2.asDiagonal() * commTauR) * frd;
        const ComplexMatrix term3 = (f.asDiagonal() * r - r * f.asDiagonal()) * frd;
        return std::real((term1 + term2 - term3).trace());
    };
    auto integrandTheta = [&](double theta) {
        const double c = std::cos(theta);
        if (c <= 0.0) return 0.0;
        const double u = lambdaBar * std::tan(theta);
        return integrandU(u) * lambdaBar / (c * c);
    };

    // The integrand varies on the scale of every eigenvalue, which can span decades; the
    // breakpoints are geometric in u from well below the smallest to well above the largest.
    std::vector<double> cuts{0.0, std::numbers::pi / 2.0};
    double lambdaMin = lambdaBar;
    double lambdaMax = lambdaBar;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda(i) > kDefaultTolerances.zero) {
            lambdaMin = std::min(lambdaMin, lambda(i));
            lambdaMax = std::max(lambdaMax, lambda(i));
            cuts.push_back(std::atan(lambda(i) / lambdaBar));
        }
    }
    for (double u = lambdaMin * 1e-3; u < lambdaMax * 1e3; u *= 4.0) cuts.push_back(std::atan(u / lambdaBar));
    std::sort(cuts.begin(), cuts.end());
    double value = 0.0;
    double error = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] - cuts[i] < 1e-14) continue;
        double pieceError = 0.0;
        value += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrandTheta, cuts[i], cuts[i + 1],
                                                                               6, 1e-10, &pieceError);
        error += pieceError;
    }
    if (!std::isfinite(value) || error > absTol + 1e-8 * std::abs(value)) {
        throw Error(ErrorCode::QuadratureFailure,
                    "u-integral did not converge (error estimate " + formatDouble(error) + ", value " + formatDouble(value) + ")");
    }
    return value;
}

double entropyRateD3(const MeasurementModel& model, const DensityMatrix& tau, const Tolerances& tol) {
    if (model.amplitudes().empty()) return 0.0;
    const ComplexMatrix tauLogTau = matrixFunctionOnSupport(tau, [](double x) { return std::log(x) * x; }, tol.zero, tol);
    double value = 0.0;
    for (std::size_t k = 0; k < model.amplitudes().size(); ++k) {
        const Amplitude& amp = model.amplitudes()[k];
        const double first = -realTrace(jumpMapAt(model, k, tauLogTau));
        const ComplexMatrix jumped = jumpMapAt(model, k, tau);
        const double p = realTrace(jumped);
        const double second = p > tol.jump ? p * vonNeumannEntropy(ComplexMatrix(jumped / p), tol) : 0.0;
        value += amp.mu * (first - second);
    }
    return value;
}

EntropyRateTerms entropyRateTerms(const MeasurementModel& model, const DensityMatrix& tau, bool withQuadrature,
                                  const Tolerances& tol) {
    EntropyRateTerms out;
    out.d1 = entropyRateD1(model, tau, tol);
    out.d2 = entropyRateD2(model, tau, tol);
    if (withQuadrature) out.d2Quadrature = entropyRateD2Quadrature(model, tau);
    out.d3 = entropyRateD3(model, tau, tol);
    return out;
}

double relEntropyRateQIntegrand(const MeasurementModel& model, const DensityMatrix& rho) {
    const double m = meanDrift(model, rho);
    double value = 0.5 * m * m;
    for (std::size_t k = 0; k < model.amplitudes().size(); ++k) {
        const double intensity = std::max(0.0, jumpIntensity(model, k, rho));
        value += (1.0 - intensity + xlogx(intensity)) * model.amplitudes()[k].mu;
    }
    return value;
}

double relEntropyRatePairIntegrand(const MeasurementModel& model, const DensityMatrix& rhoAlpha,
                                   const DensityMatrix& rho) {
    const double dm = meanDrift(model, rhoAlpha) - meanDrift(model, rho);
    double value = 0.5 * dm * dm;
    for (std::size_t k = 0; k < model.amplitudes().size(); ++k) {
        const double ia = std::max(0.0, jumpIntensity(model, k, rhoAlpha));
        const double i = std::max(0.0, jumpIntensity(model, k, rho));
        double term = 0.0;
        if (i > 0.0) {
            term = i - ia + (ia > 0.0 ? ia * std::log(ia / i) : 0.0);
        } else if (ia > 0.0) {
            return kInfinity;
        }
        value += term * model.amplitudes()[k].mu;
    }
    return value;
}

Estimate classicalRelEntropyQ(const std::vector<double>& logWeights) { return mixtureOf(logWeights); }

Estimate classicalRelEntropyRateQ(const MeasurementModel& model, const std::vector<DensityMatrix>& states) {
    RunningStats stats;
    for (const DensityMatrix& s : states) stats.add(relEntropyRateQIntegrand(model, s));
    return stats.estimate();
}

Estimate classicalRelEntropyPair(const std::vector<double>& logWeightsAlpha,
                                 const std::vector<double>& companionLogWeights) {
    if (logWeightsAlpha.size() != companionLogWeights.size()) {
        throw Error(ErrorCode::BadShape, "weight series differ in length");
    }
    RunningStats stats;
    for (std::size_t i = 0; i < logWeightsAlpha.size(); ++i) {
        if (companionLogWeights[i] == -kInfinity) {
            return Estimate{kInfinity, kInfinity, logWeightsAlpha.size()};
        }
        stats.add(logWeightsAlpha[i] - companionLogWeights[i]);
    }
    return stats.estimate();
}

Estimate classicalRelEntropyRatePair(const MeasurementModel& model, const std::vector<DensityMatrix>& statesAlpha,
                                     const std::vector<DensityMatrix>& companions) {
    if (statesAlpha.size() != companions.size()) throw Error(ErrorCode::BadShape, "state samples differ in length");
    RunningStats stats;
    for (std::size_t i = 0; i < statesAlpha.size(); ++i) {
        stats.add(relEntropyRatePairIntegrand(model, statesAlpha[i], companions[i]));
    }
    return stats.estimate();
}

ShattenDecomposition shattenDecompose(const DensityMatrix& rho, const Tolerances& tol) {
    const auto es = eigen(rho);
    requirePSD(es.eigenvalues(), tol, "state");
    ShattenDecomposition out;
    const Eigen::Index d = rho.rows();
    for (Eigen::Index i = d - 1; i >= 0; --i) {
        const double w = es.eigenvalues()(i);
        if (w <= 1e-12) continue;
        ComplexVector v = es.eigenvectors().col(i);
        for (Eigen::Index j = 0; j < d; ++j) {
            if (std::abs(v(j)) > 1e-12) {
                v *= std::conj(v(j)) / std::abs(v(j));
                break;
            }
        }
        if (!out.weights.empty() && std::abs(out.weights.back() - w) < tol.degeneracy) out.degeneracyFlag = true;
        out.weights.push_back(w);
        out.states.push_back(v * v.adjoint());
        out.vectors.push_back(v);
    }
    return out;
}

Estimate amountOfInformation(const DensityMatrix& rho, const std::vector<DensityMatrix>& states) {
    const double s0 = vonNeumannEntropy(rho);
    RunningStats stats;
    for (const DensityMatrix& s : states) stats.add(s0 - vonNeumannEntropy(s));
    return stats.estimate();
}

GainLossSample gainLossSplit(const Superoperator& propagator, const DensityMatrix& rhoT, const DensityMatrix& rhoNext,
                             const DensityMatrix& etaT, const Tolerances& tol) {
    const DensityMatrix evolved = hermitianPart(propagator.apply(rhoT));
    const DensityMatrix etaNext = hermitianPart(propagator.apply(etaT));
    GainLossSample out;
    out.gain = quantumRelativeEntropy(rhoNext, evolved, tol);
    out.loss = quantumRelativeEntropy(evolved, etaNext, tol) - quantumRelativeEntropy(rhoT, etaT, tol);
    return out;
}

}  // namespace qcm
