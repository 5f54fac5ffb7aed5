#include "qcm/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>
#include <utility>

namespace qcm {

namespace {

void requireShape(const ComplexMatrix& m, Eigen::Index dim, const std::string& what) {
    if (m.rows() != dim || m.cols() != dim) {
        throw Error(ErrorCode::BadShape, what + " must be " + std::to_string(dim) + "x" + std::to_string(dim));
    }
    if (!allFinite(m)) throw Error(ErrorCode::NonFinite, what + " has non-finite entries");
}

}  // namespace

MeasurementModel validateModel(RawModel raw, const Tolerances& tol) {
    const Eigen::Index d = raw.dim;
    if (d < 1) throw Error(ErrorCode::BadShape, "dim must be positive");
    requireShape(raw.H, d, "H");
    if (hermiticityDefect(raw.H) > tol.herm) throw Error(ErrorCode::NonHermitianH, "H is not Hermitian");
    if (raw.R.size() == 0) raw.R = ComplexMatrix::Zero(d, d);
    requireShape(raw.R, d, "R");
    for (std::size_t j = 0; j < raw.Ls.size(); ++j) requireShape(raw.Ls[j], d, "L" + std::to_string(j));
    if (!std::isfinite(raw.c) || !std::isfinite(raw.r)) throw Error(ErrorCode::NonFinite, "c and r must be finite");
    if (!(raw.b > 0.0) || !std::isfinite(raw.b)) throw Error(ErrorCode::NonPositiveB, "b must be positive");

    std::set<std::pair<double, int>> seen;
    for (std::size_t i = 0; i < raw.channels.size(); ++i) {
        const JumpChannel& ch = raw.channels[i];
        const std::string name = "channel " + std::to_string(i);
        if (!std::isfinite(ch.z)) throw Error(ErrorCode::NonFinite, name + " amplitude is not finite");
        if (ch.z == 0.0) throw Error(ErrorCode::ZeroAmplitude, name + " has z = 0");
        if (!(ch.nu > 0.0) || !std::isfinite(ch.nu)) throw Error(ErrorCode::NonPositiveWeight, name + " has nu <= 0");
        if (ch.n < 1) throw Error(ErrorCode::BadShape, name + " label n must be positive");
        requireShape(ch.V, d, name + " V");
        if (!seen.insert({ch.z, ch.n}).second) {
            throw Error(ErrorCode::DuplicateChannel, name + " repeats an earlier (z, n) pair");
        }
    }

    MeasurementModel model;
    model.raw_ = std::move(raw);
    const RawModel& m = model.raw_;
    const ComplexMatrix id = identity(d);

    // Group channels by amplitude, in order of first appearance.
    for (std::size_t i = 0; i < m.channels.size(); ++i) {
        const double z = m.channels[i].z;
        auto it = std::find_if(model.amplitudes_.begin(), model.amplitudes_.end(),
                               [z](const Amplitude& a) { return a.z == z; });
        if (it == model.amplitudes_.end()) {
            model.amplitudes_.push_back(Amplitude{});
            it = std::prev(model.amplitudes_.end());
            it->z = z;
        }
        it->channels.push_back(i);
        it->mu += m.channels[i].nu;
    }
    for (Amplitude& a : model.amplitudes_) {
        a.phi1 = model.phi1(a.z);
        a.phi2 = model.phi2(a.z);
        a.effect = ComplexMatrix::Zero(d, d);
        for (std::size_t i : a.channels) {
            const JumpChannel& ch = m.channels[i];
            a.fractions.push_back(ch.nu / a.mu);
            a.effect.noalias() += a.fractions.back() * (ch.V.adjoint() * ch.V);
        }
        a.effect = hermitianPart(a.effect);
        a.maxEffect = hermitianEigenvalues(a.effect).maxCoeff();
        model.compensatedJumpDrift_ += a.z * a.phi2 * a.mu;
        model.totalJumpRate_ += a.mu;
    }

    model.driftObservable_ = m.R + m.R.adjoint();
    ComplexMatrix positive = m.R.adjoint() * m.R;
    for (const ComplexMatrix& L : m.Ls) positive.noalias() += L.adjoint() * L;
    for (const JumpChannel& ch : m.channels) {
        model.jumpDeviations_.push_back(ch.V - id);
        positive.noalias() += ch.nu * (model.jumpDeviations_.back().adjoint() * model.jumpDeviations_.back());
    }
    model.dampedGenerator_ = Complex(0.0, -1.0) * m.H - 0.5 * positive;

    model.liouvillianMatrix_ =
        vectorizeSuperoperator([&model](const ComplexMatrix& x) { return liouvillian(model, x); }, d);
    return model;
}

std::size_t MeasurementModel::amplitudeIndex(double z) const {
    for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
        if (amplitudes_[i].z == z) return i;
    }
    throw Error(ErrorCode::UnknownAmplitude, "no channel at z = " + std::to_string(z));
}

ComplexMatrix liouvillian(const MeasurementModel& model, const ComplexMatrix& tau) {
    const ComplexMatrix& k0 = model.dampedGenerator();
    ComplexMatrix out = k0 * tau + tau * k0.adjoint();
    out.noalias() += model.R() * tau * model.R().adjoint();
    for (const ComplexMatrix& L : model.Ls()) out.noalias() += L * tau * L.adjoint();
    const auto& deviations = model.jumpDeviations();
    for (std::size_t i = 0; i < deviations.size(); ++i) {
        const ComplexMatrix& j = deviations[i];
        out.noalias() += model.channels()[i].nu * (j * tau * j.adjoint());
    }
    return out;
}

ComplexMatrix generatorK(const MeasurementModel& model, double k, const ComplexMatrix& tau) {
    ComplexMatrix out = liouvillian(model, tau);
    if (k == 0.0) return out;
    const Complex ik(0.0, k);
    out += (ik * model.c() - 0.5 * model.r() * model.r() * k * k) * tau;
    out += (ik * model.r()) * (model.R() * tau + tau * model.R().adjoint());
    for (std::size_t a = 0; a < model.amplitudes().size(); ++a) {
        const Amplitude& amp = model.amplitudes()[a];
        const Complex phase = std::exp(Complex(0.0, k * amp.z)) - 1.0;
        out += amp.mu * (phase * jumpMapAt(model, a, tau) - (ik * amp.z * amp.phi2) * tau);
    }
    return out;
}

Superoperator generatorKMatrix(const MeasurementModel& model, double k) {
    if (k == 0.0) return model.liouvillianMatrix();
    return vectorizeSuperoperator([&](const ComplexMatrix& x) { return generatorK(model, k, x); }, model.dim());
}

ComplexMatrix jumpMapAt(const MeasurementModel& model, std::size_t amplitude, const ComplexMatrix& tau) {
    const Amplitude& amp = model.amplitudes().at(amplitude);
    ComplexMatrix out = ComplexMatrix::Zero(model.dim(), model.dim());
    for (std::size_t i = 0; i < amp.channels.size(); ++i) {
        const ComplexMatrix& v = model.channels()[amp.channels[i]].V;
        out.noalias() += amp.fractions[i] * (v * tau * v.adjoint());
    }
    return out;
}

ComplexMatrix jumpMap(const MeasurementModel& model, double z, const ComplexMatrix& tau) {
    return jumpMapAt(model, model.amplitudeIndex(z), tau);
}

const HermitianMatrix& jumpEffect(const MeasurementModel& model, double z) {
    return model.amplitudes()[model.amplitudeIndex(z)].effect;
}

double jumpIntensity(const MeasurementModel& model, std::size_t amplitude, const ComplexMatrix& tau) {
    return expectation(model.amplitudes()[amplitude].effect, tau);
}

DensityMatrix normalizedJump(const MeasurementModel& model, double z, const DensityMatrix& tau,
                             const Tolerances& tol) {
    const ComplexMatrix out = jumpMap(model, z, tau);
    const double p = out.trace().real();
    if (!(p > tol.jump)) {
        throw Error(ErrorCode::DeadChannel, "jump at z = " + std::to_string(z) + " has zero probability");
    }
    return out / p;
}

double meanDrift(const MeasurementModel& model, const ComplexMatrix& tau) {
    return expectation(model.driftObservable(), tau);
}

QuasiCompletenessReport quasiCompletenessCheck(const MeasurementModel& model) {
    QuasiCompletenessReport report;
    for (const ComplexMatrix& L : model.Ls()) {
        if (L.cwiseAbs().maxCoeff() > 1e-12) report.c1Holds = false;
    }
    for (const Amplitude& amp : model.amplitudes()) {
        const ComplexMatrix& first = model.channels()[amp.channels.front()].V;
        for (std::size_t i = 1; i < amp.channels.size(); ++i) {
            const double dev = (model.channels()[amp.channels[i]].V - first).cwiseAbs().maxCoeff();
            report.maxDeviationC2 = std::max(report.maxDeviationC2, dev);
        }
    }
    report.c2Holds = report.maxDeviationC2 <= 1e-10;
    return report;
}

}  // namespace qcm
