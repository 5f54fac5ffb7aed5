#include "qcm/mutual_entropy.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "qcm/ensemble.hpp"
#include "qcm/semigroup.hpp"

namespace qcm {

namespace {

// Per-path quantities of one decomposition element, at time t.
enum Quantity : std::size_t {
    kEntropyAlpha,      // S_q(rho^a_t)
    kEntropyRho,        // S_q(rho_t), rho_t co-integrated from rho along the P^a path
    kRelRhoEta,         // S_q(rho_t | eta_t)
    kLogRatio,          // ln(||sigma^a_t|| / ||sigma_t||)
    kRelAlphaRho,       // S_q(rho^a_t | rho_t)
    kRelAlphaEta,       // S_q(rho^a_t | eta_t)
    kRelAlphaEtaAlpha,  // S_q(rho^a_t | eta^a_t)
    kQuantityCount
};

using Samples = std::array<std::vector<double>, kQuantityCount>;
using Coefficients = std::array<double, kQuantityCount>;

void addSample(Samples& s, const DensityMatrix& alpha, const DensityMatrix& rho, double logRatio,
               const DensityMatrix& eta, const DensityMatrix& etaAlpha) {
    s[kEntropyAlpha].push_back(vonNeumannEntropy(alpha));
    s[kEntropyRho].push_back(vonNeumannEntropy(rho));
    s[kRelRhoEta].push_back(quantumRelativeEntropy(rho, eta));
    s[kLogRatio].push_back(logRatio);
    s[kRelAlphaRho].push_back(quantumRelativeEntropy(alpha, rho));
    s[kRelAlphaEta].push_back(quantumRelativeEntropy(alpha, eta));
    s[kRelAlphaEtaAlpha].push_back(quantumRelativeEntropy(alpha, etaAlpha));
}

/// constant + sum_a w_a E_a[c . q], with the SE of independent per-element means.
Estimate combine(const std::vector<double>& weights, const std::vector<Samples>& samples, const Coefficients& c,
                 double constant) {
    Estimate out{constant, 0.0, 0};
    double var = 0.0;
    for (std::size_t a = 0; a < samples.size(); ++a) {
        RunningStats stats;
        const std::size_t n = samples[a][0].size();
        for (std::size_t i = 0; i < n; ++i) {
            double x = 0.0;
            for (std::size_t q = 0; q < kQuantityCount; ++q) {
                if (c[q] != 0.0) x += c[q] * samples[a][q][i];
            }
            stats.add(x);
        }
        const Estimate e = stats.estimate();
        out.mean += weights[a] * e.mean;
        var += weights[a] * weights[a] * e.se * e.se;
        out.n = a == 0 ? e.n : std::min(out.n, e.n);
    }
    out.se = std::sqrt(var);
    return out;
}

Coefficients coeffs(std::initializer_list<std::pair<Quantity, double>> terms) {
    Coefficients c{};
    for (const auto& [q, v] : terms) c[q] += v;
    return c;
}

/// Per-element samples at time t. At t = 0 the single exact sample is used.
std::vector<Samples> collect(const MeasurementModel& model, const DensityMatrix& rho,
                             const ShattenDecomposition& dec, double t, const DensityMatrix& eta,
                             const std::vector<DensityMatrix>& etaAlpha, const MonteCarloConfig& mc,
                             std::uint64_t streamBase) {
    std::vector<Samples> out(dec.weights.size());
    if (t == 0.0) {
        for (std::size_t a = 0; a < dec.weights.size(); ++a) {
            addSample(out[a], dec.states[a], rho, 0.0, eta, etaAlpha[a]);
        }
        return out;
    }
    EnsembleSpec spec;
    spec.grid = TimeGrid::make(t, mc.dt);
    spec.nTrajectories = mc.nTrajectories;
    spec.masterSeed = mc.masterSeed;
    spec.mode = SimulationMode::Coupled;
    spec.stride = spec.grid.nSteps;
    spec.workers = mc.workers;
    spec.keepSamples = true;
    for (std::size_t a = 0; a < dec.weights.size(); ++a) {
        spec.firstStream = streamBase + a * mc.nTrajectories;
        // One functional records everything; the values land in `collected` in trajectory order.
        std::vector<Functional> fs;
        const DensityMatrix* etaPtr = &eta;
        const DensityMatrix* etaAlphaPtr = &etaAlpha[a];
        for (std::size_t q = 0; q < kQuantityCount; ++q) {
            fs.push_back(pointFunctional("q" + std::to_string(q), [q, etaPtr, etaAlphaPtr](const StepView& v) {
                const DensityMatrix& alpha = v.state;
                const DensityMatrix& companion = *v.companion;
                switch (q) {
                    case kEntropyAlpha: return vonNeumannEntropy(alpha);
                    case kEntropyRho: return vonNeumannEntropy(companion);
                    case kRelRhoEta: return quantumRelativeEntropy(companion, *etaPtr);
                    case kLogRatio: return v.logWeight - v.companionLogWeight;
                    case kRelAlphaRho: return quantumRelativeEntropy(alpha, companion);
                    case kRelAlphaEta: return quantumRelativeEntropy(alpha, *etaPtr);
                    default: return quantumRelativeEntropy(alpha, *etaAlphaPtr);
                }
            }));
        }
        const EnsembleSeries series = runEnsemble(model, dec.states[a], rho, spec, fs);
        const std::size_t last = series.times.size() - 1;
        for (std::size_t q = 0; q < kQuantityCount; ++q) out[a][q] = series.samples[q][last];
    }
    return out;
}

Json estimateJson(const Estimate& e) {
    Json j;
    j["value"] = e.mean;
    j["se"] = e.se;
    j["n"] = e.n;
    return j;
}

}  // namespace

MutualEntropyReport mutualEntropyReport(const MeasurementModel& model, const DensityMatrix& rho,
                                        const ShattenDecomposition& dec, double t, const MonteCarloConfig& mc) {
    requireDensity(rho);
    if (t < 0.0) throw Error(ErrorCode::BadConfig, "report time must be >= 0");
    if (dec.weights.empty()) throw Error(ErrorCode::EmptySample, "empty decomposition");
    ComplexMatrix rebuilt = ComplexMatrix::Zero(rho.rows(), rho.cols());
    for (std::size_t a = 0; a < dec.weights.size(); ++a) {
        if (!supportContained(dec.states[a], rho)) {
            throw Error(ErrorCode::SupportViolation, "decomposition element " + std::to_string(a) +
                                                         " is not supported by the initial state");
        }
        rebuilt += dec.weights[a] * dec.states[a];
    }
    if ((rebuilt - rho).cwiseAbs().maxCoeff() > 1e-8) {
        throw Error(ErrorCode::BadConfig, "decomposition does not reconstruct the initial state");
    }

    MutualEntropyReport r;
    r.t = t;
    r.weights = dec.weights;
    r.mc = mc;
    r.modelHash = modelHash(model.raw());

    const DensityMatrix eta = t == 0.0 ? DensityMatrix(rho) : aprioriState(model, rho, t);
    std::vector<DensityMatrix> etaAlpha;
    for (const DensityMatrix& s : dec.states) etaAlpha.push_back(t == 0.0 ? s : aprioriState(model, s, t));

    r.entropyInitial = vonNeumannEntropy(rho);
    r.entropyApriori = vonNeumannEntropy(eta);
    for (std::size_t a = 0; a < dec.weights.size(); ++a) {
        r.sPi3 += dec.weights[a] * quantumRelativeEntropy(etaAlpha[a], eta);
    }

    const std::vector<Samples> s = collect(model, rho, dec, t, eta, etaAlpha, mc, 0);
    const auto& w = dec.weights;
    const double sEta = r.entropyApriori;

    r.sPi1 = combine(w, s, coeffs({{kRelRhoEta, 1.0}}), 0.0);
    r.sPi1FromEntropy = combine(w, s, coeffs({{kEntropyRho, -1.0}}), sEta);
    r.sPi2 = combine(w, s, coeffs({{kLogRatio, 1.0}}), 0.0);
    r.sSigmaPi1 = combine(w, s, coeffs({{kLogRatio, 1.0}, {kRelAlphaRho, 1.0}}), 0.0);
    r.sSigmaPi1FromEntropy = combine(w, s, coeffs({{kLogRatio, 1.0}, {kEntropyRho, 1.0}, {kEntropyAlpha, -1.0}}), 0.0);
    r.sSigmaPi2 = combine(w, s, coeffs({{kRelAlphaEta, 1.0}}), 0.0);
    r.sSigmaPi3 = combine(w, s, coeffs({{kLogRatio, 1.0}, {kRelAlphaEtaAlpha, 1.0}}), 0.0);
    r.sSigmaPi = combine(w, s, coeffs({{kLogRatio, 1.0}, {kEntropyAlpha, -1.0}}), sEta);
    r.amountOfInformation = combine(w, s, coeffs({{kEntropyRho, -1.0}}), r.entropyInitial);

    // S(Sigma|Pi) - S(Sigma|Pi^i) - S(Pi^i|Pi) as one per-path combination each.
    r.chainResidual[0] =
        combine(w, s, coeffs({{kEntropyAlpha, -1.0}, {kRelAlphaRho, -1.0}, {kRelRhoEta, -1.0}}), sEta);
    r.chainResidual[1] = combine(w, s, coeffs({{kEntropyAlpha, -1.0}, {kRelAlphaEta, -1.0}}), sEta);
    r.chainResidual[2] = combine(w, s, coeffs({{kEntropyAlpha, -1.0}, {kRelAlphaEtaAlpha, -1.0}}), sEta - r.sPi3);

    if (mc.independentCheck && t > 0.0) {
        const std::vector<Samples> fresh =
            collect(model, rho, dec, t, eta, etaAlpha, mc, static_cast<std::uint64_t>(w.size()) * mc.nTrajectories);
        r.sSigmaPiIndependent = combine(w, fresh, coeffs({{kLogRatio, 1.0}, {kEntropyAlpha, -1.0}}), sEta);
    }

    r.sPi2WithinBounds = r.sPi2.mean >= -3.0 * r.sPi2.se && r.sPi2.mean <= r.entropyInitial + 3.0 * r.sPi2.se;
    r.sPi3WithinBound = r.sPi3 <= std::min(r.entropyInitial, r.entropyApriori) + 1e-9;
    r.informationAboveSPi2 = r.amountOfInformation.mean >=
                             r.sPi2.mean - 3.0 * std::hypot(r.amountOfInformation.se, r.sPi2.se);
    return r;
}

Json MutualEntropyReport::toJson() const {
    Json j;
    j["t"] = t;
    j["weights"] = weights;
    j["entropyInitial"] = entropyInitial;
    j["entropyApriori"] = entropyApriori;
    j["sPi1"] = estimateJson(sPi1);
    j["sPi1FromEntropy"] = estimateJson(sPi1FromEntropy);
    j["sPi2"] = estimateJson(sPi2);
    j["sPi3"] = sPi3;
    j["sSigmaPi1"] = estimateJson(sSigmaPi1);
    j["sSigmaPi1FromEntropy"] = estimateJson(sSigmaPi1FromEntropy);
    j["sSigmaPi2"] = estimateJson(sSigmaPi2);
    j["sSigmaPi3"] = estimateJson(sSigmaPi3);
    j["sSigmaPi"] = estimateJson(sSigmaPi);
    if (sSigmaPiIndependent.n > 0) j["sSigmaPiIndependent"] = estimateJson(sSigmaPiIndependent);
    j["amountOfInformation"] = estimateJson(amountOfInformation);
    j["chainResiduals"] = {estimateJson(chainResidual[0]), estimateJson(chainResidual[1]),
                           estimateJson(chainResidual[2])};
    j["bounds"] = {{"sPi2WithinBounds", sPi2WithinBounds},
                   {"sPi3WithinBound", sPi3WithinBound},
                   {"informationAboveSPi2", informationAboveSPi2}};
    j["provenance"] = {{"modelHash", modelHash},
                       {"masterSeed", mc.masterSeed},
                       {"dt", mc.dt},
                       {"nTrajectories", mc.nTrajectories}};
    return j;
}

}  // namespace qcm
