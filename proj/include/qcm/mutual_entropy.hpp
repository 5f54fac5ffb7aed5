#pragma once

#include <cstdint>
#include <vector>

#include "qcm/estimators.hpp"
#include "qcm/information.hpp"
#include "qcm/json_io.hpp"

namespace qcm {

struct MonteCarloConfig {
    double dt = 1e-3;
    std::size_t nTrajectories = 10000;
    std::uint64_t masterSeed = 1;
    unsigned workers = 1;
    /// Re-estimate S(Sigma|Pi) from fresh streams as a cross-check of the chain rule.
    bool independentCheck = true;
};

/// Mutual entropies of the compound input/output state at time t, relative to one
/// orthogonal pure decomposition of the initial state. Monte Carlo fields carry SEs;
/// sPi3 and the a priori entropies are deterministic.
struct MutualEntropyReport {
    double t = 0.0;
    std::vector<double> weights;

    double entropyInitial = 0.0;  ///< S_q(rho)
    double entropyApriori = 0.0;  ///< S_q(eta_t)

    Estimate sPi1;             ///< E_P[S_q(rho_t | eta_t)]
    Estimate sPi1FromEntropy;  ///< S_q(eta_t) - E_P[S_q(rho_t)]
    Estimate sPi2;             ///< sum w_a I_t(P^a | P)
    double sPi3 = 0.0;         ///< sum w_a S_q(eta^a_t | eta_t)
    Estimate sSigmaPi1;
    Estimate sSigmaPi1FromEntropy;
    Estimate sSigmaPi2;
    Estimate sSigmaPi3;
    Estimate sSigmaPi;
    Estimate sSigmaPiIndependent;  ///< n == 0 when not computed
    Estimate amountOfInformation;
    Estimate chainResidual[3];  ///< S(Sigma|Pi) - S(Sigma|Pi^i) - S(Pi^i|Pi), per path

    // Bound checks, each within 3 SE where statistical.
    bool sPi2WithinBounds = false;    ///< 0 <= sPi2 <= S_q(rho)
    bool sPi3WithinBound = false;     ///< sPi3 <= min{S_q(rho), S_q(eta_t)}
    bool informationAboveSPi2 = false;  ///< I_t(rho) >= sPi2 (quasi-complete models)

    std::string modelHash;
    MonteCarloConfig mc;

    Json toJson() const;
};

/// Runs one coupled ensemble per decomposition element (P^a paths with the a posteriori
/// state from rho co-integrated), so that E_P = sum w_a E_{P^a}. Throws SupportViolation
/// when a decomposition element is not supported by rho.
MutualEntropyReport mutualEntropyReport(const MeasurementModel& model, const DensityMatrix& rho,
                                        const ShattenDecomposition& decomposition, double t,
                                        const MonteCarloConfig& mc);

}  // namespace qcm
