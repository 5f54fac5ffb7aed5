#pragma once

#include <limits>
#include <vector>

#include "qcm/estimators.hpp"
#include "qcm/model.hpp"

namespace qcm {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// x ln x with 0 ln 0 = 0.
double xlogx(double x);

/// -Tr{tau ln tau}.
double vonNeumannEntropy(const DensityMatrix& tau, const Tolerances& tol = kDefaultTolerances);

/// Tr{x ln x - x ln y}; +inf when supp x is not contained in supp y.
double quantumRelativeEntropy(const DensityMatrix& x, const DensityMatrix& y,
                              const Tolerances& tol = kDefaultTolerances);

/// Tr{tau} - Tr{tau^2}.
double linearEntropy(const DensityMatrix& tau);

/// Sample mean and SE of the linear entropy; throws EmptySample.
Estimate aposterioriPurity(const std::vector<DensityMatrix>& states);

struct PurityRateTerms {
    double p1 = 0.0;
    double p2 = 0.0;
    double p3 = 0.0;           ///< structured (second) form
    double p3FirstForm = 0.0;  ///< I j^2 - 2 J[rho^2] + I rho^2 form
};

/// Integrands of the purity derivative at one a posteriori state.
PurityRateTerms purityRateTerms(const MeasurementModel& model, const DensityMatrix& rho,
                                const Tolerances& tol = kDefaultTolerances);

struct PurityRates {
    Estimate p1, p2, p3, p3FirstForm;
    Estimate total;  ///< p1 - p2 - p3, per sample
};

PurityRates purityRates(const MeasurementModel& model, const std::vector<DensityMatrix>& states,
                        const Tolerances& tol = kDefaultTolerances);

struct EntropyRateTerms {
    double d1 = 0.0;  ///< may be +inf
    double d2 = 0.0;  ///< spectral formula
    double d2Quadrature = 0.0;
    double d3 = 0.0;
    double total() const { return d1 - d2 - d3; }
};

double entropyRateD1(const MeasurementModel& model, const DensityMatrix& tau,
                     const Tolerances& tol = kDefaultTolerances);
/// Spectral double sum; eigenvalues closer than tol.degeneracy share a projector.
double entropyRateD2(const MeasurementModel& model, const DensityMatrix& tau,
                     const Tolerances& tol = kDefaultTolerances);
/// The u-integral over (0, inf), mapped by u = lambdaBar tan(theta); throws QuadratureFailure.
double entropyRateD2Quadrature(const MeasurementModel& model, const DensityMatrix& tau, double absTol = 1e-8);
double entropyRateD3(const MeasurementModel& model, const DensityMatrix& tau,
                     const Tolerances& tol = kDefaultTolerances);

/// All three terms. The quadrature is skipped (left at 0) unless requested.
EntropyRateTerms entropyRateTerms(const MeasurementModel& model, const DensityMatrix& tau,
                                  bool withQuadrature = true, const Tolerances& tol = kDefaultTolerances);

/// 1/2 m^2 + sum_z (1 - I + I ln I) mu at one state.
double relEntropyRateQIntegrand(const MeasurementModel& model, const DensityMatrix& rho);

/// 1/2 (m_alpha - m)^2 + sum_z (1 - x + x ln x) I mu with x = I_alpha / I; +inf if I = 0 < I_alpha.
double relEntropyRatePairIntegrand(const MeasurementModel& model, const DensityMatrix& rhoAlpha,
                                   const DensityMatrix& rho);

/// I_t(P|Q) as the mean of ln ||sigma_t|| over physical paths.
Estimate classicalRelEntropyQ(const std::vector<double>& logWeights);

Estimate classicalRelEntropyRateQ(const MeasurementModel& model, const std::vector<DensityMatrix>& states);

/// I_t(P^alpha|P) as the mean of ln(w_alpha / w) over coupled paths; +inf if any companion weight vanished.
Estimate classicalRelEntropyPair(const std::vector<double>& logWeightsAlpha,
                                 const std::vector<double>& companionLogWeights);

Estimate classicalRelEntropyRatePair(const MeasurementModel& model, const std::vector<DensityMatrix>& statesAlpha,
                                     const std::vector<DensityMatrix>& companions);

struct ShattenDecomposition {
    std::vector<double> weights;         ///< descending
    std::vector<DensityMatrix> states;   ///< orthogonal rank-one projectors
    std::vector<ComplexVector> vectors;  ///< first nonzero component real and positive
    bool degeneracyFlag = false;         ///< some kept weights coincide, so the split is not unique
};

ShattenDecomposition shattenDecompose(const DensityMatrix& rho, const Tolerances& tol = kDefaultTolerances);

/// S_q(rho) - E[S_q(rho_t)].
Estimate amountOfInformation(const DensityMatrix& rho, const std::vector<DensityMatrix>& states);

/// One-path split of the change of S_q(rho_t | eta_t) over an interval h, with U = propagator:
/// gain = S_q(rho_{t+h} | U[rho_t]) >= 0 and loss = S_q(U[rho_t] | U[eta_t]) - S_q(rho_t | eta_t) <= 0.
/// Only the expectations add up to the change.
struct GainLossSample {
    double gain = 0.0;
    double loss = 0.0;
};

GainLossSample gainLossSplit(const Superoperator& propagator, const DensityMatrix& rhoT, const DensityMatrix& rhoNext,
                             const DensityMatrix& etaT, const Tolerances& tol = kDefaultTolerances);

}  // namespace qcm
