#pragma once

#include <cstddef>
#include <vector>

#include "qcm/operator_core.hpp"

namespace qcm {

/// One atom of the jump measure: weight nu at amplitude z with label n.
/// V = J + 1 restricted to this atom.
struct JumpChannel {
    double z = 0.0;
    int n = 1;
    double nu = 0.0;
    ComplexMatrix V;
};

/// Unchecked model description, as read from a model file.
struct RawModel {
    Eigen::Index dim = 0;
    HermitianMatrix H;
    std::vector<ComplexMatrix> Ls;
    ComplexMatrix R;
    double c = 0.0;
    double r = 0.0;
    double b = 1.0;
    std::vector<JumpChannel> channels;
};

/// Channels sharing one amplitude z, with everything the dynamics needs at that z.
struct Amplitude {
    double z = 0.0;
    double mu = 0.0;    ///< total weight at z
    double phi1 = 0.0;  ///< z^2 / (b^2 + z^2)
    double phi2 = 0.0;  ///< b^2 / (b^2 + z^2)
    std::vector<std::size_t> channels;
    std::vector<double> fractions;  ///< nu / mu per channel
    HermitianMatrix effect;         ///< sum of fractions * V^dag V
    double maxEffect = 0.0;         ///< largest eigenvalue of `effect`
};

struct QuasiCompletenessReport {
    bool c1Holds = true;
    bool c2Holds = true;
    double maxDeviationC2 = 0.0;
};

/// Validated, immutable measurement model. Build with validateModel().
class MeasurementModel {
  public:
    Eigen::Index dim() const { return raw_.dim; }
    const RawModel& raw() const { return raw_; }
    const HermitianMatrix& H() const { return raw_.H; }
    const std::vector<ComplexMatrix>& Ls() const { return raw_.Ls; }
    const ComplexMatrix& R() const { return raw_.R; }
    double c() const { return raw_.c; }
    double r() const { return raw_.r; }
    double b() const { return raw_.b; }
    const std::vector<JumpChannel>& channels() const { return raw_.channels; }
    const std::vector<Amplitude>& amplitudes() const { return amplitudes_; }

    /// Index into amplitudes() for z; throws UnknownAmplitude.
    std::size_t amplitudeIndex(double z) const;

    /// R + R^dag.
    const HermitianMatrix& driftObservable() const { return driftObservable_; }
    /// -iH - 1/2 (sum L^dag L + R^dag R + sum nu J^dag J).
    const ComplexMatrix& dampedGenerator() const { return dampedGenerator_; }
    /// J = V - 1, one per channel.
    const std::vector<ComplexMatrix>& jumpDeviations() const { return jumpDeviations_; }
    /// Sum over amplitudes of z phi2(z) mu(z).
    double compensatedJumpDrift() const { return compensatedJumpDrift_; }
    /// Sum over amplitudes of mu(z).
    double totalJumpRate() const { return totalJumpRate_; }

    double phi1(double z) const { return z * z / (raw_.b * raw_.b + z * z); }
    double phi2(double z) const { return raw_.b * raw_.b / (raw_.b * raw_.b + z * z); }

    const Superoperator& liouvillianMatrix() const { return liouvillianMatrix_; }

  private:
    friend MeasurementModel validateModel(RawModel raw, const Tolerances& tol);

    RawModel raw_;
    std::vector<Amplitude> amplitudes_;
    HermitianMatrix driftObservable_;
    ComplexMatrix dampedGenerator_;
    std::vector<ComplexMatrix> jumpDeviations_;  ///< J = V - 1 per channel
    double compensatedJumpDrift_ = 0.0;
    double totalJumpRate_ = 0.0;
    Superoperator liouvillianMatrix_;
};

MeasurementModel validateModel(RawModel raw, const Tolerances& tol = kDefaultTolerances);

/// L[tau] = L0 + L1 + L2, the a priori generator.
ComplexMatrix liouvillian(const MeasurementModel& model, const ComplexMatrix& tau);

/// Levy-Khinchin generator K(k)[tau]. K(0) is the liouvillian.
ComplexMatrix generatorK(const MeasurementModel& model, double k, const ComplexMatrix& tau);

Superoperator generatorKMatrix(const MeasurementModel& model, double k);

/// Jump map at amplitude z: sum_n (nu/mu) V tau V^dag.
ComplexMatrix jumpMap(const MeasurementModel& model, double z, const ComplexMatrix& tau);
ComplexMatrix jumpMapAt(const MeasurementModel& model, std::size_t amplitude, const ComplexMatrix& tau);

/// Effect operator at amplitude z: sum_n (nu/mu) V^dag V.
const HermitianMatrix& jumpEffect(const MeasurementModel& model, double z);

/// Tr{effect(z) tau}.
double jumpIntensity(const MeasurementModel& model, std::size_t amplitude, const ComplexMatrix& tau);

/// Post-jump state; throws DeadChannel when the jump cannot happen from tau.
DensityMatrix normalizedJump(const MeasurementModel& model, double z, const DensityMatrix& tau,
                             const Tolerances& tol = kDefaultTolerances);

/// m = Tr{(R + R^dag) tau}.
double meanDrift(const MeasurementModel& model, const ComplexMatrix& tau);

QuasiCompletenessReport quasiCompletenessCheck(const MeasurementModel& model);

}  // namespace qcm
