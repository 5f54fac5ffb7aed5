#pragma once

#include <optional>
#include <vector>

#include "qcm/model.hpp"

namespace qcm {

/// Piecewise-constant test function: k(t) = values[i] on [breakpoints[i], breakpoints[i+1]).
struct TestFunction {
    std::vector<double> breakpoints;  ///< 0 = t0 < t1 < ... < tp
    std::vector<double> values;       ///< one per piece

    static TestFunction constant(double kappa, double t);

    double end() const { return breakpoints.back(); }
    double valueAt(double t) const;
    void validate() const;
};

struct StateSeries {
    std::vector<double> times;
    std::vector<DensityMatrix> states;
};

/// A priori states e^{tL}[rho0] at ascending times.
StateSeries propagateMaster(const MeasurementModel& model, const DensityMatrix& rho0,
                            const std::vector<double>& times, const Tolerances& tol = kDefaultTolerances);

DensityMatrix aprioriState(const MeasurementModel& model, const DensityMatrix& rho0, double t);

/// G_t(k)[rho0] with the earliest piece applied first.
ComplexMatrix characteristicOperator(const MeasurementModel& model, const DensityMatrix& rho0,
                                     const TestFunction& k);

/// <a, G_t(k)[rho0]> = Tr{a G_t(k)[rho0]}.
Complex characteristicFunctional(const MeasurementModel& model, const DensityMatrix& rho0, const TestFunction& k,
                                 const ComplexMatrix& a);

/// Tr{e^{t K(kappa)}[rho0]}, the characteristic function of Y(t).
Complex incrementCharacteristic(const MeasurementModel& model, const DensityMatrix& rho0, double kappa, double t);

struct Equilibrium {
    DensityMatrix state;
    bool nonUnique = false;
    double residual = 0.0;  ///< trace norm of L[state]
};

/// A stationary state of L, or nullopt when the kernel holds no state.
/// With a degenerate kernel the maximally mixed state is projected onto it.
std::optional<Equilibrium> equilibriumState(const MeasurementModel& model);

}  // namespace qcm
