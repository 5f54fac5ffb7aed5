#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "qcm/model.hpp"
#include "qcm/rng.hpp"

namespace qcm {

enum class SimulationMode { QLinear, PPhysical, Coupled };

const char* to_string(SimulationMode mode);

struct TimeGrid {
    double tMax = 1.0;
    double dt = 1e-3;
    std::size_t nSteps = 1000;

    /// dt is adjusted to tMax / nSteps; tMax must be an integer multiple of dt to 1e-9.
    static TimeGrid make(double tMax, double dt);
    double time(std::size_t step) const { return tMax * static_cast<double>(step) / static_cast<double>(nSteps); }
};

/// Largest rate * dt allowed for a per-step Bernoulli jump draw.
inline constexpr double kMaxJumpProbability = 0.1;

struct JumpRecord {
    std::size_t step;  ///< the jump happened during step `step` (ending at time(step))
    double z;
};

/// One realization. Series are sampled every `stride` steps (plus the final step).
struct TrajectoryPath {
    TimeGrid grid;
    SimulationMode mode = SimulationMode::QLinear;
    std::size_t stride = 1;

    std::vector<std::size_t> steps;  ///< step index of each snapshot
    std::vector<double> times;
    std::vector<double> y;              ///< output signal Y(t)
    std::vector<double> wiener;         ///< driving Wiener process: W under Q, W-breve under P
    std::vector<double> driftIntegral;  ///< integral of m(s) ds
    std::vector<double> logWeight;      ///< ln ||sigma_t||_1; -inf once the weight vanishes
    std::vector<DensityMatrix> states;  ///< rho_t (normalized sigma_t in Q mode)
    std::vector<JumpRecord> jumps;
    RepairStats repairs;

    // Coupled mode: the linear equation co-integrated from the reference state.
    std::vector<double> companionLogWeight;
    std::vector<DensityMatrix> companionStates;
};

/// Everything known at the end of one step; `step == 0` is the initial condition.
struct StepView {
    std::size_t step;
    double t;
    const DensityMatrix& state;
    double logWeight;
    double y;
    std::size_t jumpsSoFar;
    const DensityMatrix* companion;  ///< coupled mode only
    double companionLogWeight;
};

using StepObserver = std::function<void(const StepView&)>;

struct SimulationOptions {
    std::size_t stride = 1;
    bool keepStates = true;
    StepObserver observer;
    Tolerances tol = kDefaultTolerances;
};

/// Throws RateTooHigh when a per-step jump probability could exceed kMaxJumpProbability.
void checkGridRates(const MeasurementModel& model, const TimeGrid& grid, SimulationMode mode);

/// Linear equation for the non-normalized state under the reference probability Q.
TrajectoryPath simulateLinearQ(const MeasurementModel& model, const DensityMatrix& rho0, const TimeGrid& grid,
                               RngStream& rng, const SimulationOptions& options = {});

/// Nonlinear equation for the a posteriori state under the physical probability P.
TrajectoryPath simulatePhysical(const MeasurementModel& model, const DensityMatrix& rho0, const TimeGrid& grid,
                                RngStream& rng, const SimulationOptions& options = {});

/// Physical path started at rhoAlpha; the linear equation from rho is driven by the same
/// realized increments, giving ln(w_alpha / w) pathwise.
TrajectoryPath simulateCoupledPair(const MeasurementModel& model, const DensityMatrix& rhoAlpha,
                                   const DensityMatrix& rho, const TimeGrid& grid, RngStream& rng,
                                   const SimulationOptions& options = {});

/// True when supp(x) is contained in supp(y) within tol.support.
bool supportContained(const DensityMatrix& x, const DensityMatrix& y, const Tolerances& tol = kDefaultTolerances);

struct OutputDecomposition {
    std::vector<double> cbv;   ///< continuous part with bounded variation
    std::vector<double> mart;  ///< r * W-breve
    std::vector<double> jump;  ///< sum of z over jumps
};

/// Splits Y of a physical (or coupled) path into drift, Wiener and jump parts.
OutputDecomposition ybvDecomposition(const TrajectoryPath& path, const MeasurementModel& model);

}  // namespace qcm
