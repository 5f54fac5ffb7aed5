#include "qcm/trajectories.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace qcm {

const char* to_string(SimulationMode mode) {
    switch (mode) {
        case SimulationMode::QLinear: return "Q-linear";
        case SimulationMode::PPhysical: return "P-physical";
        case SimulationMode::Coupled: return "coupled";
    }
    return "unknown";
}

TimeGrid TimeGrid::make(double tMax, double dt) {
    if (!(tMax > 0.0) || !(dt > 0.0) || !std::isfinite(tMax) || !std::isfinite(dt)) {
        throw Error(ErrorCode::BadConfig, "time grid needs tMax > 0 and dt > 0");
    }
    const double ratio = tMax / dt;
    const double steps = std::round(ratio);
    if (steps < 1.0 || std::abs(ratio - steps) > 1e-9 * std::max(1.0, ratio)) {
        throw Error(ErrorCode::BadConfig, "tMax must be an integer multiple of dt");
    }
    TimeGrid grid;
    grid.tMax = tMax;
    grid.nSteps = static_cast<std::size_t>(steps);
    grid.dt = tMax / steps;
    return grid;
}

void checkGridRates(const MeasurementModel& model, const TimeGrid& grid, SimulationMode mode) {
    for (const Amplitude& a : model.amplitudes()) {
        const double bound = mode == SimulationMode::QLinear ? a.mu : a.mu * a.maxEffect;
        if (bound * grid.dt > kMaxJumpProbability) {
            throw Error(ErrorCode::RateTooHigh, "jump probability per step " + std::to_string(bound * grid.dt) +
                                                    " at z = " + std::to_string(a.z) + " exceeds 0.1");
        }
    }
}

bool supportContained(const DensityMatrix& x, const DensityMatrix& y, const Tolerances& tol) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> ex(hermitianPart(x));
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> ey(hermitianPart(y));
    const Eigen::Index d = x.rows();
    ComplexMatrix kernel = ComplexMatrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        if (ey.eigenvalues()(i) <= tol.support) kernel += ey.eigenvectors().col(i) * ey.eigenvectors().col(i).adjoint();
    }
    for (Eigen::Index i = 0; i < d; ++i) {
        if (ex.eigenvalues()(i) <= tol.support) continue;
        const ComplexVector v = ex.eigenvectors().col(i);
        if ((kernel * v).squaredNorm() > tol.support) return false;
    }
    return true;
}

namespace {

/// One step of the linear equation in Kraus form:
///   sigma -> M sigma M^dag + dt sum L sigma L^dag,
///   M = 1 + G dt + R dW + R^2 (dW^2 - dt) / 2,  G = K0 - sum nu J,
/// followed by sigma -> J(z)[sigma] for each jump drawn in the step.
/// To first order this is the compensated linear equation; the R^2 term is the
/// Milstein correction that keeps pure states pure for quasi-complete models.
class KrausStepper {
  public:
    KrausStepper(const MeasurementModel& model, double dt) : model_(model), dt_(dt) {
        const Eigen::Index d = model.dim();
        ComplexMatrix g = model.dampedGenerator();
        for (std::size_t i = 0; i < model.channels().size(); ++i) {
            g -= model.channels()[i].nu * model.jumpDeviations()[i];
        }
        r_ = model.R();
        halfR2_ = 0.5 * r_ * r_;
        base_ = identity(d) + dt * g - dt * halfR2_;
        hasR_ = r_.cwiseAbs().maxCoeff() > 0.0;
        m_.resize(d, d);
        tmp_.resize(d, d);
    }

    void continuous(const ComplexMatrix& sigma, double dW, ComplexMatrix& out) {
        m_ = base_;
        if (hasR_) m_ += dW * r_ + (dW * dW) * halfR2_;
        tmp_.noalias() = m_ * sigma;
        out.noalias() = tmp_ * m_.adjoint();
        for (const ComplexMatrix& l : model_.Ls()) {
            tmp_.noalias() = l * sigma;
            out.noalias() += dt_ * (tmp_ * l.adjoint());
        }
    }

    void jump(std::size_t amplitude, ComplexMatrix& sigma) const { sigma = jumpMapAt(model_, amplitude, sigma); }

  private:
    const MeasurementModel& model_;
    double dt_;
    ComplexMatrix r_, halfR2_, base_, m_, tmp_;
    bool hasR_ = false;
};

double realTrace(const ComplexMatrix& m) { return m.trace().real(); }

/// Hermitize and renormalize; clip negative eigenvalues when they appear.
void normalizeInPlace(ComplexMatrix& sigma, double trace, RepairStats& stats) {
    sigma = hermitianPart(sigma) / trace;
    if (minEigenvalue(sigma) < 0.0) sigma = projectToDensity(sigma, -1.0, &stats);
}

struct Recorder {
    TrajectoryPath& path;
    const SimulationOptions& options;

    void record(std::size_t step, double y, double w, double intM, double logW, const DensityMatrix& state,
                const DensityMatrix* companion, double companionLogW) {
        const bool last = step == path.grid.nSteps;
        if (step % options.stride == 0 || last) {
            path.steps.push_back(step);
            path.times.push_back(path.grid.time(step));
            path.y.push_back(y);
            path.wiener.push_back(w);
            path.driftIntegral.push_back(intM);
            path.logWeight.push_back(logW);
            if (options.keepStates) path.states.push_back(state);
            if (companion != nullptr) {
                path.companionLogWeight.push_back(companionLogW);
                if (options.keepStates) path.companionStates.push_back(*companion);
            }
        }
        if (options.observer) {
            options.observer(StepView{step, path.grid.time(step), state, logW, y, path.jumps.size(), companion,
                                      companionLogW});
        }
    }
};

void checkOptions(const SimulationOptions& options) {
    if (options.stride == 0) throw Error(ErrorCode::BadConfig, "snapshot stride must be >= 1");
}

TrajectoryPath startPath(const TimeGrid& grid, SimulationMode mode, const SimulationOptions& options) {
    TrajectoryPath path;
    path.grid = grid;
    path.mode = mode;
    path.stride = options.stride;
    const std::size_t snaps = grid.nSteps / options.stride + 2;
    path.steps.reserve(snaps);
    path.times.reserve(snaps);
    path.y.reserve(snaps);
    path.wiener.reserve(snaps);
    path.driftIntegral.reserve(snaps);
    path.logWeight.reserve(snaps);
    if (options.keepStates) path.states.reserve(snaps);
    return path;
}

/// Shared driver for the physical and coupled modes.
TrajectoryPath runPhysical(const MeasurementModel& model, const DensityMatrix& rhoAlpha, const DensityMatrix* rho,
                           const TimeGrid& grid, RngStream& rng, const SimulationOptions& options) {
    checkOptions(options);
    requireDensity(rhoAlpha, options.tol, "initial state");
    if (rho != nullptr) {
        requireDensity(*rho, options.tol, "reference state");
        if (!supportContained(rhoAlpha, *rho, options.tol)) {
            throw Error(ErrorCode::SupportViolation, "support of rhoAlpha is not contained in support of rho");
        }
    }
    checkGridRates(model, grid, SimulationMode::PPhysical);

    const SimulationMode mode = rho != nullptr ? SimulationMode::Coupled : SimulationMode::PPhysical;
    TrajectoryPath path = startPath(grid, mode, options);
    Recorder rec{path, options};
    KrausStepper stepper(model, grid.dt);

    const double dt = grid.dt;
    const double sqrtDt = std::sqrt(dt);
    const double drift = model.c() - model.compensatedJumpDrift();
    const auto& amps = model.amplitudes();

    DensityMatrix state = hermitianPart(rhoAlpha);
    ComplexMatrix next(model.dim(), model.dim());
    DensityMatrix companion;
    ComplexMatrix companionNext(model.dim(), model.dim());
    if (rho != nullptr) companion = hermitianPart(*rho);
    double logW = 0.0;
    double companionLogW = 0.0;
    double y = 0.0;
    double w = 0.0;
    double intM = 0.0;
    std::vector<std::size_t> fired;

    rec.record(0, y, w, intM, logW, state, rho != nullptr ? &companion : nullptr, companionLogW);
    for (std::size_t step = 1; step <= grid.nSteps; ++step) {
        const double m = meanDrift(model, state);
        const double dWbreve = sqrtDt * rng.normal();
        const double dW = dWbreve + m * dt;
        fired.clear();
        for (std::size_t a = 0; a < amps.size(); ++a) {
            const double intensity = jumpIntensity(model, a, state);
            if (rng.uniform() < intensity * amps[a].mu * dt) fired.push_back(a);
        }

        stepper.continuous(state, dW, next);
        for (std::size_t a : fired) stepper.jump(a, next);
        const double f = realTrace(next);
        if (!(f > 0.0) || !std::isfinite(f)) {
            throw Error(ErrorCode::StateCollapse, "a posteriori state lost its trace at step " + std::to_string(step));
        }
        logW += std::log(f);
        state = next;
        normalizeInPlace(state, f, path.repairs);

        if (rho != nullptr && companionLogW != -std::numeric_limits<double>::infinity()) {
            stepper.continuous(companion, dW, companionNext);
            for (std::size_t a : fired) stepper.jump(a, companionNext);
            const double fc = realTrace(companionNext);
            if (fc > 0.0 && std::isfinite(fc)) {
                companionLogW += std::log(fc);
                companion = companionNext;
                normalizeInPlace(companion, fc, path.repairs);
            } else {
                companionLogW = -std::numeric_limits<double>::infinity();
            }
        }

        y += drift * dt + model.r() * dW;
        for (std::size_t a : fired) {
            y += amps[a].z;
            path.jumps.push_back({step, amps[a].z});
        }
        w += dWbreve;
        intM += m * dt;
        rec.record(step, y, w, intM, logW, state, rho != nullptr ? &companion : nullptr, companionLogW);
    }
    return path;
}

}  // namespace

TrajectoryPath simulateLinearQ(const MeasurementModel& model, const DensityMatrix& rho0, const TimeGrid& grid,
                               RngStream& rng, const SimulationOptions& options) {
    checkOptions(options);
    requireDensity(rho0, options.tol, "initial state");
    checkGridRates(model, grid, SimulationMode::QLinear);

    TrajectoryPath path = startPath(grid, SimulationMode::QLinear, options);
    Recorder rec{path, options};
    KrausStepper stepper(model, grid.dt);

    const double dt = grid.dt;
    const double sqrtDt = std::sqrt(dt);
    const double drift = model.c() - model.compensatedJumpDrift();
    const auto& amps = model.amplitudes();

    // The state is stored normalized; the trace lives in logW.
    DensityMatrix state = hermitianPart(rho0);
    ComplexMatrix next(model.dim(), model.dim());
    double logW = 0.0;
    double y = 0.0;
    double w = 0.0;
    double intM = 0.0;
    bool absorbed = false;
    std::vector<std::size_t> fired;

    rec.record(0, y, w, intM, logW, state, nullptr, 0.0);
    for (std::size_t step = 1; step <= grid.nSteps; ++step) {
        const double dW = sqrtDt * rng.normal();
        fired.clear();
        for (std::size_t a = 0; a < amps.size(); ++a) {
            if (rng.uniform() < amps[a].mu * dt) fired.push_back(a);
        }

        if (!absorbed) {
            intM += meanDrift(model, state) * dt;
            stepper.continuous(state, dW, next);
            const double fc = realTrace(next);
            if (!(fc > 0.0) || !std::isfinite(fc)) {
                throw Error(ErrorCode::StateCollapse, "linear step lost positivity at step " + std::to_string(step));
            }
            for (std::size_t a : fired) stepper.jump(a, next);
            const double f = realTrace(next);
            if (f > 1e-300 * fc && std::isfinite(f)) {
                logW += std::log(f);
                state = next;
                normalizeInPlace(state, f, path.repairs);
            } else {
                // A jump the state cannot make: the path has zero likelihood from here on.
                absorbed = true;
                logW = -std::numeric_limits<double>::infinity();
                state = hermitianPart(rho0);
            }
        }

        y += drift * dt + model.r() * dW;
        for (std::size_t a : fired) {
            y += amps[a].z;
            path.jumps.push_back({step, amps[a].z});
        }
        w += dW;
        rec.record(step, y, w, intM, logW, state, nullptr, 0.0);
    }
    return path;
}

TrajectoryPath simulatePhysical(const MeasurementModel& model, const DensityMatrix& rho0, const TimeGrid& grid,
                                RngStream& rng, const SimulationOptions& options) {
    return runPhysical(model, rho0, nullptr, grid, rng, options);
}

TrajectoryPath simulateCoupledPair(const MeasurementModel& model, const DensityMatrix& rhoAlpha,
                                   const DensityMatrix& rho, const TimeGrid& grid, RngStream& rng,
                                   const SimulationOptions& options) {
    return runPhysical(model, rhoAlpha, &rho, grid, rng, options);
}

OutputDecomposition ybvDecomposition(const TrajectoryPath& path, const MeasurementModel& model) {
    if (path.mode == SimulationMode::QLinear) {
        throw Error(ErrorCode::WrongMode, "ybvDecomposition needs a physical path");
    }
    OutputDecomposition out;
    const double drift = model.c() - model.compensatedJumpDrift();
    std::size_t nextJump = 0;
    double jumpSum = 0.0;
    for (std::size_t i = 0; i < path.times.size(); ++i) {
        while (nextJump < path.jumps.size() && path.jumps[nextJump].step <= path.steps[i]) {
            jumpSum += path.jumps[nextJump].z;
            ++nextJump;
        }
        const double mart = model.r() * path.wiener[i];
        const double jump = jumpSum;
        out.cbv.push_back(drift * path.times[i] + model.r() * path.driftIntegral[i]);
        out.mart.push_back(mart);
        out.jump.push_back(jump);
    }
    return out;
}

}  // namespace qcm
