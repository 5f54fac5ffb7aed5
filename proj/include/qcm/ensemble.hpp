#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qcm/estimators.hpp"
#include "qcm/json_io.hpp"
#include "qcm/trajectories.hpp"

namespace qcm {

/// Per-path evaluator. step() sees every step (for path-dependent quantities);
/// value() is asked for at snapshot steps only.
class PathFunctional {
  public:
    virtual ~PathFunctional() = default;
    virtual void step(const StepView&) {}
    virtual double value(const StepView& view) = 0;
};

/// A named scalar functional of one path; make() is called once per path.
struct Functional {
    std::string name;
    std::function<std::unique_ptr<PathFunctional>()> make;
};

/// Functional whose value depends on the current step only.
Functional pointFunctional(std::string name, std::function<double(const StepView&)> f);

/// Names accepted by resolveFunctionals. "rho" expands to rho_re_i_j / rho_im_i_j and
/// "sigma" to the weighted entries sigma_re_i_j / sigma_im_i_j.
std::vector<std::string> registeredFunctionals();

/// Throws BadConfig for unknown names or names that need a different mode.
std::vector<Functional> resolveFunctionals(const std::vector<std::string>& names, const MeasurementModel& model,
                                           SimulationMode mode);

struct EnsembleSpec {
    TimeGrid grid;
    std::size_t nTrajectories = 1;
    std::uint64_t masterSeed = 0;
    std::uint64_t firstStream = 0;  ///< trajectory i uses RngStream(masterSeed, firstStream + i)
    SimulationMode mode = SimulationMode::QLinear;
    std::size_t stride = 1;
    unsigned workers = 1;
    bool keepSamples = false;  ///< keep every per-path value, indexed [functional][time][path]
    std::size_t keepPaths = 0;  ///< keep the first keepPaths full paths (states included)
};

struct Provenance {
    std::string modelHash;
    std::uint64_t masterSeed = 0;
    std::uint64_t firstStream = 0;
    double dt = 0.0;
    double tMax = 0.0;
    std::size_t nTrajectories = 0;
    std::size_t stride = 1;
    SimulationMode mode = SimulationMode::QLinear;
    RepairStats repairs;
    std::size_t absorbedPaths = 0;  ///< Q paths whose weight vanished
};

struct EnsembleSeries {
    std::vector<double> times;
    std::vector<std::string> names;
    std::vector<std::vector<Estimate>> stats;  ///< [functional][time]
    std::vector<std::vector<std::vector<double>>> samples;
    std::vector<TrajectoryPath> paths;
    Provenance provenance;

    std::size_t index(const std::string& name) const;
    const std::vector<Estimate>& column(const std::string& name) const { return stats[index(name)]; }
    Estimate at(const std::string& name, std::size_t timeIndex) const { return stats[index(name)][timeIndex]; }
    const std::vector<double>& sampleAt(const std::string& name, std::size_t timeIndex) const {
        return samples.at(index(name)).at(timeIndex);
    }
    std::size_t timeIndex(double t) const;
};

/// Runs spec.nTrajectories independent paths. The result depends only on the model, the
/// initial states and every EnsembleSpec field except `workers`: reduction runs in trajectory order.
/// `reference` is required in coupled mode and ignored otherwise.
EnsembleSeries runEnsemble(const MeasurementModel& model, const DensityMatrix& rho0,
                           const std::optional<DensityMatrix>& reference, const EnsembleSpec& spec,
                           const std::vector<Functional>& functionals);

/// Command-line style configuration of one ensemble run.
struct RunConfig {
    std::string modelPath;
    std::string initialState = "mixed";
    std::string referenceState = "mixed";  ///< coupled mode
    double tMax = 1.0;
    double dt = 1e-3;
    std::size_t nTrajectories = 1000;
    std::uint64_t masterSeed = 1;
    SimulationMode mode = SimulationMode::PPhysical;
    std::vector<std::string> outputs{"y", "logWeight", "purity"};
    std::size_t snapshotStride = 1;
    unsigned workers = 1;
    std::size_t keepPaths = 0;

    void validate() const;
    Json toJson() const;
};

SimulationMode parseMode(const std::string& text);

EnsembleSeries runFromConfig(const RunConfig& config, const MeasurementModel& model);

/// Long-format CSV: t,functional,mean,se.
void writeSeriesCsv(const EnsembleSeries& series, const std::string& path);
std::string seriesCsv(const EnsembleSeries& series);

Json provenanceJson(const Provenance& p);

/// CSV of one path: t,y,logWeight,jumpFlag and optionally the flattened state entries.
std::string pathCsv(const TrajectoryPath& path, bool withStates);

}  // namespace qcm
