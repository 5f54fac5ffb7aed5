#include "qcm/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "qcm/information.hpp"

namespace qcm {

namespace {

class PointFunctional final : public PathFunctional {
  public:
    explicit PointFunctional(const std::function<double(const StepView&)>* f) : f_(f) {}
    double value(const StepView& view) override { return (*f_)(view); }

  private:
    const std::function<double(const StepView&)>* f_;
};

using PointFn = std::function<double(const StepView&)>;

std::map<std::string, PointFn> pointTable(const MeasurementModel* m) {
    std::map<std::string, PointFn> t;
    t["y"] = [](const StepView& v) { return v.y; };
    t["ySquared"] = [](const StepView& v) { return v.y * v.y; };
    t["logWeight"] = [](const StepView& v) { return v.logWeight; };
    t["weight"] = [](const StepView& v) { return std::exp(v.logWeight); };
    t["jumps"] = [](const StepView& v) { return static_cast<double>(v.jumpsSoFar); };
    t["purity"] = [](const StepView& v) { return linearEntropy(v.state); };
    t["entropy"] = [](const StepView& v) { return vonNeumannEntropy(v.state); };
    t["m"] = [m](const StepView& v) { return meanDrift(*m, v.state); };
    t["relEntropyRateQ"] = [m](const StepView& v) { return relEntropyRateQIntegrand(*m, v.state); };
    t["p1dot"] = [m](const StepView& v) { return purityRateTerms(*m, v.state).p1; };
    t["p2dot"] = [m](const StepView& v) { return purityRateTerms(*m, v.state).p2; };
    t["p3dot"] = [m](const StepView& v) { return purityRateTerms(*m, v.state).p3; };
    t["purityRate"] = [m](const StepView& v) {
        const PurityRateTerms p = purityRateTerms(*m, v.state);
        return p.p1 - p.p2 - p.p3;
    };
    t["D1"] = [m](const StepView& v) { return entropyRateD1(*m, v.state); };
    t["D2"] = [m](const StepView& v) { return entropyRateD2(*m, v.state); };
    t["D3"] = [m](const StepView& v) { return entropyRateD3(*m, v.state); };
    t["entropyRate"] = [m](const StepView& v) { return entropyRateTerms(*m, v.state, false).total(); };
    return t;
}

std::map<std::string, PointFn> coupledTable(const MeasurementModel* m) {
    std::map<std::string, PointFn> t;
    t["logRatio"] = [](const StepView& v) { return v.logWeight - v.companionLogWeight; };
    t["relEntropyRatePair"] = [m](const StepView& v) { return relEntropyRatePairIntegrand(*m, v.state, *v.companion); };
    t["companionEntropy"] = [](const StepView& v) { return vonNeumannEntropy(*v.companion); };
    return t;
}

std::string entryName(const char* prefix, const char* part, Eigen::Index i, Eigen::Index j) {
    return std::string(prefix) + "_" + part + "_" + std::to_string(i) + "_" + std::to_string(j);
}

void appendEntries(std::vector<Functional>& out, Eigen::Index d, bool weighted) {
    const char* prefix = weighted ? "sigma" : "rho";
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            for (int part = 0; part < 2; ++part) {
                out.push_back(pointFunctional(entryName(prefix, part == 0 ? "re" : "im", i, j),
                                              [i, j, part, weighted](const StepView& v) {
                                                  const Complex z = v.state(i, j);
                                                  const double x = part == 0 ? z.real() : z.imag();
                                                  return weighted ? std::exp(v.logWeight) * x : x;
                                              }));
            }
        }
    }
}

struct PathResult {
    std::vector<double> row;  ///< [snapshot * nFunctionals + functional]
    RepairStats repairs;
    bool absorbed = false;
    std::optional<TrajectoryPath> path;
    std::exception_ptr error;
};

}  // namespace

Functional pointFunctional(std::string name, std::function<double(const StepView&)> f) {
    auto shared = std::make_shared<std::function<double(const StepView&)>>(std::move(f));
    return Functional{std::move(name), [shared]() -> std::unique_ptr<PathFunctional> {
                          return std::make_unique<PointFunctional>(shared.get());
                      }};
}

std::vector<std::string> registeredFunctionals() {
    std::vector<std::string> names;
    for (const auto& [name, fn] : pointTable(nullptr)) names.push_back(name);
    for (const auto& [name, fn] : coupledTable(nullptr)) names.push_back(name);
    names.emplace_back("rho");
    names.emplace_back("sigma");
    std::sort(names.begin(), names.end());
    return names;
}

std::vector<Functional> resolveFunctionals(const std::vector<std::string>& names, const MeasurementModel& model,
                                           SimulationMode mode) {
    const auto point = pointTable(&model);
    const auto coupled = coupledTable(&model);
    std::vector<Functional> out;
    for (const std::string& name : names) {
        if (name == "rho" || name == "sigma") {
            appendEntries(out, model.dim(), name == "sigma");
        } else if (auto it = point.find(name); it != point.end()) {
            out.push_back(pointFunctional(name, it->second));
        } else if (auto ct = coupled.find(name); ct != coupled.end()) {
            if (mode != SimulationMode::Coupled) {
                throw Error(ErrorCode::BadConfig, "functional '" + name + "' needs coupled mode");
            }
            out.push_back(pointFunctional(name, ct->second));
        } else {
            throw Error(ErrorCode::BadConfig, "unknown functional '" + name + "'");
        }
    }
    return out;
}

std::size_t EnsembleSeries::index(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw Error(ErrorCode::BadConfig, "series has no functional '" + name + "'");
    return static_cast<std::size_t>(it - names.begin());
}

std::size_t EnsembleSeries::timeIndex(double t) const {
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (std::abs(times[i] - t) <= 1e-9 * std::max(1.0, std::abs(t))) return i;
    }
    throw Error(ErrorCode::BadConfig, "no snapshot at t = " + formatDouble(t));
}

EnsembleSeries runEnsemble(const MeasurementModel& model, const DensityMatrix& rho0,
                           const std::optional<DensityMatrix>& reference, const EnsembleSpec& spec,
                           const std::vector<Functional>& functionals) {
    if (spec.nTrajectories < 1) throw Error(ErrorCode::BadConfig, "need at least one trajectory");
    if (spec.stride < 1) throw Error(ErrorCode::BadConfig, "snapshot stride must be >= 1");
    if (spec.mode == SimulationMode::Coupled && !reference) {
        throw Error(ErrorCode::BadConfig, "coupled mode needs a reference state");
    }
    // Fail fast on configuration errors before any thread starts.
    checkGridRates(model, spec.grid, spec.mode == SimulationMode::QLinear ? SimulationMode::QLinear
                                                                          : SimulationMode::PPhysical);

    EnsembleSeries series;
    std::vector<std::size_t> snapSteps;
    for (std::size_t s = 0; s <= spec.grid.nSteps; ++s) {
        if (s % spec.stride == 0 || s == spec.grid.nSteps) {
            snapSteps.push_back(s);
            series.times.push_back(spec.grid.time(s));
        }
    }
    const std::size_t nSnap = snapSteps.size();
    const std::size_t nFunc = functionals.size();
    for (const Functional& f : functionals) series.names.push_back(f.name);

    std::vector<std::vector<RunningStats>> acc(nFunc, std::vector<RunningStats>(nSnap));
    if (spec.keepSamples) {
        series.samples.assign(nFunc, std::vector<std::vector<double>>(nSnap));
        for (auto& perTime : series.samples) {
            for (auto& v : perTime) v.reserve(spec.nTrajectories);
        }
    }

    Provenance& prov = series.provenance;
    prov.modelHash = modelHash(model.raw());
    prov.masterSeed = spec.masterSeed;
    prov.firstStream = spec.firstStream;
    prov.dt = spec.grid.dt;
    prov.tMax = spec.grid.tMax;
    prov.nTrajectories = spec.nTrajectories;
    prov.stride = spec.stride;
    prov.mode = spec.mode;

    auto runOne = [&](std::size_t index, PathResult& out) {
        try {
            std::vector<std::unique_ptr<PathFunctional>> evals;
            evals.reserve(nFunc);
            for (const Functional& f : functionals) evals.push_back(f.make());
            out.row.assign(nSnap * nFunc, 0.0);
            std::size_t snap = 0;
            SimulationOptions options;
            options.stride = spec.stride;
            options.keepStates = index < spec.keepPaths;
            options.observer = [&](const StepView& view) {
                for (auto& e : evals) e->step(view);
                if (snap < nSnap && view.step == snapSteps[snap]) {
                    for (std::size_t f = 0; f < nFunc; ++f) out.row[snap * nFunc + f] = evals[f]->value(view);
                    ++snap;
                }
            };
            RngStream rng(spec.masterSeed, spec.firstStream + index);
            TrajectoryPath path;
            switch (spec.mode) {
                case SimulationMode::QLinear: path = simulateLinearQ(model, rho0, spec.grid, rng, options); break;
                case SimulationMode::PPhysical: path = simulatePhysical(model, rho0, spec.grid, rng, options); break;
                case SimulationMode::Coupled:
                    path = simulateCoupledPair(model, rho0, *reference, spec.grid, rng, options);
                    break;
            }
            out.repairs = path.repairs;
            out.absorbed = !path.logWeight.empty() && path.logWeight.back() == -std::numeric_limits<double>::infinity();
            if (index < spec.keepPaths) out.path = std::move(path);
        } catch (...) {
            out.error = std::current_exception();
        }
    };

    constexpr std::size_t kBlock = 256;
    std::vector<PathResult> block;
    for (std::size_t start = 0; start < spec.nTrajectories; start += kBlock) {
        const std::size_t len = std::min(kBlock, spec.nTrajectories - start);
        block.assign(len, PathResult{});
        const unsigned threads = std::max(1u, std::min<unsigned>(spec.workers, static_cast<unsigned>(len)));
        if (threads == 1) {
            for (std::size_t i = 0; i < len; ++i) runOne(start + i, block[i]);
        } else {
            std::atomic<std::size_t> next{0};
            std::vector<std::thread> pool;
            pool.reserve(threads);
            for (unsigned w = 0; w < threads; ++w) {
                pool.emplace_back([&]() {
                    for (std::size_t i = next++; i < len; i = next++) runOne(start + i, block[i]);
                });
            }
            for (std::thread& th : pool) th.join();
        }
        // Single reducer, trajectory order.
        for (std::size_t i = 0; i < len; ++i) {
            PathResult& r = block[i];
            if (r.error) std::rethrow_exception(r.error);
            for (std::size_t s = 0; s < nSnap; ++s) {
                for (std::size_t f = 0; f < nFunc; ++f) {
                    const double x = r.row[s * nFunc + f];
                    acc[f][s].add(x);
                    if (spec.keepSamples) series.samples[f][s].push_back(x);
                }
            }
            prov.repairs.repairs += r.repairs.repairs;
            prov.repairs.warnings += r.repairs.warnings;
            prov.repairs.maxClip = std::max(prov.repairs.maxClip, r.repairs.maxClip);
            if (r.absorbed) ++prov.absorbedPaths;
            if (r.path) series.paths.push_back(std::move(*r.path));
        }
    }

    series.stats.assign(nFunc, std::vector<Estimate>(nSnap));
    for (std::size_t f = 0; f < nFunc; ++f) {
        for (std::size_t s = 0; s < nSnap; ++s) series.stats[f][s] = acc[f][s].estimate();
    }
    return series;
}

SimulationMode parseMode(const std::string& text) {
    if (text == "q" || text == "Q" || text == "Q-linear") return SimulationMode::QLinear;
    if (text == "p" || text == "P" || text == "P-physical") return SimulationMode::PPhysical;
    if (text == "coupled") return SimulationMode::Coupled;
    throw Error(ErrorCode::BadConfig, "unknown mode '" + text + "' (expected q, p or coupled)");
}

void RunConfig::validate() const {
    if (nTrajectories < 1) throw Error(ErrorCode::BadConfig, "nTrajectories must be >= 1");
    if (snapshotStride < 1) throw Error(ErrorCode::BadConfig, "snapshotStride must be >= 1");
    if (workers < 1) throw Error(ErrorCode::BadConfig, "workers must be >= 1");
    if (outputs.empty()) throw Error(ErrorCode::BadConfig, "no outputs requested");
    (void)TimeGrid::make(tMax, dt);
}

Json RunConfig::toJson() const {
    Json j;
    j["modelPath"] = modelPath;
    j["initialState"] = initialState;
    if (mode == SimulationMode::Coupled) j["referenceState"] = referenceState;
    j["tMax"] = tMax;
    j["dt"] = dt;
    j["nTrajectories"] = nTrajectories;
    j["masterSeed"] = masterSeed;
    j["mode"] = to_string(mode);
    j["outputs"] = outputs;
    j["snapshotStride"] = snapshotStride;
    return j;
}

EnsembleSeries runFromConfig(const RunConfig& config, const MeasurementModel& model) {
    config.validate();
    EnsembleSpec spec;
    spec.grid = TimeGrid::make(config.tMax, config.dt);
    spec.nTrajectories = config.nTrajectories;
    spec.masterSeed = config.masterSeed;
    spec.mode = config.mode;
    spec.stride = config.snapshotStride;
    spec.workers = config.workers;
    spec.keepPaths = config.keepPaths;
    const DensityMatrix rho0 = parseState(config.initialState, model.dim());
    std::optional<DensityMatrix> reference;
    if (config.mode == SimulationMode::Coupled) reference = parseState(config.referenceState, model.dim());
    return runEnsemble(model, rho0, reference, spec, resolveFunctionals(config.outputs, model, config.mode));
}

std::string seriesCsv(const EnsembleSeries& series) {
    std::ostringstream os;
    os << "t,functional,mean,se\n";
    for (std::size_t s = 0; s < series.times.size(); ++s) {
        for (std::size_t f = 0; f < series.names.size(); ++f) {
            const Estimate& e = series.stats[f][s];
            os << formatDouble(series.times[s]) << ',' << series.names[f] << ',' << formatDouble(e.mean) << ','
               << formatDouble(e.se) << '\n';
        }
    }
    return os.str();
}

void writeSeriesCsv(const EnsembleSeries& series, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::BadConfig, "cannot write " + path);
    out << seriesCsv(series);
}

Json provenanceJson(const Provenance& p) {
    Json j;
    j["modelHash"] = p.modelHash;
    j["masterSeed"] = p.masterSeed;
    j["firstStream"] = p.firstStream;
    j["dt"] = p.dt;
    j["tMax"] = p.tMax;
    j["nTrajectories"] = p.nTrajectories;
    j["snapshotStride"] = p.stride;
    j["mode"] = to_string(p.mode);
    j["positivityRepairs"] = p.repairs.repairs;
    j["repairWarnings"] = p.repairs.warnings;
    j["maxClip"] = p.repairs.maxClip;
    j["absorbedPaths"] = p.absorbedPaths;
    return j;
}

std::string pathCsv(const TrajectoryPath& path, bool withStates) {
    std::ostringstream os;
    os << "t,y,logWeight,jumpFlag";
    const bool states = withStates && !path.states.empty();
    Eigen::Index d = states ? path.states.front().rows() : 0;
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) os << ",re_" << i << '_' << j << ",im_" << i << '_' << j;
    }
    os << '\n';
    std::size_t nextJump = 0;
    for (std::size_t s = 0; s < path.times.size(); ++s) {
        int flag = 0;
        while (nextJump < path.jumps.size() && path.jumps[nextJump].step <= path.steps[s]) {
            flag = 1;
            ++nextJump;
        }
        os << formatDouble(path.times[s]) << ',' << formatDouble(path.y[s]) << ',' << formatDouble(path.logWeight[s])
           << ',' << flag;
        for (Eigen::Index i = 0; i < d; ++i) {
            for (Eigen::Index j = 0; j < d; ++j) {
                os << ',' << formatDouble(path.states[s](i, j).real()) << ',' << formatDouble(path.states[s](i, j).imag());
            }
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace qcm
