// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Desk scale: d = 2 fixtures, N = 10^4, dt = 10^-3 with a 5 * 10^-4 halving run.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "../oracles.hpp"
#include "../test_util.hpp"
#include "qcm/ensemble.hpp"
#include "qcm/fixtures.hpp"
#include "qcm/information.hpp"
#include "qcm/json_io.hpp"
#include "qcm/mutual_entropy.hpp"
#include "qcm/semigroup.hpp"
#include "qcm/trajectories.hpp"
#include "qcm/verification.hpp"

using namespace qcm;
using testutil::maxAbs;

namespace {

constexpr std::size_t kN = 10000;
constexpr double kDt = 1e-3;

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

McSetting mc(std::uint64_t seed, bool halving = true) {
    McSetting s;
    s.n = kN;
    s.seed = seed;
    s.dt = kDt;
    s.workers = workers();
    s.halving = halving;
    return s;
}

/// Collects the sub-checks of one criterion; the first failures are echoed on the result line.
class Criterion {
  public:
    void require(bool ok, const std::string& what) {
        ++count_;
        if (!ok) failures_.push_back(what);
    }
    void require(const CheckResult& c) {
        require(c.pass, c.name + " (" + formatDouble(c.statistic) + " > " + formatDouble(c.threshold) + ")");
    }
    void require(const VerificationReport& r) {
        for (const CheckResult& c : r.checks) require(c);
    }
    bool pass() const { return failures_.empty(); }
    std::size_t count() const { return count_; }
    const std::vector<std::string>& failures() const { return failures_; }

  private:
    std::size_t count_ = 0;
    std::vector<std::string> failures_;
};

bool run(int id, const char* title, const std::function<void(Criterion&)>& body) {
    const auto start = std::chrono::steady_clock::now();
    Criterion c;
    try {
        body(c);
    } catch (const std::exception& e) {
        c.require(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2d %s [%zu checks, %.1f s]", c.pass() ? "PASS" : "FAIL", id, title, c.count(), seconds);
    for (std::size_t i = 0; i < std::min<std::size_t>(3, c.failures().size()); ++i) {
        std::printf("%s %s", i == 0 ? ":" : ";", c.failures()[i].c_str());
    }
    std::printf("\n");
    std::fflush(stdout);
    return c.pass();
}

double traceNormOf(const ComplexMatrix& x) {
    Eigen::JacobiSVD<ComplexMatrix> svd(x);
    return svd.singularValues().sum();
}

void generatorConsistency(Criterion& c) {
    RngStream rng(101, 0);
    for (const std::string& name : fixtureNames()) {
        const RawModel raw = rawFixture(name);
        const MeasurementModel model = validateModel(raw);
        // Matrix units probe every entry of the superoperator.
        const ComplexMatrix k0 = oracle::superMatrix([&](const ComplexMatrix& x) { return generatorK(model, 0.0, x); }, 2);
        const ComplexMatrix l = oracle::superMatrix([&](const ComplexMatrix& x) { return oracle::lindblad(raw, x); }, 2);
        c.require(maxAbs(k0 - l) <= 1e-14, name + ": K(0) differs from L");
        c.require(maxAbs(k0 - model.liouvillianMatrix().matrix) <= 1e-14, name + ": K(0) differs from matrix L");
        for (int rep = 0; rep < 100; ++rep) {
            const ComplexMatrix tau = testutil::ginibre(rng, 2);
            const double tr = std::abs(liouvillian(model, tau).trace());
            c.require(tr <= 1e-12 * traceNormOf(tau), name + ": Tr L[tau] = " + formatDouble(tr));
        }
    }
}

void semigroup(Criterion& c) {
    RngStream rng(102, 0);
    for (const std::string& name : fixtureNames()) {
        const MeasurementModel model = validateModel(rawFixture(name));
        for (int rep = 0; rep < 5; ++rep) {
            const DensityMatrix rho = testutil::randomDensity(rng, 2);
            const StateSeries s = propagateMaster(model, rho, {0.1, 1.0, 10.0});
            for (std::size_t i = 0; i < s.times.size(); ++i) {
                const std::string at = name + " t=" + formatDouble(s.times[i]);
                c.require(std::abs(s.states[i].trace().real() - 1.0) <= 1e-10, at + ": trace");
                c.require(minEigenvalue(s.states[i]) >= -1e-10, at + ": positivity");
            }
        }
    }
    const DensityMatrix eta = aprioriState(validateModel(rawModelD()), basisState(2, 0), 1.0);
    c.require(std::abs(eta(0, 0).real() - std::exp(-1.0)) <= 1e-8, "modelD excited population");
}

void factorization(Criterion& c) {
    const double s = 0.4, t = 1.0;
    for (const char* name : {"modelJ", "modelD"}) {
        const RawModel raw = rawFixture(name);
        const MeasurementModel model = validateModel(raw);
        for (const auto& [k1, k2] : std::vector<std::pair<double, double>>{{1.0, -0.5}, {2.0, 0.7}, {0.0, 1.3}}) {
            auto gen = [&](double k) {
                return oracle::superMatrix([&](const ComplexMatrix& x) { return oracle::generator(raw, k, x); }, 2);
            };
            const ComplexMatrix composed = oracle::unflatten(
                oracle::expmTaylor((t - s) * gen(k2)) * oracle::expmTaylor(s * gen(k1)) * oracle::flatten(plusState()), 2);
            const TestFunction k{{0.0, s, t}, {k1, k2}};
            for (const ComplexMatrix& a : {identity(2), pauli::z()}) {
                const Complex expected = (a.adjoint() * composed).trace();
                const Complex got = characteristicFunctional(model, plusState(), k, a);
                c.require(std::abs(got - expected) <= 1e-9, std::string(name) + ": two-piece functional");
            }
        }
    }
}

void martingale(Criterion& c) {
    std::uint64_t seed = 400;
    for (const std::string& name : fixtureNames()) {
        const MeasurementModel model = validateModel(rawFixture(name));
        c.require(checkMartingale(name, model, plusState(), {0.5, 1.0}, mc(++seed, false)));
    }
}

void gphi(Criterion& c) {
    std::uint64_t seed = 500;
    for (const char* name : {"model0", "modelD", "modelJ"}) {
        const RawModel raw = rawFixture(name);
        const MeasurementModel model = validateModel(raw);
        for (double k : {0.0, 1.0}) {
            const TestFunction kf = TestFunction::constant(k, 1.0);
            // The deterministic reference itself against an RK4 solution of dG/dt = K(k) G.
            const ComplexMatrix g = oracle::rk4([&](const ComplexMatrix& x) { return oracle::generator(raw, k, x); },
                                                plusState(), 1.0, 4000);
            c.require(maxAbs(characteristicOperator(model, plusState(), kf) - g) <= 1e-9,
                      std::string(name) + ": G(k) against RK4");
            const McSetting s = mc(++seed);
            c.require(verifyGPhi(model, plusState(), kf, {{"identity", identity(2)}, {"sigma_z", pauli::z()}}, s.n,
                                 s.seed, s.dt, s.workers, true));
        }
    }
}

void demixture(Criterion& c) {
    std::uint64_t seed = 600;
    for (const char* name : {"modelD", "modelJ"}) {
        const RawModel raw = rawFixture(name);
        const MeasurementModel model = validateModel(raw);
        const ComplexMatrix eta = oracle::rk4([&](const ComplexMatrix& x) { return oracle::lindblad(raw, x); },
                                              plusState(), 1.0, 4000);
        c.require(checkDemixture(name, model, plusState(), 1.0, eta, mc(++seed)));
    }
}

void d2Oracle(Criterion& c) {
    RngStream rng(103, 0);
    int cases = 0;
    for (Eigen::Index d : {2, 3, 4}) {
        const int count = d == 2 ? 34 : 33;
        for (int rep = 0; rep < count; ++rep, ++cases) {
            const MeasurementModel model = validateModel(testutil::randomModel(rng, d));
            const DensityMatrix tau = testutil::randomDensity(rng, d);
            const double spectral = entropyRateD2(model, tau);
            const double quadrature = entropyRateD2Quadrature(model, tau);
            c.require(std::abs(spectral - quadrature) <= 1e-6 * std::max(1.0, std::abs(spectral)),
                      "d=" + std::to_string(d) + ": spectral " + formatDouble(spectral) + " vs quadrature " +
                          formatDouble(quadrature));
            ComplexVector v(d);
            for (Eigen::Index i = 0; i < d; ++i) v(i) = Complex(rng.normal(), rng.normal());
            v.normalize();
            c.require(std::abs(entropyRateD2(model, v * v.adjoint())) <= 1e-12, "D2 of a pure state");
        }
    }
    c.require(cases == 100, "case count");
}

void entropyRate(Criterion& c) {
    const MeasurementModel model = validateModel(rawModelJ());
    c.require(checkEntropyRate("modelJ entropy rate", model, maximallyMixed(2), 0.5, 0.05, mc(701)));
}

void purityRate(Criterion& c) {
    const MeasurementModel j = validateModel(rawModelJ());
    c.require(checkPurityRate("modelJ purity rate", j, maximallyMixed(2), 0.5, 0.05, mc(702)));
    const MeasurementModel d = validateModel(rawModelD());
    c.require(checkPurityBound("modelD pure stays pure", d, plusState(), 1.0, 1e-4, mc(703, false)));
}

void relativeEntropies(Criterion& c) {
    const MeasurementModel d = validateModel(rawModelD());
    c.require(checkRelEntropyQ("modelD I(P|Q)", d, plusState(), 1.0, mc(801)));
    c.require(checkRelEntropyPair("modelD I(Pa|P)", d, plusState(), maximallyMixed(2), 1.0, 5, mc(802)));
}

void mutualEntropies(Criterion& c) {
    const MeasurementModel model = validateModel(rawModelD());
    const DensityMatrix rho = maximallyMixed(2);
    const ShattenDecomposition dec = shattenDecompose(rho);
    const double s0 = std::log(2.0);
    MonteCarloConfig cfg;
    cfg.dt = kDt;
    cfg.nTrajectories = kN;
    cfg.masterSeed = 901;
    cfg.workers = workers();

    const MutualEntropyReport r0 = mutualEntropyReport(model, rho, dec, 0.0, cfg);
    for (const auto& [name, value, expected] : std::vector<std::tuple<const char*, double, double>>{
             {"sSigmaPi", r0.sSigmaPi.mean, s0},
             {"sSigmaPi1", r0.sSigmaPi1.mean, s0},
             {"sSigmaPi2", r0.sSigmaPi2.mean, s0},
             {"sPi3", r0.sPi3, s0},
             {"sSigmaPi3", r0.sSigmaPi3.mean, 0.0},
             {"sPi1", r0.sPi1.mean, 0.0},
             {"sPi2", r0.sPi2.mean, 0.0}}) {
        c.require(std::abs(value - expected) <= 1e-10, std::string("t=0 ") + name + " = " + formatDouble(value));
    }

    const MutualEntropyReport r1 = mutualEntropyReport(model, rho, dec, 1.0, cfg);
    for (int i = 0; i < 3; ++i) {
        const Estimate& e = r1.chainResidual[i];
        c.require(std::abs(e.mean) <= 3.0 * e.se + 1e-12, "chain rule residual " + std::to_string(i + 1));
    }
    c.require(r1.sPi2.mean >= -3.0 * r1.sPi2.se, "S(Pi2|Pi) >= 0");
    c.require(r1.sPi2.mean <= s0 + 3.0 * r1.sPi2.se, "S(Pi2|Pi) <= S(rho)");
    const Estimate gap = difference(r1.sSigmaPi, r1.sSigmaPiIndependent);
    c.require(std::abs(gap.mean) <= 3.0 * gap.se, "independent re-estimate of S(Sigma|Pi)");

    // S(Pi3|Pi) = sum_a w_a S(eta^a_t | eta_t) along a grid, from RK4 states.
    const RawModel raw = rawModelD();
    auto flow = [&](const ComplexMatrix& x, double t) {
        return oracle::rk4([&](const ComplexMatrix& y) { return oracle::lindblad(raw, y); }, x, t, 50);
    };
    std::vector<ComplexMatrix> etas(dec.states.begin(), dec.states.end());
    ComplexMatrix eta = rho;
    double previous = r0.sPi3;
    for (int step = 1; step <= 20; ++step) {
        eta = flow(eta, 0.05);
        double value = 0.0;
        for (std::size_t a = 0; a < etas.size(); ++a) {
            etas[a] = flow(etas[a], 0.05);
            value += dec.weights[a] * quantumRelativeEntropy(hermitianPart(etas[a]), hermitianPart(eta));
        }
        c.require(value <= previous + 1e-9, "S(Pi3|Pi) increased at step " + std::to_string(step));
        previous = value;
    }
    c.require(std::abs(previous - r1.sPi3) <= 1e-8, "S(Pi3|Pi) at t=1 against RK4");
}

void nullModel(Criterion& c) {
    const MeasurementModel model = validateModel(rawModelI());
    const DensityMatrix rho = testutil::diag({0.75, 0.25});
    const TimeGrid grid = TimeGrid::make(1.0, kDt);
    std::size_t jumps = 0;
    bool weightsZero = true;
    double stateDeviation = 0.0;
    std::vector<double> finalLog;
    SimulationOptions opt;
    opt.keepStates = false;
    opt.stride = grid.nSteps;
    opt.observer = [&](const StepView& v) {
        weightsZero = weightsZero && v.logWeight == 0.0;
        stateDeviation = std::max(stateDeviation, maxAbs(v.state - rho));
    };
    for (std::size_t i = 0; i < 2000; ++i) {
        RngStream q(1201, i);
        jumps += simulateLinearQ(model, rho, grid, q, opt).jumps.size();
        RngStream p(1202, i);
        const TrajectoryPath path = simulatePhysical(model, rho, grid, p, opt);
        jumps += path.jumps.size();
        finalLog.push_back(path.logWeight.back());
    }
    c.require(jumps > 0, "paths contain jumps");
    c.require(weightsZero, "logWeight identically zero");
    c.require(stateDeviation <= 1e-14, "rho_t = rho (deviation " + formatDouble(stateDeviation) + ")");
    c.require(classicalRelEntropyQ(finalLog).mean == 0.0, "I(P|Q) = 0");
    MonteCarloConfig cfg;
    cfg.nTrajectories = 1000;
    cfg.masterSeed = 1203;
    cfg.workers = workers();
    const MutualEntropyReport r = mutualEntropyReport(model, rho, shattenDecompose(rho), 1.0, cfg);
    c.require(r.sPi2.mean == 0.0, "S(Pi2|Pi) = 0");
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

/// Writes the artifacts of one run into `dir`: series, provenance and the kept paths.
void writeRun(const RunConfig& config, const MeasurementModel& model, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const EnsembleSeries s = runFromConfig(config, model);
    writeSeriesCsv(s, (dir / "series.csv").string());
    std::ofstream(dir / "manifest.json") << Json{{"config", config.toJson()}, {"provenance", provenanceJson(s.provenance)}}.dump(2);
    for (std::size_t i = 0; i < s.paths.size(); ++i) {
        std::ofstream(dir / ("path_" + std::to_string(i) + ".csv")) << pathCsv(s.paths[i], true);
    }
}

void reproducibility(Criterion& c) {
    const MeasurementModel model = validateModel(rawModelJ());
    const auto root = std::filesystem::temp_directory_path() / "qcm_acceptance_repro";
    std::filesystem::remove_all(root);
    for (SimulationMode mode : {SimulationMode::QLinear, SimulationMode::PPhysical, SimulationMode::Coupled}) {
        RunConfig config;
        config.initialState = "plus";
        config.tMax = 1.0;
        config.dt = kDt;
        config.nTrajectories = 1000;
        config.masterSeed = 1301;
        config.mode = mode;
        config.snapshotStride = 50;
        config.keepPaths = 3;
        config.outputs = {"y", "logWeight", "purity", "entropy", "jumps", "rho"};
        if (mode == SimulationMode::Coupled) config.outputs.push_back("logRatio");
        std::vector<std::filesystem::path> dirs;
        for (unsigned w : {1u, 4u, 8u}) {
            config.workers = w;
            dirs.push_back(root / (std::string(to_string(mode)) + "_w" + std::to_string(w)));
            writeRun(config, model, dirs.back());
        }
        for (const auto& entry : std::filesystem::directory_iterator(dirs[0])) {
            const std::string file = entry.path().filename().string();
            const std::string reference = slurp(entry.path());
            c.require(!reference.empty(), file + " is empty");
            for (std::size_t i = 1; i < dirs.size(); ++i) {
                c.require(slurp(dirs[i] / file) == reference,
                          std::string(to_string(mode)) + " " + file + " differs at " + dirs[i].filename().string());
            }
        }
    }
    std::filesystem::remove_all(root);
}

}  // namespace

int main() {
    std::printf("acceptance: N=%zu dt=%g (halving at %g), %u worker(s)\n", kN, kDt, kDt / 2, workers());
    bool ok = true;
    ok &= run(1, "generator consistency", generatorConsistency);
    ok &= run(2, "semigroup trace, positivity and decay", semigroup);
    ok &= run(3, "factorization of the characteristic functional", factorization);
    ok &= run(4, "Q-martingale of the norm", martingale);
    ok &= run(5, "characteristic functional from Q paths", gphi);
    ok &= run(6, "demixture of the a priori state", demixture);
    ok &= run(7, "D2 spectral form against quadrature", d2Oracle);
    ok &= run(8, "entropy rate identity", entropyRate);
    ok &= run(9, "purity rate identity and pure-state preservation", purityRate);
    ok &= run(10, "classical relative entropies", relativeEntropies);
    ok &= run(11, "mutual entropy report", mutualEntropies);
    ok &= run(12, "information-less null model", nullModel);
    ok &= run(13, "reproducibility across worker counts", reproducibility);
    std::printf("%s\n", ok ? "ALL PASS" : "SOME CRITERIA FAILED");
    return ok ? 0 : 1;
}
