#include <doctest.h>

#include <cmath>
#include <sstream>

#include "../test_util.hpp"
#include "qcm/ensemble.hpp"
#include "qcm/fixtures.hpp"
#include "qcm/json_io.hpp"
#include "qcm/semigroup.hpp"

using namespace qcm;

namespace {

EnsembleSpec smallSpec(SimulationMode mode, unsigned workers) {
    EnsembleSpec spec;
    spec.grid = TimeGrid::make(0.5, 1e-2);
    spec.nTrajectories = 37;
    spec.masterSeed = 77;
    spec.mode = mode;
    spec.stride = 10;
    spec.workers = workers;
    return spec;
}

}  // namespace

TEST_CASE("ensemble results do not depend on the worker count") {
    const MeasurementModel model = validateModel(rawModelJ());
    for (SimulationMode mode : {SimulationMode::QLinear, SimulationMode::PPhysical, SimulationMode::Coupled}) {
        std::vector<std::string> names{"y", "logWeight", "purity", "rho"};
        if (mode == SimulationMode::Coupled) names.push_back("logRatio");
        const auto functionals = resolveFunctionals(names, model, mode);
        const std::optional<DensityMatrix> reference = maximallyMixed(2);
        const EnsembleSeries one = runEnsemble(model, plusState(), reference, smallSpec(mode, 1), functionals);
        for (unsigned w : {2u, 5u}) {
            const EnsembleSeries many = runEnsemble(model, plusState(), reference, smallSpec(mode, w), functionals);
            CHECK(seriesCsv(one) == seriesCsv(many));
            CHECK(provenanceJson(one.provenance).dump() == provenanceJson(many.provenance).dump());
        }
    }
}

TEST_CASE("ensemble statistics match the per-path simulation") {
    const MeasurementModel model = validateModel(rawModelD());
    EnsembleSpec spec = smallSpec(SimulationMode::PPhysical, 3);
    spec.keepSamples = true;
    spec.keepPaths = 2;
    const EnsembleSeries s = runEnsemble(model, plusState(), std::nullopt, spec, resolveFunctionals({"y"}, model,
                                                                                                    spec.mode));
    REQUIRE(s.times.size() == 6);
    CHECK(s.times.back() == 0.5);
    REQUIRE(s.paths.size() == 2);
    std::vector<double> finals;
    for (std::size_t i = 0; i < spec.nTrajectories; ++i) {
        RngStream rng(spec.masterSeed, spec.firstStream + i);
        SimulationOptions opt;
        opt.stride = spec.stride;
        const TrajectoryPath p = simulatePhysical(model, plusState(), spec.grid, rng, opt);
        finals.push_back(p.y.back());
        if (i < 2) CHECK(p.y == s.paths[i].y);
    }
    CHECK(s.sampleAt("y", 5) == finals);
    const Estimate e = estimateWithSE(finals);
    CHECK(s.at("y", 5).mean == doctest::Approx(e.mean).epsilon(1e-14));
    CHECK(s.at("y", 5).se == doctest::Approx(e.se).epsilon(1e-12));
    CHECK(s.at("y", 5).n == spec.nTrajectories);
    CHECK(s.timeIndex(0.3) == 3);
}

TEST_CASE("decoupled output has mean ct and variance r^2 t") {
    const MeasurementModel model = validateModel(rawModel0());
    EnsembleSpec spec;
    spec.grid = TimeGrid::make(2.0, 1e-2);
    spec.nTrajectories = 4000;
    spec.masterSeed = 5;
    spec.mode = SimulationMode::PPhysical;
    spec.stride = 100;
    spec.keepSamples = true;
    const EnsembleSeries s = runEnsemble(model, plusState(), std::nullopt, spec,
                                         resolveFunctionals({"y", "ySquared"}, model, spec.mode));
    for (std::size_t i = 1; i < s.times.size(); ++i) {
        const double t = s.times[i];
        const Estimate y = s.at("y", i);
        CHECK(std::abs(y.mean - t) <= 3.0 * y.se);
        // Sample variance of Y against r^2 t, with the SE of a normal sample variance.
        RunningStats stats;
        for (double x : s.sampleAt("y", i)) stats.add(x);
        const double se = t * std::sqrt(2.0 / (stats.count() - 1.0));
        CHECK(std::abs(stats.variance() - t) <= 3.0 * se);
    }
}

TEST_CASE("weighted entries under Q reproduce the a priori state") {
    const MeasurementModel model = validateModel(rawModelJ());
    EnsembleSpec spec = smallSpec(SimulationMode::QLinear, 2);
    spec.nTrajectories = 2000;
    const EnsembleSeries s = runEnsemble(model, plusState(), std::nullopt, spec,
                                         resolveFunctionals({"sigma"}, model, spec.mode));
    const DensityMatrix eta = aprioriState(model, plusState(), 0.5);
    const Estimate e = s.at("sigma_re_0_0", s.times.size() - 1);
    CHECK(std::abs(e.mean - eta(0, 0).real()) <= 3.0 * e.se + 0.01);
}

TEST_CASE("functional resolution") {
    const MeasurementModel model = validateModel(rawModelD());
    const auto names = registeredFunctionals();
    CHECK(std::find(names.begin(), names.end(), "entropy") != names.end());
    CHECK(std::is_sorted(names.begin(), names.end()));
    CHECK(resolveFunctionals({"rho"}, model, SimulationMode::PPhysical).size() == 8);
    CHECK(resolveFunctionals({"rho"}, model, SimulationMode::PPhysical)[1].name == "rho_im_0_0");
    CHECK(testutil::errorCodeOf([&] { resolveFunctionals({"nope"}, model, SimulationMode::PPhysical); }) ==
          ErrorCode::BadConfig);
    CHECK(testutil::errorCodeOf([&] { resolveFunctionals({"logRatio"}, model, SimulationMode::PPhysical); }) ==
          ErrorCode::BadConfig);
    CHECK_NOTHROW(resolveFunctionals({"logRatio"}, model, SimulationMode::Coupled));
}

TEST_CASE("coupled mode needs a reference state") {
    const MeasurementModel model = validateModel(rawModelD());
    const EnsembleSpec spec = smallSpec(SimulationMode::Coupled, 1);
    CHECK_THROWS_AS(runEnsemble(model, plusState(), std::nullopt, spec, {}), Error);
}

TEST_CASE("RunConfig validation and modes") {
    RunConfig c;
    CHECK_NOTHROW(c.validate());
    c.nTrajectories = 0;
    CHECK(testutil::errorCodeOf([&] { c.validate(); }) == ErrorCode::BadConfig);
    c = RunConfig{};
    c.dt = 0.3;
    CHECK(testutil::errorCodeOf([&] { c.validate(); }) == ErrorCode::BadConfig);
    c = RunConfig{};
    c.outputs.clear();
    CHECK(testutil::errorCodeOf([&] { c.validate(); }) == ErrorCode::BadConfig);
    CHECK(parseMode("q") == SimulationMode::QLinear);
    CHECK(parseMode("P-physical") == SimulationMode::PPhysical);
    CHECK(parseMode("coupled") == SimulationMode::Coupled);
    CHECK(testutil::errorCodeOf([] { parseMode("x"); }) == ErrorCode::BadConfig);
}

TEST_CASE("runFromConfig reproduces runEnsemble") {
    const MeasurementModel model = validateModel(rawModelJ());
    RunConfig c;
    c.initialState = "plus";
    c.tMax = 0.5;
    c.dt = 1e-2;
    c.nTrajectories = 20;
    c.masterSeed = 9;
    c.snapshotStride = 10;
    c.outputs = {"y", "jumps"};
    const EnsembleSeries a = runFromConfig(c, model);
    EnsembleSpec spec;
    spec.grid = TimeGrid::make(0.5, 1e-2);
    spec.nTrajectories = 20;
    spec.masterSeed = 9;
    spec.mode = SimulationMode::PPhysical;
    spec.stride = 10;
    const EnsembleSeries b =
        runEnsemble(model, plusState(), std::nullopt, spec, resolveFunctionals(c.outputs, model, spec.mode));
    CHECK(seriesCsv(a) == seriesCsv(b));
    CHECK(c.toJson()["masterSeed"] == 9);
}

TEST_CASE("CSV layouts") {
    const MeasurementModel model = validateModel(rawModelJ());
    EnsembleSpec spec = smallSpec(SimulationMode::PPhysical, 1);
    spec.keepPaths = 1;
    const EnsembleSeries s = runEnsemble(model, plusState(), std::nullopt, spec,
                                         resolveFunctionals({"y", "purity"}, model, spec.mode));
    std::istringstream series(seriesCsv(s));
    std::string line;
    std::getline(series, line);
    CHECK(line == "t,functional,mean,se");
    std::getline(series, line);
    CHECK(line.rfind("0,y,", 0) == 0);
    std::size_t rows = 1;
    while (std::getline(series, line)) ++rows;
    CHECK(rows == s.times.size() * 2);

    std::istringstream path(pathCsv(s.paths.at(0), true));
    std::getline(path, line);
    CHECK(line == "t,y,logWeight,jumpFlag,re_0_0,im_0_0,re_0_1,im_0_1,re_1_0,im_1_0,re_1_1,im_1_1");
    std::getline(path, line);
    CHECK(line.rfind("0,0,0,0,", 0) == 0);
}

TEST_CASE("provenance records the run") {
    const MeasurementModel model = validateModel(rawModelD());
    const EnsembleSeries s = runEnsemble(model, plusState(), std::nullopt, smallSpec(SimulationMode::QLinear, 1),
                                         resolveFunctionals({"weight"}, model, SimulationMode::QLinear));
    const Json j = provenanceJson(s.provenance);
    CHECK(j["masterSeed"] == 77);
    CHECK(j["nTrajectories"] == 37);
    CHECK(j["modelHash"] == modelHash(rawModelD()));
    CHECK(j["dt"].get<double>() == 1e-2);
}
