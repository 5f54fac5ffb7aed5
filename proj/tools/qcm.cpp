// Command-line front end: validate, simulate, characteristic, report, selftest, fixture.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "qcm/ensemble.hpp"
#include "qcm/fixtures.hpp"
#include "qcm/json_io.hpp"
#include "qcm/mutual_entropy.hpp"
#include "qcm/semigroup.hpp"
#include "qcm/verification.hpp"

namespace fs = std::filesystem;
using namespace qcm;

namespace {

// A model argument is a JSON file, or the name of a built-in fixture when no such file exists.
RawModel resolveModel(const std::string& arg) {
    if (fs::exists(arg)) return readRawModel(arg);
    for (const std::string& name : fixtureNames()) {
        if (arg == name) return rawFixture(name);
    }
    throw Error(ErrorCode::BadConfig, "no model file or fixture named '" + arg + "'");
}

void writeText(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::BadConfig, "cannot write " + path.string());
    out << text;
}

int runValidate(const std::string& modelArg) {
    try {
        const MeasurementModel model = validateModel(resolveModel(modelArg));
        const QuasiCompletenessReport q = quasiCompletenessCheck(model);
        Json j{{"valid", true},
               {"dim", model.dim()},
               {"channels", model.raw().channels.size()},
               {"amplitudes", model.amplitudes().size()},
               {"quasiComplete", {{"c1", q.c1Holds}, {"c2", q.c2Holds}}},
               {"modelHash", modelHash(model.raw())}};
        std::cout << j.dump(2) << '\n';
        return 0;
    } catch (const Error& e) {
        std::cout << Json{{"valid", false}, {"error", std::string(to_string(e.code()))}, {"message", e.what()}}.dump(2)
                  << '\n';
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and analysis of quantum continual measurements"};
    app.require_subcommand(1);

    std::string modelArg;
    auto* validate = app.add_subcommand("validate", "check a model file and report its diagnostics");
    validate->add_option("model", modelArg, "model JSON file or fixture name")->required();

    RunConfig run;
    std::string modeText = "p";
    std::string outDir;
    auto* simulate = app.add_subcommand("simulate", "run an ensemble and write mean/SE time series");
    simulate->add_option("--model", run.modelPath, "model JSON file or fixture name")->required();
    simulate->add_option("--state", run.initialState, "mixed | basis:<i> | plus | state JSON file");
    simulate->add_option("--reference", run.referenceState, "reference initial state (coupled mode)");
    simulate->add_option("--tmax", run.tMax)->required();
    simulate->add_option("--dt", run.dt)->required();
    simulate->add_option("--n", run.nTrajectories)->required();
    simulate->add_option("--seed", run.masterSeed)->required();
    simulate->add_option("--mode", modeText, "q | p | coupled");
    simulate->add_option("--outputs", run.outputs, "functional names")->delimiter(',');
    simulate->add_option("--stride", run.snapshotStride, "steps between snapshots");
    simulate->add_option("--workers", run.workers);
    simulate->add_option("--paths", run.keepPaths, "also write the first N paths");
    simulate->add_option("--out", outDir, "output directory")->required();

    std::string stateArg = "mixed";
    double kappa = 0.0;
    double tMax = 1.0;
    std::size_t points = 10;
    auto* characteristic = app.add_subcommand("characteristic", "characteristic function of Y(t) from the semigroup");
    characteristic->add_option("--model", modelArg)->required();
    characteristic->add_option("--state", stateArg);
    characteristic->add_option("--k", kappa, "constant test function value")->required();
    characteristic->add_option("--tmax", tMax)->required();
    characteristic->add_option("--points", points, "number of equally spaced times after 0");

    double reportT = 1.0;
    MonteCarloConfig mc;
    auto* report = app.add_subcommand("report", "mutual-entropy report for the spectral decomposition of the state");
    report->add_option("--model", modelArg)->required();
    report->add_option("--state", stateArg);
    report->add_option("--t", reportT)->required();
    report->add_option("--n", mc.nTrajectories)->required();
    report->add_option("--seed", mc.masterSeed)->required();
    report->add_option("--dt", mc.dt);
    report->add_option("--workers", mc.workers);

    std::string scaleText = "quick";
    std::vector<std::string> extraModels;
    unsigned selftestWorkers = 1;
    auto* selftest = app.add_subcommand("selftest", "bundled invariant checks");
    selftest->add_option("--scale", scaleText, "quick | full");
    selftest->add_option("--model", extraModels, "additional model files to validate");
    selftest->add_option("--workers", selftestWorkers);

    std::string fixtureName;
    std::string fixtureOut;
    auto* fixture = app.add_subcommand("fixture", "write a built-in fixture model as JSON");
    fixture->add_option("name", fixtureName)->required();
    fixture->add_option("--out", fixtureOut)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*validate) return runValidate(modelArg);

        if (*simulate) {
            run.mode = parseMode(modeText);
            const MeasurementModel model = validateModel(resolveModel(run.modelPath));
            const EnsembleSeries series = runFromConfig(run, model);
            fs::create_directories(outDir);
            writeSeriesCsv(series, (fs::path(outDir) / "series.csv").string());
            Json manifest{{"config", run.toJson()}, {"provenance", provenanceJson(series.provenance)}};
            writeText(fs::path(outDir) / "manifest.json", manifest.dump(2) + "\n");
            for (std::size_t i = 0; i < series.paths.size(); ++i) {
                writeText(fs::path(outDir) / ("path_" + std::to_string(i) + ".csv"), pathCsv(series.paths[i], true));
            }
            return 0;
        }

        if (*characteristic) {
            const MeasurementModel model = validateModel(resolveModel(modelArg));
            const DensityMatrix rho = parseState(stateArg, model.dim());
            std::cout << "t,kappa,re,im\n";
            for (std::size_t i = 0; i <= points; ++i) {
                const double t = tMax * static_cast<double>(i) / static_cast<double>(points);
                const Complex v = incrementCharacteristic(model, rho, kappa, t);
                std::cout << formatDouble(t) << ',' << formatDouble(kappa) << ',' << formatDouble(v.real()) << ','
                          << formatDouble(v.imag()) << '\n';
            }
            return 0;
        }

        if (*report) {
            const MeasurementModel model = validateModel(resolveModel(modelArg));
            const DensityMatrix rho = parseState(stateArg, model.dim());
            const MutualEntropyReport r = mutualEntropyReport(model, rho, shattenDecompose(rho), reportT, mc);
            std::cout << r.toJson().dump(2) << '\n';
            return 0;
        }

        if (*selftest) {
            std::vector<std::pair<std::string, RawModel>> extras;
            for (const std::string& path : extraModels) {
                try {
                    extras.emplace_back(path, readRawModel(path));
                } catch (const Error& e) {
                    // Unparseable files still show up as failed validation entries.
                    RawModel broken;
                    extras.emplace_back(path + " (" + e.what() + ")", broken);
                }
            }
            const VerificationReport r = selfTestSuite(parseScale(scaleText), extras, selftestWorkers);
            std::cout << r.toJson().dump(2) << '\n';
            return r.pass() ? 0 : 1;
        }

        if (*fixture) {
            writeModel(rawFixture(fixtureName), fixtureOut);
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
