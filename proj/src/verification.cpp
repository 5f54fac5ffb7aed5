#include "qcm/verification.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "qcm/fixtures.hpp"
#include "qcm/information.hpp"
#include "qcm/mutual_entropy.hpp"

namespace qcm {

bool VerificationReport::pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

void VerificationReport::append(const VerificationReport& other) {
    checks.insert(checks.end(), other.checks.begin(), other.checks.end());
}

Json VerificationReport::toJson() const {
    Json j;
    j["pass"] = pass();
    j["checks"] = Json::array();
    for (const CheckResult& c : checks) {
        j["checks"].push_back({{"name", c.name},
                               {"statistic", c.statistic},
                               {"threshold", c.threshold},
                               {"pass", c.pass},
                               {"details", c.details}});
    }
    return j;
}

CheckResult thresholdCheck(std::string name, double statistic, double threshold, Json details) {
    return CheckResult{std::move(name), statistic, threshold, statistic <= threshold, std::move(details)};
}

double halvingAllowance(double coarse, double coarseSe, double fine, double fineSe) {
    return 2.0 * std::max(0.0, std::abs(coarse - fine) - 2.0 * std::hypot(coarseSe, fineSe));
}

CheckResult statisticalCheck(std::string name, const Estimate& coarse, const std::optional<Estimate>& fine,
                             double reference, double dt) {
    const double allowance = fine ? halvingAllowance(coarse.mean, coarse.se, fine->mean, fine->se) : 0.0;
    Json details{{"estimate", coarse.mean}, {"se", coarse.se}, {"reference", reference}, {"n", coarse.n},
                 {"dt", dt}, {"allowance", allowance}};
    if (fine) {
        details["fineEstimate"] = fine->mean;
        details["fineSe"] = fine->se;
    }
    return thresholdCheck(std::move(name), std::abs(coarse.mean - reference), 3.0 * coarse.se + allowance,
                          std::move(details));
}

CheckResult complexStatisticalCheck(std::string name, const Estimate& re, const Estimate& im,
                                    const std::optional<std::pair<Estimate, Estimate>>& fine, Complex reference,
                                    double dt) {
    const double se = std::hypot(re.se, im.se);
    double allowance = 0.0;
    Json details{{"estimate", {re.mean, im.mean}}, {"se", se}, {"reference", {reference.real(), reference.imag()}},
                 {"n", re.n}, {"dt", dt}};
    if (fine) {
        const double gap = std::hypot(re.mean - fine->first.mean, im.mean - fine->second.mean);
        const double gapSe = std::hypot(se, std::hypot(fine->first.se, fine->second.se));
        allowance = 2.0 * std::max(0.0, gap - 2.0 * gapSe);
        details["fineEstimate"] = {fine->first.mean, fine->second.mean};
    }
    details["allowance"] = allowance;
    const double stat = std::abs(Complex(re.mean, im.mean) - reference);
    return thresholdCheck(std::move(name), stat, 3.0 * se + allowance, std::move(details));
}

namespace {

constexpr std::uint64_t kFineSeedSalt = 0x9E3779B97F4A7C15ull;

class GPhiFunctional final : public PathFunctional {
  public:
    GPhiFunctional(std::shared_ptr<const TestFunction> k, std::shared_ptr<const ComplexMatrix> a, bool imag)
        : k_(std::move(k)), a_(std::move(a)), imag_(imag) {}

    void step(const StepView& v) override {
        if (v.step > 0) phase_ += k_->valueAt(0.5 * (lastT_ + v.t)) * (v.y - lastY_);
        lastY_ = v.y;
        lastT_ = v.t;
    }
    double value(const StepView& v) override {
        const Complex z = std::exp(Complex(0.0, phase_)) * std::exp(v.logWeight) * traceProduct(*a_, v.state);
        return imag_ ? z.imag() : z.real();
    }

  private:
    std::shared_ptr<const TestFunction> k_;
    std::shared_ptr<const ComplexMatrix> a_;
    bool imag_;
    double phase_ = 0.0;
    double lastY_ = 0.0;
    double lastT_ = 0.0;
};

/// Paired per-path statistic (X(b) - X(a)) / (b - a) - mean of the rate over [a, b] (trapezoid).
class WindowRateFunctional final : public PathFunctional {
  public:
    WindowRateFunctional(std::function<double(const DensityMatrix&)> level,
                         std::function<double(const DensityMatrix&)> rate, std::size_t ia, std::size_t ib, double dt,
                         int part)
        : level_(std::move(level)), rate_(std::move(rate)), ia_(ia), ib_(ib), dt_(dt), part_(part) {}

    void step(const StepView& v) override {
        if (v.step < ia_ || v.step > ib_) return;
        const double weight = (v.step == ia_ || v.step == ib_) ? 0.5 : 1.0;
        integral_ += weight * dt_ * rate_(v.state);
        if (v.step == ia_) start_ = level_(v.state);
        if (v.step == ib_) end_ = level_(v.state);
    }
    double value(const StepView&) override {
        const double span = static_cast<double>(ib_ - ia_) * dt_;
        const double difference = (end_ - start_) / span;
        const double average = integral_ / span;
        if (part_ == 1) return difference;
        if (part_ == 2) return average;
        return difference - average;
    }

  private:
    std::function<double(const DensityMatrix&)> level_, rate_;
    std::size_t ia_, ib_;
    double dt_;
    int part_;  ///< 0 paired statistic, 1 difference quotient, 2 window-averaged rate
    double integral_ = 0.0, start_ = 0.0, end_ = 0.0;
};

/// ln w(t) - integral of a rate, accumulated by the trapezoid rule at every step.
class IntegratedRateFunctional final : public PathFunctional {
  public:
    IntegratedRateFunctional(std::function<double(const StepView&)> level, std::function<double(const StepView&)> rate,
                             double dt)
        : level_(std::move(level)), rate_(std::move(rate)), dt_(dt) {}

    void step(const StepView& v) override {
        const double current = rate_(v);
        if (v.step > 0) integral_ += 0.5 * dt_ * (previous_ + current);
        previous_ = current;
    }
    double value(const StepView& v) override { return level_(v) - integral_; }

  private:
    std::function<double(const StepView&)> level_, rate_;
    double dt_;
    double integral_ = 0.0, previous_ = 0.0;
};

class RunningMaxFunctional final : public PathFunctional {
  public:
    explicit RunningMaxFunctional(std::function<double(const DensityMatrix&)> f) : f_(std::move(f)) {}
    void step(const StepView& v) override { max_ = std::max(max_, f_(v.state)); }
    double value(const StepView&) override { return max_; }

  private:
    std::function<double(const DensityMatrix&)> f_;
    double max_ = -std::numeric_limits<double>::infinity();
};

template <typename F>
Functional makeFunctional(std::string name, F factory) {
    return Functional{std::move(name), std::function<std::unique_ptr<PathFunctional>()>(factory)};
}

EnsembleSpec finalOnlySpec(double tMax, double dt, const McSetting& mc, SimulationMode mode, bool fine) {
    EnsembleSpec spec;
    spec.grid = TimeGrid::make(tMax, fine ? dt / 2.0 : dt);
    spec.nTrajectories = mc.n;
    spec.masterSeed = fine ? mc.seed ^ kFineSeedSalt : mc.seed;
    spec.mode = mode;
    spec.stride = spec.grid.nSteps;
    spec.workers = mc.workers;
    return spec;
}

std::size_t stepsGcd(const std::vector<double>& times, double dt) {
    std::size_t g = 0;
    for (double t : times) {
        const auto steps = static_cast<std::size_t>(std::llround(t / dt));
        g = std::gcd(g, steps);
    }
    return std::max<std::size_t>(g, 1);
}

/// A window-rate check run at dt (and dt/2 when halving).
CheckResult windowRateCheck(const std::string& name, const MeasurementModel& model, const DensityMatrix& rho, double t,
                            double h, const McSetting& mc, std::function<double(const DensityMatrix&)> level,
                            std::function<double(const DensityMatrix&)> rate) {
    auto run = [&](bool fine) {
        const EnsembleSpec spec = finalOnlySpec(t + h, mc.dt, mc, SimulationMode::PPhysical, fine);
        const double dt = spec.grid.dt;
        const auto ia = static_cast<std::size_t>(std::llround((t - h) / dt));
        const auto ib = static_cast<std::size_t>(std::llround((t + h) / dt));
        std::vector<Functional> fs;
        for (int part = 0; part < 3; ++part) {
            fs.push_back(makeFunctional("part" + std::to_string(part), [=]() {
                return std::make_unique<WindowRateFunctional>(level, rate, ia, ib, dt, part);
            }));
        }
        return runEnsemble(model, rho, std::nullopt, spec, fs);
    };
    const EnsembleSeries coarse = run(false);
    std::optional<Estimate> fine;
    if (mc.halving) fine = run(true).stats[0].back();
    CheckResult c = statisticalCheck(name, coarse.stats[0].back(), fine, 0.0, mc.dt);
    c.details["differenceQuotient"] = coarse.stats[1].back().mean;
    c.details["differenceQuotientSe"] = coarse.stats[1].back().se;
    c.details["windowRate"] = coarse.stats[2].back().mean;
    c.details["windowRateSe"] = coarse.stats[2].back().se;
    c.details["t"] = t;
    c.details["h"] = h;
    return c;
}

}  // namespace

std::vector<Functional> gphiFunctionals(const TestFunction& k, const ComplexMatrix& a, const std::string& prefix) {
    auto kk = std::make_shared<const TestFunction>(k);
    auto aa = std::make_shared<const ComplexMatrix>(a);
    std::vector<Functional> out;
    for (int part = 0; part < 2; ++part) {
        out.push_back(makeFunctional(prefix + (part == 0 ? "_re" : "_im"),
                                     [kk, aa, part]() { return std::make_unique<GPhiFunctional>(kk, aa, part == 1); }));
    }
    return out;
}

VerificationReport verifyGPhi(const MeasurementModel& model, const DensityMatrix& rho, const TestFunction& k,
                              const std::vector<NamedObservable>& observables, std::size_t nTrajectories,
                              std::uint64_t seed, double dt, unsigned workers, bool halving) {
    k.validate();
    std::vector<double> checkTimes(k.breakpoints.begin() + 1, k.breakpoints.end());

    auto run = [&](bool fine) {
        EnsembleSpec spec;
        spec.grid = TimeGrid::make(k.end(), fine ? dt / 2.0 : dt);
        spec.nTrajectories = nTrajectories;
        spec.masterSeed = fine ? seed ^ kFineSeedSalt : seed;
        spec.mode = SimulationMode::QLinear;
        spec.stride = stepsGcd(checkTimes, spec.grid.dt);
        spec.workers = workers;
        std::vector<Functional> fs;
        for (const NamedObservable& o : observables) {
            for (Functional& f : gphiFunctionals(k, o.a, o.name)) fs.push_back(std::move(f));
        }
        return runEnsemble(model, rho, std::nullopt, spec, fs);
    };
    const EnsembleSeries coarse = run(false);
    std::optional<EnsembleSeries> fine;
    if (halving) fine = run(true);

    VerificationReport report;
    for (std::size_t i = 0; i < checkTimes.size(); ++i) {
        const double t = checkTimes[i];
        TestFunction prefix{{k.breakpoints.begin(), k.breakpoints.begin() + static_cast<std::ptrdiff_t>(i) + 2},
                            {k.values.begin(), k.values.begin() + static_cast<std::ptrdiff_t>(i) + 1}};
        for (const NamedObservable& o : observables) {
            const Complex reference = characteristicFunctional(model, rho, prefix, o.a);
            const std::size_t ti = coarse.timeIndex(t);
            std::optional<std::pair<Estimate, Estimate>> finePair;
            if (fine) {
                const std::size_t fi = fine->timeIndex(t);
                finePair = std::make_pair(fine->at(o.name + "_re", fi), fine->at(o.name + "_im", fi));
            }
            CheckResult c = complexStatisticalCheck("GPhi " + o.name + " t=" + formatDouble(t),
                                                    coarse.at(o.name + "_re", ti), coarse.at(o.name + "_im", ti),
                                                    finePair, reference, dt);
            c.details["t"] = t;
            report.add(std::move(c));
        }
    }
    return report;
}

VerificationReport checkMartingale(const std::string& name, const MeasurementModel& model, const DensityMatrix& rho,
                                   const std::vector<double>& times, const McSetting& mc) {
    EnsembleSpec spec;
    spec.grid = TimeGrid::make(*std::max_element(times.begin(), times.end()), mc.dt);
    spec.nTrajectories = mc.n;
    spec.masterSeed = mc.seed;
    spec.mode = SimulationMode::QLinear;
    spec.stride = stepsGcd(times, spec.grid.dt);
    spec.workers = mc.workers;
    const EnsembleSeries s = runEnsemble(model, rho, std::nullopt, spec, resolveFunctionals({"weight"}, model, spec.mode));
    VerificationReport report;
    for (double t : times) {
        CheckResult c = statisticalCheck(name + " t=" + formatDouble(t), s.at("weight", s.timeIndex(t)), std::nullopt,
                                         1.0, mc.dt);
        c.details["absorbedPaths"] = s.provenance.absorbedPaths;
        report.add(std::move(c));
    }
    return report;
}

VerificationReport checkDemixture(const std::string& name, const MeasurementModel& model, const DensityMatrix& rho,
                                  double t, const DensityMatrix& eta, const McSetting& mc) {
    auto run = [&](bool fine) {
        const EnsembleSpec spec = finalOnlySpec(t, mc.dt, mc, SimulationMode::PPhysical, fine);
        return runEnsemble(model, rho, std::nullopt, spec, resolveFunctionals({"rho"}, model, spec.mode));
    };
    const EnsembleSeries coarse = run(false);
    std::optional<EnsembleSeries> fine;
    if (mc.halving) fine = run(true);
    VerificationReport report;
    const Eigen::Index d = model.dim();
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            for (int part = 0; part < 2; ++part) {
                const std::string entry =
                    std::string("rho_") + (part == 0 ? "re" : "im") + "_" + std::to_string(i) + "_" + std::to_string(j);
                const double reference = part == 0 ? eta(i, j).real() : eta(i, j).imag();
                std::optional<Estimate> f;
                if (fine) f = fine->column(entry).back();
                report.add(statisticalCheck(name + " " + entry, coarse.column(entry).back(), f, reference, mc.dt));
            }
        }
    }
    return report;
}

CheckResult checkEntropyRate(const std::string& name, const MeasurementModel& model, const DensityMatrix& rho,
                             double t, double h, const McSetting& mc) {
    const MeasurementModel* m = &model;
    return windowRateCheck(
        name, model, rho, t, h, mc, [](const DensityMatrix& s) { return vonNeumannEntropy(s); },
        [m](const DensityMatrix& s) { return entropyRateTerms(*m, s, false).total(); });
}

CheckResult checkPurityRate(const std::string& name, const MeasurementModel& model, const DensityMatrix& rho,
                            double t, double h, const McSetting& mc) {
    const MeasurementModel* m = &model;
    return windowRateCheck(
        name, model, rho, t, h, mc, [](const DensityMatrix& s) { return linearEntropy(s); },
        [m](const DensityMatrix& s) {
            const PurityRateTerms p = purityRateTerms(*m, s);
            return p.p1 - p.p2 - p.p3;
        });
}

CheckResult checkPurityBound(const std::string& name, const MeasurementModel& model, const DensityMatrix& rho,
                             double tMax, double bound, const McSetting& mc) {
    EnsembleSpec spec = finalOnlySpec(tMax, mc.dt, mc, SimulationMode::PPhysical, false);
    spec.keepSamples = true;
    std::vector<Functional> fs{makeFunctional("maxPurity", []() {
        return std::make_unique<RunningMaxFunctional>([](const DensityMatrix& s) { return linearEntropy(s); });
    })};
    const EnsembleSeries s = runEnsemble(model, rho, std::nullopt, spec, fs);
    const std::vector<double>& samples = s.samples[0].back();
    const double worst = *std::max_element(samples.begin(), samples.end());
    return thresholdCheck(name, worst, bound,
                          {{"meanOfPathMax", s.stats[0].back().mean}, {"n", mc.n}, {"dt", mc.dt}, {"tMax", tMax}});
}

CheckResult checkRelEntropyQ(const std::string& name, const MeasurementModel& model, const DensityMatrix& rho,
                             double t, const McSetting& mc) {
    const MeasurementModel* m = &model;
    const EnsembleSpec spec = finalOnlySpec(t, mc.dt, mc, SimulationMode::PPhysical, false);
    const double dt = spec.grid.dt;
    std::vector<Functional> fs{
        makeFunctional("residual",
                       [m, dt]() {
                           return std::make_unique<IntegratedRateFunctional>(
                               [](const StepView& v) { return v.logWeight; },
                               [m](const StepView& v) { return relEntropyRateQIntegrand(*m, v.state); }, dt);
                       }),
        pointFunctional("logWeight", [](const StepView& v) { return v.logWeight; })};
    const EnsembleSeries s = runEnsemble(model, rho, std::nullopt, spec, fs);
    CheckResult c = statisticalCheck(name, s.stats[0].back(), std::nullopt, 0.0, mc.dt);
    c.details["relativeEntropy"] = s.stats[1].back().mean;
    c.details["relativeEntropySe"] = s.stats[1].back().se;
    return c;
}

VerificationReport checkRelEntropyPair(const std::string& name, const MeasurementModel& model,
                                       const DensityMatrix& rhoAlpha, const DensityMatrix& rho, double t,
                                       std::size_t points, const McSetting& mc) {
    const MeasurementModel* m = &model;
    EnsembleSpec spec;
    spec.grid = TimeGrid::make(t, mc.dt);
    spec.nTrajectories = mc.n;
    spec.masterSeed = mc.seed;
    spec.mode = SimulationMode::Coupled;
    spec.stride = std::max<std::size_t>(1, spec.grid.nSteps / std::max<std::size_t>(points, 1));
    spec.workers = mc.workers;
    spec.keepSamples = true;
    const double dt = spec.grid.dt;
    std::vector<Functional> fs{
        pointFunctional("logRatio", [](const StepView& v) { return v.logWeight - v.companionLogWeight; }),
        makeFunctional("residual", [m, dt]() {
            return std::make_unique<IntegratedRateFunctional>(
                [](const StepView& v) { return v.logWeight - v.companionLogWeight; },
                [m](const StepView& v) { return relEntropyRatePairIntegrand(*m, v.state, *v.companion); }, dt);
        })};
    const EnsembleSeries s = runEnsemble(model, rhoAlpha, rho, spec, fs);

    VerificationReport report;
    // Monotonicity on consecutive snapshots, with the SE of the paired per-path increment.
    double worstDrop = 0.0;
    double worstSlack = 0.0;
    bool monotone = true;
    for (std::size_t i = 1; i < s.times.size(); ++i) {
        RunningStats inc;
        const auto& a = s.samples[0][i - 1];
        const auto& b = s.samples[0][i];
        for (std::size_t p = 0; p < a.size(); ++p) inc.add(b[p] - a[p]);
        const Estimate e = inc.estimate();
        if (e.mean < -2.0 * e.se) monotone = false;
        if (-e.mean - 2.0 * e.se > worstDrop - worstSlack) {
            worstDrop = -e.mean;
            worstSlack = 2.0 * e.se;
        }
    }
    report.add(CheckResult{name + " nondecreasing", worstDrop, worstSlack, monotone,
                           {{"snapshots", s.times.size()}, {"n", mc.n}}});

    const Estimate final = s.stats[0].back();
    const double bound = quantumRelativeEntropy(rhoAlpha, rho);
    report.add(thresholdCheck(name + " bound", final.mean, bound + 3.0 * final.se,
                              {{"estimate", final.mean}, {"se", final.se}, {"quantumBound", bound}}));
    CheckResult rate = statisticalCheck(name + " integrated rate", s.stats[1].back(), std::nullopt, 0.0, mc.dt);
    rate.details["relativeEntropy"] = final.mean;
    report.add(std::move(rate));
    return report;
}

SuiteScale parseScale(const std::string& text) {
    if (text == "quick") return SuiteScale::Quick;
    if (text == "full") return SuiteScale::Full;
    throw Error(ErrorCode::BadConfig, "unknown scale '" + text + "' (expected quick or full)");
}

namespace {

DensityMatrix randomState(RngStream& rng, Eigen::Index d) {
    ComplexMatrix g(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) g(i, j) = Complex(rng.normal(), rng.normal());
    }
    ComplexMatrix rho = g * g.adjoint();
    return hermitianPart(rho / rho.trace().real());
}

ComplexMatrix randomMatrix(RngStream& rng, Eigen::Index d) {
    ComplexMatrix g(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) g(i, j) = Complex(rng.normal(), rng.normal());
    }
    return g;
}

void deterministicChecks(VerificationReport& report, std::size_t randomCount) {
    RngStream rng(20240611, 0);
    for (const std::string& name : fixtureNames()) {
        const MeasurementModel model = validateModel(rawFixture(name));
        const Eigen::Index d = model.dim();

        const double kDefect =
            (generatorKMatrix(model, 0.0).matrix -
             vectorizeSuperoperator([&](const ComplexMatrix& x) { return liouvillian(model, x); }, d).matrix)
                .cwiseAbs()
                .maxCoeff();
        report.add(thresholdCheck(name + " K(0) = L", kDefect, 1e-14));

        double worstTrace = 0.0;
        for (std::size_t i = 0; i < randomCount; ++i) {
            const ComplexMatrix tau = randomMatrix(rng, d);
            const double norm = tau.norm();
            worstTrace = std::max(worstTrace, std::abs(liouvillian(model, tau).trace()) / norm);
        }
        report.add(thresholdCheck(name + " Tr L[tau] = 0", worstTrace, 1e-12));

        for (double t : {0.1, 1.0, 10.0}) {
            const DensityMatrix eta = aprioriState(model, plusState(), t);
            const double defect = std::max(std::abs(eta.trace().real() - 1.0), std::max(0.0, -minEigenvalue(eta)));
            report.add(thresholdCheck(name + " semigroup state t=" + formatDouble(t), defect, 1e-10));
        }

        TestFunction twoPiece{{0.0, 0.4, 1.0}, {0.7, -1.3}};
        const ComplexMatrix combined = characteristicOperator(model, plusState(), twoPiece);
        const ComplexMatrix first = characteristicOperator(model, plusState(), TestFunction{{0.0, 0.4}, {0.7}});
        const ComplexMatrix composed =
            unvec(expmScaled(0.6 * generatorKMatrix(model, -1.3).matrix) * vec(first), d);
        report.add(thresholdCheck(name + " factorization", (combined - composed).cwiseAbs().maxCoeff(), 1e-9));
    }

    const MeasurementModel modelD = validateModel(rawModelD());
    const double excited = aprioriState(modelD, basisState(2, 0), 1.0)(0, 0).real();
    report.add(thresholdCheck("modelD excited population e^-1", std::abs(excited - std::exp(-1.0)), 1e-8));

    const auto eq = equilibriumState(modelD);
    report.add(thresholdCheck("modelD equilibrium residual", eq ? eq->residual : 1.0, 1e-8));

    for (const char* name : {"modelD", "modelJ"}) {
        const QuasiCompletenessReport q = quasiCompletenessCheck(validateModel(rawFixture(name)));
        report.add(thresholdCheck(name + std::string(" quasi-complete"), (q.c1Holds && q.c2Holds) ? 0.0 : 1.0, 0.0));
    }

    double worstD2 = 0.0;
    for (Eigen::Index d : {2, 3, 4}) {
        for (std::size_t i = 0; i < randomCount; ++i) {
            RawModel raw;
            raw.dim = d;
            raw.H = ComplexMatrix::Zero(d, d);
            raw.R = randomMatrix(rng, d);
            const MeasurementModel model = validateModel(raw);
            const DensityMatrix tau = randomState(rng, d);
            const double spectral = entropyRateD2(model, tau);
            const double quad = entropyRateD2Quadrature(model, tau);
            worstD2 = std::max(worstD2, std::abs(spectral - quad) / std::max(std::abs(spectral), 1e-300));
        }
    }
    report.add(thresholdCheck("D2 spectral = quadrature (relative)", worstD2, 1e-6));
    report.add(thresholdCheck("D2 pure state", std::abs(entropyRateD2(modelD, plusState())), 1e-12));

    const ShattenDecomposition dec = shattenDecompose(maximallyMixed(2));
    const MutualEntropyReport r0 = mutualEntropyReport(modelD, maximallyMixed(2), dec, 0.0, MonteCarloConfig{});
    const double s = std::log(2.0);
    const double initialDefect = std::max({std::abs(r0.sSigmaPi.mean - s), std::abs(r0.sSigmaPi1.mean - s),
                                           std::abs(r0.sSigmaPi2.mean - s), std::abs(r0.sPi3 - s),
                                           std::abs(r0.sSigmaPi3.mean), std::abs(r0.sPi1.mean),
                                           std::abs(r0.sPi2.mean)});
    report.add(thresholdCheck("mutual entropies at t=0", initialDefect, 1e-10));
}

}  // namespace

VerificationReport selfTestSuite(SuiteScale scale, const std::vector<std::pair<std::string, RawModel>>& extraModels,
                                 unsigned workers) {
    VerificationReport report;
    for (const std::string& name : fixtureNames()) {
        bool ok = true;
        std::string message = "valid";
        try {
            validateModel(rawFixture(name));
        } catch (const Error& e) {
            ok = false;
            message = e.what();
        }
        report.add(CheckResult{"validate " + name, ok ? 0.0 : 1.0, 0.0, ok, {{"message", message}}});
    }
    for (const auto& [name, raw] : extraModels) {
        bool ok = true;
        std::string message = "valid";
        try {
            validateModel(raw);
        } catch (const Error& e) {
            ok = false;
            message = e.what();
        }
        report.add(CheckResult{"validate " + name, ok ? 0.0 : 1.0, 0.0, ok, {{"message", message}}});
    }

    const bool full = scale == SuiteScale::Full;
    deterministicChecks(report, full ? 100 : 20);

    McSetting mc;
    mc.n = full ? 10000 : 1000;
    mc.workers = workers;
    mc.halving = full;
    for (const std::string& name : fixtureNames()) {
        const MeasurementModel model = validateModel(rawFixture(name));
        report.append(checkMartingale(name + " martingale", model, plusState(), {0.5, 1.0}, mc));
    }
    const MeasurementModel modelD = validateModel(rawModelD());
    const MeasurementModel modelJ = validateModel(rawModelJ());
    report.add(checkPurityBound("modelD pure stays pure", modelD, plusState(), 1.0, 1e-4, mc));

    if (full) {
        const std::vector<NamedObservable> obs{{"identity", identity(2)}, {"sigma_z", pauli::z()}};
        for (const char* name : {"model0", "modelD", "modelJ"}) {
            const MeasurementModel model = validateModel(rawFixture(name));
            for (double kappa : {0.0, 1.0}) {
                VerificationReport g =
                    verifyGPhi(model, plusState(), TestFunction::constant(kappa, 1.0), obs, mc.n, mc.seed, mc.dt, workers);
                for (CheckResult& c : g.checks) c.name = std::string(name) + " k=" + formatDouble(kappa) + " " + c.name;
                report.append(g);
            }
        }
        for (const auto& [name, model] : {std::pair<std::string, const MeasurementModel*>{"modelD", &modelD},
                                          std::pair<std::string, const MeasurementModel*>{"modelJ", &modelJ}}) {
            report.append(checkDemixture(name + " demixture", *model, plusState(), 1.0,
                                         aprioriState(*model, plusState(), 1.0), mc));
        }
        report.add(checkEntropyRate("modelJ entropy rate", modelJ, maximallyMixed(2), 0.5, 0.05, mc));
        report.add(checkPurityRate("modelJ purity rate", modelJ, maximallyMixed(2), 0.5, 0.05, mc));
        report.add(checkRelEntropyQ("modelD I(P|Q) rate", modelD, plusState(), 1.0, mc));
        report.append(checkRelEntropyPair("modelD I(Pa|P)", modelD, plusState(), maximallyMixed(2), 1.0, 10, mc));
    }
    return report;
}

}  // namespace qcm
