#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qcm/ensemble.hpp"
#include "qcm/semigroup.hpp"

namespace qcm {

struct CheckResult {
    std::string name;
    double statistic = 0.0;
    double threshold = 0.0;
    bool pass = false;
    Json details = Json::object();
};

struct VerificationReport {
    std::vector<CheckResult> checks;

    bool pass() const;
    void add(CheckResult check) { checks.push_back(std::move(check)); }
    void append(const VerificationReport& other);
    Json toJson() const;
};

/// pass iff statistic <= threshold (NaN fails).
CheckResult thresholdCheck(std::string name, double statistic, double threshold, Json details = Json::object());

/// Discretization allowance from a dt-halving pair: the part of |coarse - fine| that the
/// noise of the difference does not explain, doubled (first-order bias at dt is twice
/// the coarse-fine gap).
double halvingAllowance(double coarse, double coarseSe, double fine, double fineSe);

/// |coarse - reference| <= 3 SE + C dt, with C dt from halvingAllowance when `fine` is given.
CheckResult statisticalCheck(std::string name, const Estimate& coarse, const std::optional<Estimate>& fine,
                             double reference, double dt);

/// Complex version; SE is the norm of the component SEs.
CheckResult complexStatisticalCheck(std::string name, const Estimate& re, const Estimate& im,
                                    const std::optional<std::pair<Estimate, Estimate>>& fine, Complex reference,
                                    double dt);

/// Re and Im of Phi_t(k) Tr{a sigma_t} on Q paths, with Phi_t(k) = exp(i int k dY)
/// accumulated from the realized increments of Y.
std::vector<Functional> gphiFunctionals(const TestFunction& k, const ComplexMatrix& a, const std::string& prefix);

struct NamedObservable {
    std::string name;
    ComplexMatrix a;
};

/// Checks <a, G_t(k)[rho]> = E_Q[Phi_t(k) <a, sigma_t>] at every breakpoint of k, for each
/// observable. With `halving`, a second ensemble at dt/2 sets the discretization allowance.
VerificationReport verifyGPhi(const MeasurementModel& model, const DensityMatrix& rho, const TestFunction& k,
                              const std::vector<NamedObservable>& observables, std::size_t nTrajectories,
                              std::uint64_t seed, double dt, unsigned workers = 1, bool halving = true);

/// Monte Carlo setting shared by the property checks below.
struct McSetting {
    std::size_t n = 10000;
    std::uint64_t seed = 1;
    double dt = 1e-3;
    unsigned workers = 1;
    bool halving = true;  ///< rerun at dt/2 (fresh streams) to size the discretization allowance
};

/// E_Q[||sigma_t||] = 1 at each time, within 3 SE.
VerificationReport checkMartingale(const std::string& name, const MeasurementModel& model, const DensityMatrix& rho,
                                   const std::vector<double>& times, const McSetting& mc);

/// Componentwise E_P[rho_t] = eta_t within 3 SE + C dt.
VerificationReport checkDemixture(const std::string& name, const MeasurementModel& model, const DensityMatrix& rho,
                                  double t, const DensityMatrix& eta, const McSetting& mc);

/// Central difference of E_P[S_q(rho_t)] over [t - h, t + h] against the window average of
/// E_P[D1 - D2 - D3], as one paired per-path statistic with mean 0.
CheckResult checkEntropyRate(const std::string& name, const MeasurementModel& model, const DensityMatrix& rho,
                             double t, double h, const McSetting& mc);

/// The same construction for the purity and p1 - p2 - p3.
CheckResult checkPurityRate(const std::string& name, const MeasurementModel& model, const DensityMatrix& rho,
                            double t, double h, const McSetting& mc);

/// Largest Tr{rho(1 - rho)} seen on any path at any step up to tMax.
CheckResult checkPurityBound(const std::string& name, const MeasurementModel& model, const DensityMatrix& rho,
                             double tMax, double bound, const McSetting& mc);

/// ln||sigma_t|| minus the time integral of the Q-relative-entropy rate along each physical
/// path; its mean is 0.
CheckResult checkRelEntropyQ(const std::string& name, const MeasurementModel& model, const DensityMatrix& rho,
                             double t, const McSetting& mc);

/// I_t(P^a|P) on a grid of `points` times: nondecreasing within 2 SE, below
/// S_q(rho^a|rho) + 3 SE, and equal to the integrated pair rate within 3 SE at t.
VerificationReport checkRelEntropyPair(const std::string& name, const MeasurementModel& model,
                                       const DensityMatrix& rhoAlpha, const DensityMatrix& rho, double t,
                                       std::size_t points, const McSetting& mc);

enum class SuiteScale { Quick, Full };

SuiteScale parseScale(const std::string& text);

/// Bundled invariant checks over the fixture models. Extra models are validated and
/// reported as checks of their own.
VerificationReport selfTestSuite(SuiteScale scale,
                                 const std::vector<std::pair<std::string, RawModel>>& extraModels = {},
                                 unsigned workers = 1);

}  // namespace qcm
