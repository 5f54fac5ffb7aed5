#include "qcm/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "qcm/errors.hpp"

namespace qcm {

void RunningStats::add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
}

void RunningStats::merge(const RunningStats& other) {
    if (other.n_ == 0) return;
    if (n_ == 0) {
        *this = other;
        return;
    }
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(other.n_);
    const double total = na + nb;
    const double delta = other.mean_ - mean_;
    mean_ += delta * nb / total;
    m2_ += other.m2_ + delta * delta * na * nb / total;
    n_ += other.n_;
}

double RunningStats::variance() const { return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1); }

Estimate RunningStats::estimate() const {
    if (n_ == 0) throw Error(ErrorCode::EmptySample, "no samples");
    return Estimate{mean_, std::sqrt(variance() / static_cast<double>(n_)), n_};
}

Estimate estimateWithSE(const std::vector<double>& samples) {
    if (samples.size() < 2) throw Error(ErrorCode::TooFewSamples, "need at least two samples");
    RunningStats stats;
    for (double x : samples) stats.add(x);
    return stats.estimate();
}

Estimate difference(const Estimate& a, const Estimate& b) {
    return Estimate{a.mean - b.mean, std::hypot(a.se, b.se), std::min(a.n, b.n)};
}

}  // namespace qcm
