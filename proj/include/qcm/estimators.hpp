#pragma once

#include <cstddef>
#include <vector>

namespace qcm {

struct Estimate {
    double mean = 0.0;
    double se = 0.0;  ///< sample standard deviation / sqrt(n); 0 when n == 1
    std::size_t n = 0;
};

/// Single-pass Welford accumulator. merge() uses the pairwise update of Chan et al.
class RunningStats {
  public:
    void add(double x);
    void merge(const RunningStats& other);

    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    /// Unbiased sample variance; 0 for fewer than two samples.
    double variance() const;
    /// Throws EmptySample when nothing was added.
    Estimate estimate() const;

  private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// Mean and standard error; throws TooFewSamples for n < 2.
Estimate estimateWithSE(const std::vector<double>& samples);

/// Difference of two estimates from independent samples.
Estimate difference(const Estimate& a, const Estimate& b);

}  // namespace qcm
