#pragma once

#include <doctest.h>

#include "qcm/model.hpp"
#include "qcm/operator_core.hpp"
#include "qcm/rng.hpp"

namespace testutil {

using qcm::Complex;
using qcm::ComplexMatrix;

inline double maxAbs(const ComplexMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline ComplexMatrix diag(std::initializer_list<double> values) {
    ComplexMatrix m = ComplexMatrix::Zero(values.size(), values.size());
    Eigen::Index i = 0;
    for (double v : values) m(i, i) = v, ++i;
    return m;
}

inline ComplexMatrix ginibre(qcm::RngStream& rng, Eigen::Index d) {
    ComplexMatrix g(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) g(i, j) = Complex(rng.normal(), rng.normal());
    }
    return g;
}

inline ComplexMatrix randomHermitian(qcm::RngStream& rng, Eigen::Index d) {
    const ComplexMatrix g = ginibre(rng, d);
    return 0.5 * (g + g.adjoint());
}

inline ComplexMatrix randomDensity(qcm::RngStream& rng, Eigen::Index d) {
    const ComplexMatrix g = ginibre(rng, d);
    ComplexMatrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    return 0.5 * (rho + rho.adjoint());
}

/// Model with every kind of term: Hamiltonian, one L_j, R, and three jump channels at two amplitudes.
inline qcm::RawModel randomModel(qcm::RngStream& rng, Eigen::Index d) {
    qcm::RawModel m;
    m.dim = d;
    m.H = randomHermitian(rng, d);
    m.Ls = {0.4 * ginibre(rng, d)};
    m.R = 0.5 * ginibre(rng, d);
    m.r = 1.0;
    m.channels.push_back({1.0, 1, 0.6, 0.6 * ginibre(rng, d)});
    m.channels.push_back({1.0, 2, 0.4, 0.5 * ginibre(rng, d)});
    m.channels.push_back({-0.7, 1, 0.5, 0.5 * ginibre(rng, d)});
    return m;
}

template <typename F>
qcm::ErrorCode errorCodeOf(F&& f) {
    try {
        f();
    } catch (const qcm::Error& e) {
        return e.code();
    }
    FAIL("expected a qcm::Error");
    return qcm::ErrorCode::BadConfig;
}

}  // namespace testutil
