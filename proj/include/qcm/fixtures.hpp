#pragma once

#include <string>
#include <vector>

#include "qcm/model.hpp"

namespace qcm {

// Qubit conventions: |0> is the excited state, sigma_z |0> = |0>, sigma_minus = |1><0|.
namespace pauli {
ComplexMatrix x();
ComplexMatrix y();
ComplexMatrix z();
ComplexMatrix minus();
ComplexMatrix plus();
}  // namespace pauli

DensityMatrix basisState(Eigen::Index dim, Eigen::Index i);
DensityMatrix maximallyMixed(Eigen::Index dim);
/// |+><+| for a qubit.
DensityMatrix plusState();

/// Y is Brownian motion with drift, decoupled from the system.
RawModel rawModel0();
/// A single jump channel with V = 1: jumps carry no information.
RawModel rawModelI();
/// Homodyne-type qubit: H = sigma_z / 2, R = sigma_minus.
RawModel rawModelD();
/// Counting qubit: one channel at z = 1 with V = sigma_minus.
RawModel rawModelJ();

/// Lookup by name: "model0", "modelI", "modelD", "modelJ".
RawModel rawFixture(const std::string& name);
std::vector<std::string> fixtureNames();

}  // namespace qcm
