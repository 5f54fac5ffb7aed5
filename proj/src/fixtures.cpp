#include "qcm/fixtures.hpp"

namespace qcm {

namespace pauli {

ComplexMatrix x() {
    ComplexMatrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

ComplexMatrix y() {
    ComplexMatrix m(2, 2);
    m << 0, Complex(0, -1), Complex(0, 1), 0;
    return m;
}

ComplexMatrix z() {
    ComplexMatrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

ComplexMatrix minus() {
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    m(1, 0) = 1.0;
    return m;
}

ComplexMatrix plus() { return minus().adjoint(); }

}  // namespace pauli

DensityMatrix basisState(Eigen::Index dim, Eigen::Index i) {
    DensityMatrix rho = ComplexMatrix::Zero(dim, dim);
    rho(i, i) = 1.0;
    return rho;
}

DensityMatrix maximallyMixed(Eigen::Index dim) { return identity(dim) / static_cast<double>(dim); }

DensityMatrix plusState() { return ComplexMatrix::Constant(2, 2, 0.5); }

namespace {

RawModel emptyQubit() {
    RawModel m;
    m.dim = 2;
    m.H = ComplexMatrix::Zero(2, 2);
    m.R = ComplexMatrix::Zero(2, 2);
    m.c = 0.0;
    m.r = 0.0;
    m.b = 1.0;
    return m;
}

}  // namespace

RawModel rawModel0() {
    RawModel m = emptyQubit();
    m.c = 1.0;
    m.r = 1.0;
    return m;
}

RawModel rawModelI() {
    RawModel m = emptyQubit();
    m.channels.push_back({1.0, 1, 1.0, identity(2)});
    return m;
}

RawModel rawModelD() {
    RawModel m = emptyQubit();
    m.H = 0.5 * pauli::z();
    m.R = pauli::minus();
    m.r = 1.0;
    return m;
}

RawModel rawModelJ() {
    RawModel m = emptyQubit();
    m.channels.push_back({1.0, 1, 1.0, pauli::minus()});
    return m;
}

RawModel rawFixture(const std::string& name) {
    if (name == "model0") return rawModel0();
    if (name == "modelI") return rawModelI();
    if (name == "modelD") return rawModelD();
    if (name == "modelJ") return rawModelJ();
    throw Error(ErrorCode::BadConfig, "unknown fixture " + name);
}

std::vector<std::string> fixtureNames() { return {"model0", "modelI", "modelD", "modelJ"}; }

}  // namespace qcm
