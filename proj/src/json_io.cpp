#include "qcm/json_io.hpp"

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace qcm {

Json matrixToJson(const ComplexMatrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

ComplexMatrix matrixFromJson(const Json& j) {
    if (!j.is_array() || j.empty()) throw Error(ErrorCode::ParseError, "matrix must be a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.front().size());
    ComplexMatrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const Json& row = j.at(r);
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw Error(ErrorCode::BadShape, "ragged matrix rows");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            const Json& e = row.at(c);
            if (!e.is_array() || e.size() != 2) throw Error(ErrorCode::ParseError, "matrix entry must be [re, im]");
            m(r, c) = Complex(e.at(0).get<double>(), e.at(1).get<double>());
        }
    }
    return m;
}

Json modelToJson(const RawModel& model) {
    Json j;
    j["dim"] = model.dim;
    j["H"] = matrixToJson(model.H);
    j["Ls"] = Json::array();
    for (const ComplexMatrix& L : model.Ls) j["Ls"].push_back(matrixToJson(L));
    j["R"] = matrixToJson(model.R.size() ? model.R : ComplexMatrix::Zero(model.dim, model.dim));
    j["c"] = model.c;
    j["r"] = model.r;
    j["b"] = model.b;
    j["channels"] = Json::array();
    for (const JumpChannel& ch : model.channels) {
        j["channels"].push_back({{"z", ch.z}, {"n", ch.n}, {"nu", ch.nu}, {"V", matrixToJson(ch.V)}});
    }
    return j;
}

RawModel rawModelFromJson(const Json& j) {
    try {
        RawModel m;
        m.dim = j.at("dim").get<Eigen::Index>();
        m.H = matrixFromJson(j.at("H"));
        for (const Json& L : j.value("Ls", Json::array())) m.Ls.push_back(matrixFromJson(L));
        m.R = j.contains("R") ? matrixFromJson(j.at("R")) : ComplexMatrix::Zero(m.dim, m.dim);
        m.c = j.at("c").get<double>();
        m.r = j.at("r").get<double>();
        m.b = j.at("b").get<double>();
        for (const Json& ch : j.value("channels", Json::array())) {
            m.channels.push_back(JumpChannel{ch.at("z").get<double>(), ch.at("n").get<int>(),
                                             ch.at("nu").get<double>(), matrixFromJson(ch.at("V"))});
        }
        return m;
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
}

RawModel readRawModel(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
    try {
        return rawModelFromJson(Json::parse(in));
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
}

MeasurementModel loadModel(const std::string& path) { return validateModel(readRawModel(path)); }

void writeModel(const RawModel& model, const std::string& path) {
    std::ofstream out(path);
    out << modelToJson(model).dump(2) << '\n';
}

DensityMatrix parseState(const std::string& spec, Eigen::Index dim) {
    if (spec == "mixed") return identity(dim) / static_cast<double>(dim);
    if (spec.rfind("basis:", 0) == 0) {
        const long i = std::stol(spec.substr(6));
        if (i < 0 || i >= dim) throw Error(ErrorCode::BadConfig, "basis index out of range: " + spec);
        DensityMatrix rho = ComplexMatrix::Zero(dim, dim);
        rho(i, i) = 1.0;
        return rho;
    }
    if (spec == "plus") {
        if (dim != 2) throw Error(ErrorCode::BadConfig, "'plus' needs dim = 2");
        return ComplexMatrix::Constant(2, 2, 0.5);
    }
    if (!std::filesystem::exists(spec)) throw Error(ErrorCode::BadConfig, "unknown state spec: " + spec);
    std::ifstream in(spec);
    DensityMatrix rho;
    try {
        rho = matrixFromJson(Json::parse(in));
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::ParseError, spec + ": " + e.what());
    }
    if (rho.rows() != dim || rho.cols() != dim) throw Error(ErrorCode::BadShape, "state does not match model dim");
    requireDensity(rho);
    return rho;
}

std::string formatDouble(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string modelHash(const RawModel& model) {
    const std::string text = modelToJson(model).dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace qcm
