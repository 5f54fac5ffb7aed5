#pragma once

#include <string>

#include <json.hpp>

#include "qcm/model.hpp"

namespace qcm {

using Json = nlohmann::json;

/// Matrices travel as arrays of rows; each entry is [re, im].
Json matrixToJson(const ComplexMatrix& m);
ComplexMatrix matrixFromJson(const Json& j);

Json modelToJson(const RawModel& model);
RawModel rawModelFromJson(const Json& j);

RawModel readRawModel(const std::string& path);
MeasurementModel loadModel(const std::string& path);
void writeModel(const RawModel& model, const std::string& path);

/// Initial state from a command-line string: a JSON matrix file, or one of
/// "mixed", "basis:<i>", "plus" (d = 2 only).
DensityMatrix parseState(const std::string& spec, Eigen::Index dim);

/// 17 significant digits.
std::string formatDouble(double x);

/// FNV-1a over the canonical serialization of the model.
std::string modelHash(const RawModel& model);

}  // namespace qcm
