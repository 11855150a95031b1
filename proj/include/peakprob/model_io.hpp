#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "peakprob/glasso.hpp"
#include "peakprob/marginal.hpp"
#include "peakprob/scengen.hpp"

namespace peakprob {

// Structured text persistence for fitted objects. Values are written with
// 17 significant digits so round-trips are exact; matrices carry a
// dimension header and are stored row-major.

void write_matrix(std::ostream& out, std::string_view name, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix(std::istream& in, std::string_view expected_name);

void write_marginal(std::ostream& out, const SemiParametricMarginal& m);
SemiParametricMarginal read_marginal(std::istream& in);

void write_dependence(std::ostream& out, const GaussianDependenceModel& model);
GaussianDependenceModel read_dependence(std::istream& in);

void write_engine(std::ostream& out, const FittedEngine& engine);
FittedEngine read_engine(std::istream& in);
void write_engine_file(const std::string& path, const FittedEngine& engine);
FittedEngine read_engine_file(const std::string& path);

// scenario_id,hour,mw rows, hours absolute.
void write_batch_csv(std::ostream& out, const ScenarioBatch& batch);

// Compact dump: text header line, then row-major little-endian doubles.
void write_batch_binary(std::ostream& out, const ScenarioBatch& batch);
ScenarioBatch read_batch_binary(std::istream& in);

} // namespace peakprob
