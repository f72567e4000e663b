#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace xrat {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

// Bad inputs, bad configs, malformed files. Maps to exit code 2 / XRAT_ERR_INVALID.
class validation_error : public std::runtime_error {
 public:
  explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Failures during an otherwise valid run (I/O, non-finite numbers).
// Maps to exit code 1 / XRAT_ERR_RUNTIME.
class runtime_failure : public std::runtime_error {
 public:
  explicit runtime_failure(const std::string& msg) : std::runtime_error(msg) {}
};

// Dataset floats are serialized with 9 significant digits ("%.9g").
std::string format_g9(double v);

// Nearest double to the 9-significant-digit decimal form of v. Values passed
// through this are fixed points of the JSONL float serialization, which is
// what makes save/load round-trips bit-exact.
double quantize_g9(double v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace xrat
