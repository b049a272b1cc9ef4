// SPDX-License-Identifier: MIT
#pragma once

#include <stdexcept>
#include <string>

#include "gdlm/moments.hpp"
#include "gdlm/partition.hpp"

namespace gdlm::io {

// Malformed input file; carries the 1-based line number (0 = whole file).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Dataset CSV: header "d=<d1>,d=<d2>,..." then one comma-separated row of
// 0-based categories per observation; numeric (d=1) columns hold reals.
Dataset load_dataset_csv(const std::string& path);
void save_dataset_csv(const Dataset& data, const std::string& path);

// Model JSON: {k, p, alpha0?, variables: [{index, d, theta: d*k row-major}],
// weights?}. Doubles use the shortest round-trip representation, so a
// save/load cycle is bit-exact.
void save_model_json(const ModelParams& params, const std::string& path);
void save_model_json(const FitResult& fit, const std::string& path);
ModelParams load_model_json(const std::string& path);

std::string model_to_json(const ModelParams& params);
std::string fit_to_json(const FitResult& fit);
ModelParams model_from_json(const std::string& text);

}  // namespace gdlm::io
