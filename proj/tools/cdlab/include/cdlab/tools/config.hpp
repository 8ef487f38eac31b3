#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cdlab/atomic_model.hpp"

namespace cdlab::tools {

// Rejected configuration. `line` is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, std::size_t line, const std::string& message);
  const std::string& field() const noexcept { return field_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string field_;
  std::size_t line_;
};

struct GeometrySettings {
  std::vector<double> radii{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  std::size_t angles = 16;
  double step = 1e-4;
  bool general = false;  // also report θ_{i,j} for j > i + 1
};

struct SylvesterSettings {
  std::vector<double> lambda0{1.0, 1.5, 2.0};
  std::vector<double> valency{1.0, 2.0, 3.0};
  std::vector<std::size_t> shifts{0, 1, 2};
  std::size_t trunc = 1024;      // residual
  std::size_t fit_trunc = 4096;  // growth exponent
};

struct CommutantSettings {
  std::size_t max_degree = 8;
};

struct PowerBoundSettings {
  std::size_t n_max = 200;
  std::size_t trunc = 4096;
  bool reduce = false;  // trace Y T Y⁻¹ instead of T (needs valency ≥ 2)
};

struct ExperimentConfig {
  ModelSpec model = ModelSpec::make(1.0, 2.0, 2, 512);
  std::uint64_t seed = 1;
  double tolerance = 1e-9;
  GeometrySettings geometry;
  SylvesterSettings sylvester;
  CommutantSettings commutant;
  PowerBoundSettings powerbound;
  std::string text;  // the document as read, empty for built-in defaults
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

struct Overrides {
  std::optional<std::size_t> trunc;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
};

// Applies command-line overrides and revalidates the model.
void apply_overrides(ExperimentConfig& config, const Overrides& overrides);

}  // namespace cdlab::tools
