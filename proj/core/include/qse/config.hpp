// JSON configuration covering the robot model choice, every estimator
// module and the synthetic scenario.  Parsing is strict: unknown keys,
// wrong types and out-of-range values raise ConfigError with the offending
// section and key.  Missing keys keep their defaults.

#pragma once

#include <stdexcept>
#include <string>

#include "qse/pipeline.hpp"
#include "qse/sim.hpp"

namespace qse {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AppConfig {
  std::string model_name = "aliengo_like";
  PipelineConfig pipeline;
  ScenarioConfig scenario;
};

// Parses a JSON document (text / file).  `context` names the source in error
// messages.
AppConfig parseConfig(const std::string& json_text, const std::string& context = "config");
AppConfig loadConfig(const std::string& path);

}  // namespace qse
