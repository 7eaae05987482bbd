#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nssl/harness.hpp"

namespace nssl::detail {

/// Throws ConfigError naming the first parameter `spec.name` does not accept.
void check_generator(const GeneratorSpec& spec);

/// Everything a runner writes besides the manifest.
struct RunOutput {
  NormSeries series;
  std::vector<MonitorReport> monitors;
  std::vector<std::string> files;  // written by the runner, relative to the output dir
};

struct RunContext {
  const ExperimentConfig& cfg;
  std::string dir;
  RunOutput out;
  /// Writes a snapshot file and records it.
  void snapshot(const std::string& tag, const PhysicalField& f);
};

using Runner = std::function<void(RunContext&)>;

/// Reads the kind-specific keys and returns the runner; unread keys are
/// reported by the caller afterwards.
Runner prepare(const ExperimentConfig& cfg);

/// Monitor ids a kind can emit (prefix match for ids ending in ':').
const std::vector<std::string>& monitor_registry(const std::string& kind);

}  // namespace nssl::detail
