#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "pisa/conv/engine.hpp"
#include "pisa/dram/subarray.hpp"
#include "pisa/perf/account.hpp"
#include "pisa/perf/cost_table.hpp"
#include "pisa/sensor/cfp_array.hpp"
#include "pisa/variation/monte_carlo.hpp"

namespace pisa {

/// Weight and input precision, written "N:M".
struct WiConfig {
  unsigned weight_bits = 1;
  unsigned input_bits = 4;
  friend bool operator==(const WiConfig&, const WiConfig&) = default;
};
WiConfig parse_wi(std::string_view s);
std::string to_string(const WiConfig& wi);

struct RunConfig {
  CfpParams sensor;
  SensorConfig sensor_config;
  PnsOrganization pns;
  /// Empty selects the compiled defaults. Relative paths resolve against
  /// the directory of the config file.
  std::filesystem::path cost_table;
  VariationModel variation;
  Platform platform = Platform::PisaPnsII;
  Substrate substrate = Substrate::PnsDRA;
  WiConfig wi;
  double frame_period_s = 1e-3;
  double switch_threshold = 0.5;

  void validate() const;
  PlatformParams platform_params() const;
};

/// TOML subset: [section] headers and key = value pairs. Unknown sections
/// or keys raise ConfigError.
RunConfig parse_run_config(std::string_view text, const std::filesystem::path& origin = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// One [name] table per primitive with `energy` (J) and `latency` (s).
/// Entries absent from the text stay absent.
CostTable parse_cost_table(std::string_view text, const std::string& origin = "<cost table>");
CostTable load_cost_table(const std::filesystem::path& path);
std::string to_toml(const CostTable& table);

/// Cost table selected by the config: its file if set, defaults otherwise.
CostTable resolve_cost_table(const RunConfig& config);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace pisa
