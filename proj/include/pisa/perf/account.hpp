#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pisa/conv/engine.hpp"
#include "pisa/perf/cost_table.hpp"

namespace pisa {

enum class Platform { BaselineCpu, PisaCpu, PisaGpu, PisaPnsI, PisaPnsII };

const char* to_string(Platform p) noexcept;
/// Accepts the CLI spellings, e.g. "baseline-cpu", "pisa-pns-ii".
std::optional<Platform> parse_platform(std::string_view s) noexcept;
inline constexpr Platform kAllPlatforms[] = {Platform::BaselineCpu, Platform::PisaCpu, Platform::PisaGpu,
                                             Platform::PisaPnsI, Platform::PisaPnsII};
bool is_pns(Platform p) noexcept;

/// One layer executed after the sensor, on the host or on the PNS.
struct OffSensorLayer {
  std::string name;
  std::uint64_t macs = 0;
  unsigned input_bits = 1;
  unsigned weight_bits = 1;
  LayerTally pns;  ///< hardware tally when mapped on the PNS

  std::uint64_t bit_ops() const noexcept { return macs * input_bits * weight_bits; }
  friend bool operator==(const OffSensorLayer&, const OffSensorLayer&) = default;
};

/// Primitive counts of one or more frames. Counts only; costs live in the
/// CostTable and are applied by account().
struct Trace {
  std::string workload;
  std::uint64_t frames = 0;

  std::uint64_t pixels_sensed = 0;
  std::uint64_t pixel_rows_read = 0;
  std::uint64_t adc_samples = 0;
  std::uint64_t adc_rows = 0;
  std::uint64_t cp_macs = 0;
  std::uint64_t nvm_reads = 0;
  std::uint64_t sensor_compute_cycles = 0;
  std::uint64_t sensing_frames = 0;
  std::uint64_t processing_frames = 0;

  std::uint64_t host_link_bits = 0;
  std::uint64_t host_link_frames = 0;
  std::uint64_t pns_link_bits = 0;
  std::uint64_t pns_frames = 0;

  std::vector<OffSensorLayer> layers;

  /// Sums counts; layers are merged by position when the names line up.
  Trace& operator+=(const Trace& o);
  friend bool operator==(const Trace&, const Trace&) = default;
};

struct EnergyBreakdown {
  double sensor = 0.0;
  double data_transfer = 0.0;
  double off_chip = 0.0;
  double pns = 0.0;
  double total() const noexcept { return sensor + data_transfer + off_chip + pns; }
};

/// Serial pipeline phases of the frame latency.
struct LatencyBreakdown {
  double conversion = 0.0;
  double transfer = 0.0;
  double memory = 0.0;
  double compute = 0.0;
  double total() const noexcept { return conversion + transfer + memory + compute; }
};

struct PlatformParams {
  double frame_period_s = 1e-3;
  std::uint64_t pns_parallel_subarrays = 256;
};

struct TraceReport {
  std::string workload;
  Platform platform = Platform::BaselineCpu;
  std::uint64_t frames = 0;
  EnergyBreakdown energy;        ///< per frame
  LatencyBreakdown latency;      ///< per frame
  double total_energy_j = 0.0;   ///< per frame
  double total_latency_s = 0.0;  ///< per frame
  double sensor_stage_s = 0.0;
  double transfer_stage_s = 0.0;
  double backend_stage_s = 0.0;
  double fps = 0.0;
  /// In-sensor ops (2 per MAC) over in-sensor energy, TOp/s/W.
  double efficiency_tops_per_w = 0.0;
  /// All ops over all energy, TOp/s/W.
  double system_efficiency_tops_per_w = 0.0;
  double memory_bottleneck_ratio = 0.0;
  double resource_utilization = 0.0;
};

TraceReport account(const Trace& trace, const CostTable& costs, Platform platform, const PlatformParams& params = {});

struct ComparisonRow {
  Platform platform = Platform::BaselineCpu;
  double energy_j = 0.0;
  double latency_s = 0.0;
  double transfer_energy_reduction = 0.0;  ///< 1 - E_transfer / E_transfer(baseline)
  double speedup = 1.0;                    ///< T(baseline) / T
  double energy_ratio = 1.0;               ///< E / E(baseline)
  double memory_bottleneck_ratio = 0.0;
  double resource_utilization = 0.0;
};

struct ComparisonSummary {
  std::string workload;
  std::vector<ComparisonRow> rows;
  const ComparisonRow& row(Platform p) const;
};

/// Ratios against the BaselineCpu report; WorkloadMismatch if the reports
/// describe different workloads or no baseline is present.
ComparisonSummary compare(const std::vector<TraceReport>& reports);

}  // namespace pisa
