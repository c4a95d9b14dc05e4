#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace pisa {

/// Energy per occurrence (J) and latency per occurrence (s) of one primitive.
struct Cost {
  double energy = 0.0;
  double latency = 0.0;
  friend bool operator==(const Cost&, const Cost&) = default;
};

namespace cost {
inline constexpr std::string_view kPixelSense = "pixel_sense";
inline constexpr std::string_view kAdc = "adc_convert_per_sample";
inline constexpr std::string_view kCpMac = "cp_mac";
inline constexpr std::string_view kNvmRead = "nvm_read";
inline constexpr std::string_view kSensorCycle = "sensor_compute_cycle";
inline constexpr std::string_view kSensingStandby = "sensing_standby";
inline constexpr std::string_view kProcessingStandby = "processing_standby";
inline constexpr std::string_view kPnsStandby = "pns_standby";
inline constexpr std::string_view kTransferHostBit = "transfer_host_per_bit";
inline constexpr std::string_view kTransferHostFrame = "transfer_host_per_frame";
inline constexpr std::string_view kTransferPnsBit = "transfer_pns_per_bit";
inline constexpr std::string_view kCpuBitOp = "host_cpu_per_bitop";
inline constexpr std::string_view kCpuMemWord = "host_cpu_mem_per_word";
inline constexpr std::string_view kGpuBitOp = "host_gpu_per_bitop";
inline constexpr std::string_view kGpuMemWord = "host_gpu_mem_per_word";
inline constexpr std::string_view kRowActivate = "dram_row_activate";
inline constexpr std::string_view kDraCycle = "dra_compute_cycle";
inline constexpr std::string_view kRowCopy = "row_copy";
inline constexpr std::string_view kTraStep = "tra_step";
inline constexpr std::string_view kDrisaOp = "drisa_1t1c_op";
inline constexpr std::string_view kBitcountRow = "dpu_bitcount_per_row";
inline constexpr std::string_view kShiftAdd = "dpu_shift_add";
}  // namespace cost

/// Named primitive costs. Standby floors are energy per frame.
class CostTable {
 public:
  CostTable() = default;

  /// Calibrated defaults, identical to config/costs.toml.
  static CostTable defaults();
  /// Every entry zero.
  static CostTable zero();
  static std::vector<std::string> primitive_names();

  bool contains(std::string_view name) const;
  /// MissingCost when absent.
  const Cost& at(std::string_view name) const;
  void set(std::string_view name, Cost c);
  const std::map<std::string, Cost, std::less<>>& entries() const noexcept { return entries_; }

  /// Every energy and latency multiplied by k.
  CostTable scaled(double k) const;
  void validate() const;

  friend bool operator==(const CostTable&, const CostTable&) = default;

 private:
  std::map<std::string, Cost, std::less<>> entries_;
};

}  // namespace pisa
