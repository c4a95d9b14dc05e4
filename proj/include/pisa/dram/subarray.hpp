#pragma once

#include <bitset>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace pisa {

inline constexpr std::size_t kSubArrayCols = 256;
using DramRow = std::bitset<kSubArrayCols>;

enum class AndMechanism { DRA, TRA };
const char* to_string(AndMechanism m) noexcept;

/// Charge sharing among c_units equal capacitors, n_ones of them at v_dd.
struct ChargeShareState {
  unsigned n_ones = 0;
  unsigned c_units = 2;
  double v_dd = 1.2;
};

double charge_share_voltage(const ChargeShareState& st);

/// Switching point of the shifted-threshold inverter behind the DRA sense amp.
inline constexpr double kDraThresholdFraction = 0.75;
/// Regular sense amplifier decision point for TRA.
inline constexpr double kTraThresholdFraction = 0.5;

/// NAND decision of the DRA sense path for a shared voltage.
inline bool dra_nand_decision(double v_shared, double v_dd) noexcept {
  return v_shared < kDraThresholdFraction * v_dd;
}

struct DramTiming {
  unsigned copy_cycles = 2;
  double row_copy_s = 35e-9;
  double dra_cycle_s = 30e-9;
  unsigned tra_steps = 4;
  double tra_step_s = 90e-9;
};

struct DramCounters {
  std::uint64_t row_copies = 0;
  std::uint64_t dra_cycles = 0;
  std::uint64_t tra_steps = 0;
  std::uint64_t row_writes = 0;
  std::uint64_t row_reads = 0;

  friend bool operator==(const DramCounters&, const DramCounters&) = default;
};

struct DraOutput {
  DramRow nand;
  DramRow and_;
};

/// Cost of one bulk_and batch.
struct BulkTally {
  std::uint64_t pairs = 0;
  std::uint64_t row_copies = 0;
  std::uint64_t dra_cycles = 0;
  std::uint64_t tra_steps = 0;
  std::uint64_t cycles = 0;
  double latency_s = 0.0;

  /// Charged row operations: copies plus DRA activations plus TRA steps.
  std::uint64_t row_operations() const noexcept { return row_copies + dra_cycles + tra_steps; }
  BulkTally& operator+=(const BulkTally& o) noexcept;
  friend bool operator==(const BulkTally&, const BulkTally&) = default;
};

struct BulkAndResult {
  std::vector<DramRow> rows;
  BulkTally tally;
};

/// Computational DRAM sub-array. Rows [0, data_rows) go through the regular
/// decoder; rows [data_rows, data_rows + compute_rows) belong to the modified
/// decoder and may be activated together.
class DramSubArray {
 public:
  static constexpr std::size_t kDataRows = 500;
  static constexpr std::size_t kComputeRows = 12;
  static constexpr std::size_t kCols = kSubArrayCols;

  explicit DramSubArray(std::size_t data_rows = kDataRows, std::size_t compute_rows = kComputeRows,
                        DramTiming timing = {});

  std::size_t rows() const noexcept { return cells_.size(); }
  std::size_t data_rows() const noexcept { return data_rows_; }
  std::size_t compute_rows() const noexcept { return compute_rows_; }
  std::size_t compute_row(std::size_t k) const;
  bool is_compute_row(std::size_t r) const noexcept { return r >= data_rows_ && r < cells_.size(); }
  const DramTiming& timing() const noexcept { return timing_; }

  void write_row(std::size_t r, const DramRow& bits);
  /// Activates r into the row buffer; the destructive read is restored.
  DramRow read_row(std::size_t r);
  /// Inspects a row without activating it. Test and debug use only.
  const DramRow& peek(std::size_t r) const;
  const DramRow& row_buffer() const noexcept { return row_buffer_; }

  void row_copy(std::size_t src, std::size_t dst);
  /// Sets every cell of r, e.g. the TRA control row. Not tallied.
  void init_row(std::size_t r, bool value);

  /// Dual-row activation of two compute rows. The NAND tap goes to dest;
  /// the AND tap optionally to and_dest. Charges one compute cycle.
  DraOutput dra_nand(std::size_t a, std::size_t b, std::size_t dest,
                     std::optional<std::size_t> and_dest = std::nullopt);
  /// Triple-row activation of three distinct compute rows; charges the
  /// full init + copy + activate sequence.
  DramRow tra_majority(std::size_t a, std::size_t b, std::size_t c, std::size_t dest);

  /// Element-wise AND of row pairs. Operands are staged into compute rows,
  /// the AND tap of each pair is latched out to the DPU (one row read each).
  BulkAndResult bulk_and(std::span<const std::size_t> a_rows, std::span<const std::size_t> b_rows,
                         AndMechanism mechanism);

  const DramCounters& counters() const noexcept { return counters_; }
  std::uint64_t cycle_count() const noexcept { return cycle_count_; }
  void reset_counters() noexcept;

 private:
  void check_row(std::size_t r) const;
  void check_compute(std::size_t r) const;
  void stage(std::size_t src, std::size_t dst);

  std::size_t data_rows_;
  std::size_t compute_rows_;
  DramTiming timing_;
  std::vector<DramRow> cells_;
  DramRow row_buffer_;
  DramCounters counters_;
  std::uint64_t cycle_count_ = 0;
};

/// Bank-level geometry of the near-sensor memory unit.
struct PnsOrganization {
  std::size_t rows_per_subarray = 1024;
  std::size_t cols = 256;
  std::size_t mats_x = 4;
  std::size_t mats_y = 4;
  std::size_t banks_x = 16;
  std::size_t banks_y = 16;
  std::size_t activated_rows = 1;
  std::size_t activated_col_groups = 1;
  /// Sub-arrays computing concurrently.
  std::size_t parallel_subarrays = 256;

  void validate() const;
  friend bool operator==(const PnsOrganization&, const PnsOrganization&) = default;
};

}  // namespace pisa
