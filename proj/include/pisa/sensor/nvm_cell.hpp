#pragma once

namespace pisa {

/// Behavioral MTJ read path: the cell forms a voltage divider with a
/// reference resistor, and the sensed voltage is compared against the
/// divider midpoint.
struct MtjParams {
  double r_parallel = 3.0e3;  ///< ohms, low-resistance state
  double tmr = 1.5;           ///< (R_AP - R_P) / R_P
  double read_voltage = 0.5;  ///< volts across the divider

  double r_antiparallel() const noexcept { return r_parallel * (1.0 + tmr); }
  /// Geometric mean of the two nominal states.
  double r_reference() const noexcept;
  double divider_voltage(double r_cell) const noexcept;
  /// Comparator threshold: the divider output when r_cell == r_reference.
  double sense_reference() const noexcept { return 0.5 * read_voltage; }
  /// V(AP) - V(P) for the nominal resistances.
  double read_margin() const noexcept;
};

/// One STT-MRAM weight cell. Parallel (low R) stores logic 1, the +1 weight.
class NvmCell {
 public:
  NvmCell() = default;
  explicit NvmCell(bool logic_one) : parallel_(logic_one) {}

  void write(bool logic_one) noexcept { parallel_ = logic_one; }
  bool parallel() const noexcept { return parallel_; }

  /// Resistance with multiplicative resistance-area and TMR deviations.
  double resistance(const MtjParams& p, double ra_factor = 1.0, double tmr_factor = 1.0) const noexcept;
  bool read(const MtjParams& p, double ra_factor = 1.0, double tmr_factor = 1.0) const noexcept;

 private:
  bool parallel_ = false;
};

}  // namespace pisa
