#include "pisa/dram/subarray.hpp"

#include <string>

#include "pisa/error.hpp"

namespace pisa {

const char* to_string(AndMechanism m) noexcept { return m == AndMechanism::DRA ? "DRA" : "TRA"; }

double charge_share_voltage(const ChargeShareState& st) {
  if (st.c_units == 0) raise(ErrorKind::InvalidCount, "charge sharing needs at least one capacitor");
  if (st.n_ones > st.c_units) {
    raise(ErrorKind::InvalidCount, std::to_string(st.n_ones) + " charged cells exceed " +
                                       std::to_string(st.c_units) + " capacitors");
  }
  return static_cast<double>(st.n_ones) * st.v_dd / static_cast<double>(st.c_units);
}

BulkTally& BulkTally::operator+=(const BulkTally& o) noexcept {
  pairs += o.pairs;
  row_copies += o.row_copies;
  dra_cycles += o.dra_cycles;
  tra_steps += o.tra_steps;
  cycles += o.cycles;
  latency_s += o.latency_s;
  return *this;
}

DramSubArray::DramSubArray(std::size_t data_rows, std::size_t compute_rows, DramTiming timing)
    : data_rows_(data_rows), compute_rows_(compute_rows), timing_(timing), cells_(data_rows + compute_rows) {
  if (data_rows == 0) raise(ErrorKind::InvalidCount, "sub-array needs at least one data row");
}

std::size_t DramSubArray::compute_row(std::size_t k) const {
  if (k >= compute_rows_) raise(ErrorKind::AddressOutOfRange, "compute row index " + std::to_string(k));
  return data_rows_ + k;
}

void DramSubArray::check_row(std::size_t r) const {
  if (r >= cells_.size()) {
    raise(ErrorKind::AddressOutOfRange, "row " + std::to_string(r) + " outside " + std::to_string(cells_.size()));
  }
}

void DramSubArray::check_compute(std::size_t r) const {
  check_row(r);
  if (!is_compute_row(r)) {
    raise(ErrorKind::RowPairInvalid, "row " + std::to_string(r) + " is not on the modified decoder");
  }
}

void DramSubArray::write_row(std::size_t r, const DramRow& bits) {
  check_row(r);
  cells_[r] = bits;
  row_buffer_ = bits;
  ++counters_.row_writes;
  ++cycle_count_;
}

DramRow DramSubArray::read_row(std::size_t r) {
  check_row(r);
  row_buffer_ = cells_[r];
  ++counters_.row_reads;
  ++cycle_count_;
  return row_buffer_;
}

const DramRow& DramSubArray::peek(std::size_t r) const {
  check_row(r);
  return cells_[r];
}

void DramSubArray::row_copy(std::size_t src, std::size_t dst) {
  check_row(src);
  check_row(dst);
  row_buffer_ = cells_[src];
  cells_[dst] = row_buffer_;
  ++counters_.row_copies;
  cycle_count_ += timing_.copy_cycles;
}

void DramSubArray::init_row(std::size_t r, bool value) {
  check_row(r);
  if (value) {
    cells_[r].set();
  } else {
    cells_[r].reset();
  }
}

DraOutput DramSubArray::dra_nand(std::size_t a, std::size_t b, std::size_t dest,
                                 std::optional<std::size_t> and_dest) {
  check_compute(a);
  check_compute(b);
  if (a == b) raise(ErrorKind::RowPairInvalid, "dual activation needs two distinct rows");
  check_row(dest);
  if (and_dest) check_row(*and_dest);

  // Per column the shared voltage is (A + B) * V_dd / 2 and the inverter trips
  // only when both cells were charged, so the analog decision reduces to AND.
  DraOutput out;
  out.and_ = cells_[a] & cells_[b];
  out.nand = ~out.and_;
  cells_[dest] = out.nand;
  if (and_dest) cells_[*and_dest] = out.and_;
  row_buffer_ = out.and_;
  ++counters_.dra_cycles;
  ++cycle_count_;
  return out;
}

DramRow DramSubArray::tra_majority(std::size_t a, std::size_t b, std::size_t c, std::size_t dest) {
  check_compute(a);
  check_compute(b);
  check_compute(c);
  if (a == b || b == c || a == c) raise(ErrorKind::RowPairInvalid, "triple activation needs three distinct rows");
  check_row(dest);
  const DramRow& x = cells_[a];
  const DramRow& y = cells_[b];
  const DramRow& z = cells_[c];
  const DramRow maj = (x & y) | (y & z) | (x & z);
  // Activation overwrites all three sources with the result.
  cells_[a] = maj;
  cells_[b] = maj;
  cells_[c] = maj;
  cells_[dest] = maj;
  row_buffer_ = maj;
  counters_.tra_steps += timing_.tra_steps;
  cycle_count_ += timing_.tra_steps;
  return maj;
}

void DramSubArray::stage(std::size_t src, std::size_t dst) {
  check_row(src);
  cells_[dst] = cells_[src];
}

BulkAndResult DramSubArray::bulk_and(std::span<const std::size_t> a_rows, std::span<const std::size_t> b_rows,
                                     AndMechanism mechanism) {
  if (a_rows.size() != b_rows.size()) {
    raise(ErrorKind::ShapeMismatch, "bulk_and operand lists differ in length");
  }
  const std::size_t needed = mechanism == AndMechanism::DRA ? 3 : 4;
  if (compute_rows_ < needed) {
    raise(ErrorKind::CapacityExceeded, std::string(to_string(mechanism)) + " schedule needs " +
                                           std::to_string(needed) + " compute rows, sub-array has " +
                                           std::to_string(compute_rows_));
  }

  BulkAndResult result;
  result.rows.reserve(a_rows.size());
  const DramCounters before = counters_;
  const std::size_t slots = compute_rows_ / needed;

  for (std::size_t i = 0; i < a_rows.size(); ++i) {
    const std::size_t base = data_rows_ + (i % slots) * needed;
    const std::size_t x1 = base;
    const std::size_t x2 = base + 1;
    const std::size_t x3 = base + 2;
    if (mechanism == AndMechanism::DRA) {
      row_copy(a_rows[i], x1);
      row_copy(b_rows[i], x2);
      result.rows.push_back(dra_nand(x1, x2, x3).and_);
    } else {
      stage(a_rows[i], x1);
      stage(b_rows[i], x2);
      init_row(x3, false);
      result.rows.push_back(tra_majority(x1, x2, x3, base + 3));
    }
    ++counters_.row_reads;
    ++cycle_count_;
  }

  BulkTally& t = result.tally;
  t.pairs = a_rows.size();
  t.row_copies = counters_.row_copies - before.row_copies;
  t.dra_cycles = counters_.dra_cycles - before.dra_cycles;
  t.tra_steps = counters_.tra_steps - before.tra_steps;
  t.cycles = t.row_copies * timing_.copy_cycles + t.dra_cycles + t.tra_steps;
  t.latency_s = static_cast<double>(t.row_copies) * timing_.row_copy_s +
                static_cast<double>(t.dra_cycles) * timing_.dra_cycle_s +
                static_cast<double>(t.tra_steps) * timing_.tra_step_s;
  return result;
}

void DramSubArray::reset_counters() noexcept {
  counters_ = {};
  cycle_count_ = 0;
}

void PnsOrganization::validate() const {
  if (rows_per_subarray == 0 || cols == 0 || mats_x == 0 || mats_y == 0 || banks_x == 0 || banks_y == 0 ||
      activated_rows == 0 || activated_col_groups == 0 || parallel_subarrays == 0) {
    raise(ErrorKind::ConfigError, "PNS organization counts must be positive");
  }
}

}  // namespace pisa
