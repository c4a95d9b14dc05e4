#include "pisa/sensor/nvm_cell.hpp"

#include <cmath>

namespace pisa {

double MtjParams::r_reference() const noexcept { return std::sqrt(r_parallel * r_antiparallel()); }

double MtjParams::divider_voltage(double r_cell) const noexcept {
  return read_voltage * r_cell / (r_cell + r_reference());
}

double MtjParams::read_margin() const noexcept {
  return divider_voltage(r_antiparallel()) - divider_voltage(r_parallel);
}

double NvmCell::resistance(const MtjParams& p, double ra_factor, double tmr_factor) const noexcept {
  const double rp = p.r_parallel * ra_factor;
  return parallel_ ? rp : rp * (1.0 + p.tmr * tmr_factor);
}

bool NvmCell::read(const MtjParams& p, double ra_factor, double tmr_factor) const noexcept {
  return p.divider_voltage(resistance(p, ra_factor, tmr_factor)) < p.sense_reference();
}

}  // namespace pisa
