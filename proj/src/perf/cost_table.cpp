#include "pisa/perf/cost_table.hpp"

#include <cmath>

#include "pisa/error.hpp"

namespace pisa {

CostTable CostTable::defaults() {
  CostTable t;
  t.set(cost::kPixelSense, {10e-15, 0.5e-6});
  t.set(cost::kAdc, {40e-12, 0.5e-6});
  t.set(cost::kCpMac, {1.1e-12, 0.0});
  t.set(cost::kNvmRead, {0.04e-12, 0.0});
  t.set(cost::kSensorCycle, {12.8e-12, 100e-6});
  t.set(cost::kSensingStandby, {25e-9, 0.0});
  t.set(cost::kProcessingStandby, {8.8e-9, 0.0});
  t.set(cost::kPnsStandby, {40e-6, 0.0});
  t.set(cost::kTransferHostBit, {60e-12, 0.4e-9});
  t.set(cost::kTransferHostFrame, {1.5e-6, 8e-6});
  t.set(cost::kTransferPnsBit, {1e-12, 0.05e-9});
  t.set(cost::kCpuBitOp, {20e-12, 0.6e-12});
  t.set(cost::kCpuMemWord, {400e-12, 0.28e-9});
  t.set(cost::kGpuBitOp, {3e-12, 0.15e-12});
  t.set(cost::kGpuMemWord, {60e-12, 0.08e-9});
  t.set(cost::kRowActivate, {12e-12, 26e-9});
  t.set(cost::kDraCycle, {25e-12, 30e-9});
  t.set(cost::kRowCopy, {32e-12, 35e-9});
  t.set(cost::kTraStep, {35e-12, 90e-9});
  t.set(cost::kDrisaOp, {150e-12, 80e-9});
  t.set(cost::kBitcountRow, {2e-12, 2e-9});
  t.set(cost::kShiftAdd, {0.5e-12, 1e-9});
  return t;
}

CostTable CostTable::zero() {
  CostTable t;
  for (const auto& name : primitive_names()) t.set(name, {});
  return t;
}

std::vector<std::string> CostTable::primitive_names() {
  std::vector<std::string> names;
  for (const auto& [name, c] : defaults().entries_) names.push_back(name);
  return names;
}

bool CostTable::contains(std::string_view name) const { return entries_.find(name) != entries_.end(); }

const Cost& CostTable::at(std::string_view name) const {
  const auto it = entries_.find(name);
  if (it == entries_.end()) raise(ErrorKind::MissingCost, "no cost entry for '" + std::string(name) + "'");
  return it->second;
}

void CostTable::set(std::string_view name, Cost c) { entries_.insert_or_assign(std::string(name), c); }

CostTable CostTable::scaled(double k) const {
  CostTable t = *this;
  for (auto& [name, c] : t.entries_) {
    c.energy *= k;
    c.latency *= k;
  }
  return t;
}

void CostTable::validate() const {
  for (const auto& [name, c] : entries_) {
    if (!(c.energy >= 0.0) || !(c.latency >= 0.0) || !std::isfinite(c.energy) || !std::isfinite(c.latency)) {
      raise(ErrorKind::ConfigError, "cost entry '" + name + "' must be finite and non-negative");
    }
  }
}

}  // namespace pisa
