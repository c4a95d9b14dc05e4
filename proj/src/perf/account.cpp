#include "pisa/perf/account.hpp"

#include <algorithm>

#include "pisa/error.hpp"

namespace pisa {

const char* to_string(Platform p) noexcept {
  switch (p) {
    case Platform::BaselineCpu: return "baseline-cpu";
    case Platform::PisaCpu: return "pisa-cpu";
    case Platform::PisaGpu: return "pisa-gpu";
    case Platform::PisaPnsI: return "pisa-pns-i";
    case Platform::PisaPnsII: return "pisa-pns-ii";
  }
  return "?";
}

std::optional<Platform> parse_platform(std::string_view s) noexcept {
  for (Platform p : kAllPlatforms) {
    if (s == to_string(p)) return p;
  }
  return std::nullopt;
}

bool is_pns(Platform p) noexcept { return p == Platform::PisaPnsI || p == Platform::PisaPnsII; }

Trace& Trace::operator+=(const Trace& o) {
  if (workload.empty()) workload = o.workload;
  frames += o.frames;
  pixels_sensed += o.pixels_sensed;
  pixel_rows_read += o.pixel_rows_read;
  adc_samples += o.adc_samples;
  adc_rows += o.adc_rows;
  cp_macs += o.cp_macs;
  nvm_reads += o.nvm_reads;
  sensor_compute_cycles += o.sensor_compute_cycles;
  sensing_frames += o.sensing_frames;
  processing_frames += o.processing_frames;
  host_link_bits += o.host_link_bits;
  host_link_frames += o.host_link_frames;
  pns_link_bits += o.pns_link_bits;
  pns_frames += o.pns_frames;
  const bool same_shape = layers.size() == o.layers.size() &&
                          std::equal(layers.begin(), layers.end(), o.layers.begin(),
                                     [](const OffSensorLayer& a, const OffSensorLayer& b) { return a.name == b.name; });
  if (same_shape) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
      layers[i].macs += o.layers[i].macs;
      layers[i].pns += o.layers[i].pns;
    }
  } else {
    layers.insert(layers.end(), o.layers.begin(), o.layers.end());
  }
  return *this;
}

namespace {

/// Sums count * cost, looking entries up only for non-zero counts.
class Meter {
 public:
  explicit Meter(const CostTable& costs) : costs_(costs) {}

  double energy(std::string_view name, double count) const {
    return count == 0.0 ? 0.0 : count * costs_.at(name).energy;
  }
  double latency(std::string_view name, double count) const {
    return count == 0.0 ? 0.0 : count * costs_.at(name).latency;
  }

 private:
  const CostTable& costs_;
};

double as_d(std::uint64_t v) { return static_cast<double>(v); }

}  // namespace

TraceReport account(const Trace& trace, const CostTable& costs, Platform platform, const PlatformParams& params) {
  if (params.pns_parallel_subarrays == 0) raise(ErrorKind::ConfigError, "pns_parallel_subarrays must be positive");
  const Meter mt(costs);
  EnergyBreakdown e;
  LatencyBreakdown t;
  double sensor_compute_s = 0.0;

  e.sensor += mt.energy(cost::kPixelSense, as_d(trace.pixels_sensed));
  e.sensor += mt.energy(cost::kAdc, as_d(trace.adc_samples));
  e.sensor += mt.energy(cost::kCpMac, as_d(trace.cp_macs));
  e.sensor += mt.energy(cost::kNvmRead, as_d(trace.nvm_reads));
  e.sensor += mt.energy(cost::kSensorCycle, as_d(trace.sensor_compute_cycles));
  e.sensor += mt.energy(cost::kSensingStandby, as_d(trace.sensing_frames));
  e.sensor += mt.energy(cost::kProcessingStandby, as_d(trace.processing_frames));
  t.conversion += mt.latency(cost::kPixelSense, as_d(trace.pixel_rows_read));
  t.conversion += mt.latency(cost::kAdc, as_d(trace.adc_rows));
  sensor_compute_s = mt.latency(cost::kSensorCycle, as_d(trace.sensor_compute_cycles));
  t.compute += sensor_compute_s;

  e.data_transfer += mt.energy(cost::kTransferHostBit, as_d(trace.host_link_bits));
  e.data_transfer += mt.energy(cost::kTransferHostFrame, as_d(trace.host_link_frames));
  e.data_transfer += mt.energy(cost::kTransferPnsBit, as_d(trace.pns_link_bits));
  t.transfer += mt.latency(cost::kTransferHostBit, as_d(trace.host_link_bits));
  t.transfer += mt.latency(cost::kTransferHostFrame, as_d(trace.host_link_frames));
  t.transfer += mt.latency(cost::kTransferPnsBit, as_d(trace.pns_link_bits));

  double backend_compute_s = 0.0;
  if (is_pns(platform)) {
    const double u = as_d(params.pns_parallel_subarrays);
    e.pns += mt.energy(cost::kPnsStandby, as_d(trace.pns_frames));
    for (const auto& l : trace.layers) {
      const LayerTally& p = l.pns;
      double logic_s = 0.0;
      if (platform == Platform::PisaPnsI) {
        e.pns += mt.energy(cost::kDrisaOp, as_d(p.ands));
        logic_s += mt.latency(cost::kDrisaOp, as_d(p.ands));
      } else {
        e.pns += mt.energy(cost::kRowCopy, as_d(p.row_copies)) + mt.energy(cost::kDraCycle, as_d(p.dra_cycles)) +
                 mt.energy(cost::kTraStep, as_d(p.tra_steps));
        logic_s += mt.latency(cost::kRowCopy, as_d(p.row_copies)) + mt.latency(cost::kDraCycle, as_d(p.dra_cycles)) +
                   mt.latency(cost::kTraStep, as_d(p.tra_steps));
      }
      const double activations = as_d(p.row_writes + p.row_reads);
      e.pns += mt.energy(cost::kRowActivate, activations);
      e.pns += mt.energy(cost::kBitcountRow, as_d(p.bitcount_rows)) + mt.energy(cost::kShiftAdd, as_d(p.shift_adds));
      logic_s += mt.latency(cost::kBitcountRow, as_d(p.bitcount_rows)) + mt.latency(cost::kShiftAdd, as_d(p.shift_adds));
      backend_compute_s += logic_s / u;
      t.memory += mt.latency(cost::kRowActivate, activations) / u;
    }
  } else {
    const bool gpu = platform == Platform::PisaGpu;
    const std::string_view op = gpu ? cost::kGpuBitOp : cost::kCpuBitOp;
    const std::string_view mem = gpu ? cost::kGpuMemWord : cost::kCpuMemWord;
    for (const auto& l : trace.layers) {
      const double ops = as_d(l.bit_ops());
      const double words = ops / 32.0;
      e.off_chip += mt.energy(op, ops) + mt.energy(mem, words);
      backend_compute_s += mt.latency(op, ops);
      t.memory += mt.latency(mem, words);
    }
  }
  t.compute += backend_compute_s;

  const double frames = trace.frames == 0 ? 1.0 : as_d(trace.frames);
  auto per_frame = [frames](double x) { return x / frames; };
  TraceReport r;
  r.workload = trace.workload;
  r.platform = platform;
  r.frames = trace.frames;
  r.energy = {per_frame(e.sensor), per_frame(e.data_transfer), per_frame(e.off_chip), per_frame(e.pns)};
  r.latency = {per_frame(t.conversion), per_frame(t.transfer), per_frame(t.memory), per_frame(t.compute)};
  r.total_energy_j = r.energy.total();
  r.total_latency_s = r.latency.total();
  r.sensor_stage_s = per_frame(t.conversion + sensor_compute_s);
  r.transfer_stage_s = r.latency.transfer;
  r.backend_stage_s = per_frame(t.memory + backend_compute_s);

  const double slowest = std::max({params.frame_period_s, r.sensor_stage_s, r.transfer_stage_s, r.backend_stage_s});
  r.fps = slowest > 0.0 ? 1.0 / slowest : 0.0;

  const double sensor_ops = 2.0 * per_frame(as_d(trace.cp_macs));
  r.efficiency_tops_per_w = r.energy.sensor > 0.0 ? sensor_ops / r.energy.sensor / 1e12 : 0.0;
  double all_macs = as_d(trace.cp_macs);
  for (const auto& l : trace.layers) all_macs += as_d(l.macs);
  r.system_efficiency_tops_per_w = r.total_energy_j > 0.0 ? 2.0 * per_frame(all_macs) / r.total_energy_j / 1e12 : 0.0;

  if (r.total_latency_s > 0.0) {
    r.memory_bottleneck_ratio = (r.latency.conversion + r.latency.transfer + r.latency.memory) / r.total_latency_s;
    r.resource_utilization = r.latency.compute / r.total_latency_s;
  }
  return r;
}

const ComparisonRow& ComparisonSummary::row(Platform p) const {
  for (const auto& r : rows) {
    if (r.platform == p) return r;
  }
  raise(ErrorKind::WorkloadMismatch, std::string("comparison has no row for ") + to_string(p));
}

ComparisonSummary compare(const std::vector<TraceReport>& reports) {
  if (reports.empty()) raise(ErrorKind::WorkloadMismatch, "nothing to compare");
  const TraceReport* base = nullptr;
  for (const auto& r : reports) {
    if (r.workload != reports.front().workload) {
      raise(ErrorKind::WorkloadMismatch, "reports describe '" + reports.front().workload + "' and '" + r.workload + "'");
    }
    if (r.platform == Platform::BaselineCpu && base == nullptr) base = &r;
  }
  if (base == nullptr) raise(ErrorKind::WorkloadMismatch, "comparison needs a baseline-cpu report");

  auto ratio = [](double num, double den, double fallback) { return den > 0.0 ? num / den : fallback; };
  ComparisonSummary s;
  s.workload = base->workload;
  for (const auto& r : reports) {
    ComparisonRow row;
    row.platform = r.platform;
    row.energy_j = r.total_energy_j;
    row.latency_s = r.total_latency_s;
    row.transfer_energy_reduction = 1.0 - ratio(r.energy.data_transfer, base->energy.data_transfer, 1.0);
    row.speedup = ratio(base->total_latency_s, r.total_latency_s, 1.0);
    row.energy_ratio = ratio(r.total_energy_j, base->total_energy_j, 1.0);
    row.memory_bottleneck_ratio = r.memory_bottleneck_ratio;
    row.resource_utilization = r.resource_utilization;
    s.rows.push_back(row);
  }
  return s;
}

}  // namespace pisa
