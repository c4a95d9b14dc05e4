#include "pisa/io/report.hpp"

#include <cstdio>

namespace pisa {

using nlohmann::json;

json to_json(const TraceReport& r) {
  json j;
  j["workload"] = r.workload;
  j["platform"] = to_string(r.platform);
  j["frames"] = r.frames;
  j["energy"] = {{"sensor", r.energy.sensor},
                 {"data_transfer", r.energy.data_transfer},
                 {"off_chip", r.energy.off_chip},
                 {"pns", r.energy.pns},
                 {"total", r.total_energy_j}};
  j["latency"] = {{"conversion", r.latency.conversion},
                  {"transfer", r.latency.transfer},
                  {"memory", r.latency.memory},
                  {"compute", r.latency.compute},
                  {"total", r.total_latency_s}};
  j["stages"] = {{"sensor", r.sensor_stage_s}, {"transfer", r.transfer_stage_s}, {"backend", r.backend_stage_s}};
  j["fps"] = r.fps;
  j["efficiency_tops_per_w"] = r.efficiency_tops_per_w;
  j["system_efficiency_tops_per_w"] = r.system_efficiency_tops_per_w;
  j["memory_bottleneck_ratio"] = r.memory_bottleneck_ratio;
  j["resource_utilization"] = r.resource_utilization;
  j["host_costs"] = r.platform == Platform::PisaPnsI || r.platform == Platform::PisaPnsII ? "not used"
                                                                                            : "calibrated, not measured";
  return j;
}

json to_json(const LayerTally& t) {
  return {{"ands", t.ands},           {"row_pairs", t.row_pairs},   {"row_writes", t.row_writes},
          {"row_reads", t.row_reads}, {"bitcount_rows", t.bitcount_rows}, {"shift_adds", t.shift_adds},
          {"row_copies", t.row_copies}, {"dra_cycles", t.dra_cycles}, {"tra_steps", t.tra_steps},
          {"groups", t.groups},       {"chunks", t.chunks},         {"macs", t.macs}};
}

json to_json(const Trace& t) {
  json layers = json::array();
  for (const auto& l : t.layers) {
    layers.push_back({{"name", l.name},
                      {"macs", l.macs},
                      {"input_bits", l.input_bits},
                      {"weight_bits", l.weight_bits},
                      {"pns", to_json(l.pns)}});
  }
  return {{"workload", t.workload},
          {"frames", t.frames},
          {"sensor",
           {{"pixels_sensed", t.pixels_sensed},
            {"pixel_rows_read", t.pixel_rows_read},
            {"adc_samples", t.adc_samples},
            {"adc_rows", t.adc_rows},
            {"cp_macs", t.cp_macs},
            {"nvm_reads", t.nvm_reads},
            {"compute_cycles", t.sensor_compute_cycles},
            {"sensing_frames", t.sensing_frames},
            {"processing_frames", t.processing_frames}}},
          {"transfer",
           {{"host_link_bits", t.host_link_bits},
            {"host_link_frames", t.host_link_frames},
            {"pns_link_bits", t.pns_link_bits}}},
          {"pns_frames", t.pns_frames},
          {"layers", layers}};
}

json to_json(const ComparisonSummary& s) {
  json rows = json::array();
  for (const auto& r : s.rows) {
    rows.push_back({{"platform", to_string(r.platform)},
                    {"energy_j", r.energy_j},
                    {"latency_s", r.latency_s},
                    {"transfer_energy_reduction", r.transfer_energy_reduction},
                    {"speedup", r.speedup},
                    {"energy_ratio", r.energy_ratio},
                    {"memory_bottleneck_ratio", r.memory_bottleneck_ratio},
                    {"resource_utilization", r.resource_utilization}});
  }
  return {{"workload", s.workload}, {"rows", rows}};
}

json to_json(const McReport& r) {
  return {{"mechanism", r.mechanism},
          {"sigma_pct", r.sigma * 100.0},
          {"trials", r.trials},
          {"failures", r.failures},
          {"failure_rate", r.failure_rate()}};
}

std::string comparison_csv(std::span<const ComparisonSummary> summaries) {
  std::string out =
      "workload,platform,energy_j,latency_s,transfer_energy_reduction,speedup,energy_ratio,memory_bottleneck_ratio,"
      "resource_utilization\n";
  char buf[512];
  for (const auto& s : summaries) {
    for (const auto& r : s.rows) {
      std::snprintf(buf, sizeof buf, "%s,%s,%.6e,%.6e,%.6f,%.6f,%.6f,%.6f,%.6f\n", s.workload.c_str(),
                    to_string(r.platform), r.energy_j, r.latency_s, r.transfer_energy_reduction, r.speedup,
                    r.energy_ratio, r.memory_bottleneck_ratio, r.resource_utilization);
      out += buf;
    }
  }
  return out;
}

}  // namespace pisa
