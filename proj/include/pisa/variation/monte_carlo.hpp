#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pisa/dram/subarray.hpp"
#include "pisa/sensor/cfp_array.hpp"

namespace pisa {

/// Relative Gaussian deviations. The k_* constants map a nominal "+-sigma
/// process variation" onto the behavioral quantity each model perturbs.
struct VariationModel {
  double sigma_pixel = 0.0;
  double sigma_cbl = 0.0;
  double sigma_nvm_ra = 0.02;
  double sigma_tmr = 0.05;
  double sigma_dram = 0.0;
  std::uint64_t seed = 1;
  double k_sensor = 1.0;
  double k_dra = 0.50;
  double k_tra = 0.25;
  /// Bit-line to cell capacitance ratio of the TRA sense path.
  double tra_bitline_ratio = 3.0;

  void validate() const;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;
/// Independent stream of one trial; identical for any thread schedule.
std::mt19937_64 trial_stream(std::uint64_t seed, std::uint64_t trial) noexcept;

struct McReport {
  std::string mechanism;
  double sigma = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t failures = 0;
  double failure_rate() const noexcept {
    return trials == 0 ? 0.0 : static_cast<double>(failures) / static_cast<double>(trials);
  }
  friend bool operator==(const McReport&, const McReport&) = default;
};

/// One perturbed DRA/TRA evaluation of all four operand combinations.
struct DramTrial {
  double c_a = 1.0, c_b = 1.0, c_c = 1.0, c_bl = 0.0;
  double v_a = 1.0, v_b = 1.0;  ///< stored-one levels, fraction of V_dd
  double threshold = 0.0;       ///< fraction of V_dd
  double v_shared[2][2] = {};   ///< [a][b], fraction of V_dd
  bool output[2][2] = {};       ///< NAND for DRA, AND for TRA
  bool failed = false;
};

DramTrial dram_trial(AndMechanism mechanism, const VariationModel& model, std::uint64_t trial);

/// threads = 0 uses the hardware concurrency.
McReport mc_dram(AndMechanism mechanism, const VariationModel& model, std::uint64_t trials, unsigned threads = 0);

/// Multiplicative deviations for one trial of a v x pixels array.
SensorPerturbation sample_sensor_perturbation(const VariationModel& model, std::size_t v, std::size_t pixels,
                                               std::uint64_t trial);

/// A trial fails if any sign bit over any frame differs from the ideal array.
McReport mc_sensor(const CfpParams& params, const SensorConfig& config, std::span<const Frame> frames,
                   std::span<const BinaryWeightPlane> weights, const VariationModel& model, std::uint64_t trials,
                   unsigned threads = 0);

/// Both mechanisms at every sigma (fractions), paired draws.
std::vector<McReport> sweep_dram(const VariationModel& model, std::span<const double> sigmas, std::uint64_t trials,
                                 unsigned threads = 0);
/// sigma_pixel = sigma_cbl = sigma at every point; NVM sigmas as in the model.
std::vector<McReport> sweep_sensor(const CfpParams& params, const SensorConfig& config, std::span<const Frame> frames,
                                   std::span<const BinaryWeightPlane> weights, const VariationModel& model,
                                   std::span<const double> sigmas, std::uint64_t trials, unsigned threads = 0);

/// Default sensor sweep: 4x4 array, v = 8. Plane j holds 12 (+1) cells for
/// even j and 4 for odd j at seeded positions, exposed at intensities 0.25
/// and 0.5, so every bit-line has a margin of half its full-scale current.
struct SensorMcWorkload {
  CfpParams params;
  std::vector<Frame> frames;
  std::vector<BinaryWeightPlane> weights;
};

SensorMcWorkload default_sensor_workload(const CfpParams& base, std::uint64_t seed);

/// Columns sigma_pct, mechanism, trials, failures, failure_rate.
std::string mc_csv(std::span<const McReport> rows);

}  // namespace pisa
