#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pisa/core/bits.hpp"
#include "pisa/core/tensor.hpp"
#include "pisa/sensor/nvm_cell.hpp"

namespace pisa {

enum class SensorMode { Sensing, Compute };

const char* to_string(SensorMode mode) noexcept;

struct SensorConfig {
  double exposure_gain = 1.2;  ///< volts of V_PD drop per unit intensity
  unsigned adc_bits = 8;
  double clock_period = 100e-6;  ///< seconds per compute cycle
  SensorMode mode = SensorMode::Compute;

  void validate() const;
};

/// Geometry and electrical constants of the compute focal plane.
struct CfpParams {
  std::size_t rows = 128;
  std::size_t cols = 128;
  std::size_t v = 8;          ///< compute bit-lines, one NVM add-on per pixel each
  double v_dd = 1.2;          ///< volts
  double unit_current = 1e-6; ///< amps from one add-on at V_PD == V_DD
  double r_pro = 1e3;         ///< processing reference resistor, ohms
  double v_ref = 0.0;         ///< sense-amplifier reference, volts
  MtjParams mtj;

  void validate() const;
  std::size_t pixels() const noexcept { return rows * cols; }
};

struct PixelState {
  double v_pd = 0.0;
  bool reset = false;
};

/// Multiplicative deviations applied during one noisy MAC evaluation.
/// Matrices are v x pixels (add-on j of pixel i at (j, i)); an empty member
/// means "no deviation" for that source.
struct SensorPerturbation {
  Eigen::MatrixXd cell_gain;
  Eigen::VectorXd cbl_gain;
  Eigen::MatrixXd nvm_ra;
  Eigen::MatrixXd nvm_tmr;
};

using Frame = Eigen::MatrixXd;
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// m x n array of compute-pixels. Pixel i is row-major (r * cols + c).
///
/// Each compute bit-line j carries I_j = sum_i s(W_ji) * unit_current *
/// V_PD,i / V_DD. Sourcing (+1) and sinking (-1) add-ons are accumulated on
/// separate rails in pixel order and then subtracted, so a perfectly
/// balanced bit-line reads exactly zero.
class CfpArray {
 public:
  CfpArray(CfpParams params, SensorConfig config);

  const CfpParams& params() const noexcept { return params_; }
  const SensorConfig& config() const noexcept { return config_; }
  std::size_t rows() const noexcept { return params_.rows; }
  std::size_t cols() const noexcept { return params_.cols; }
  std::size_t v() const noexcept { return params_.v; }

  SensorMode mode() const noexcept { return config_.mode; }
  /// Sensing grounds CR so the compute path contributes no current.
  void set_mode(SensorMode mode) noexcept { config_.mode = mode; }
  void set_adc_bits(unsigned bits);

  /// Writes v weight planes, each of shape rows x cols.
  void program_weights(std::span<const BinaryWeightPlane> planes);
  bool weights_programmed() const noexcept { return programmed_; }
  std::vector<BinaryWeightPlane> read_weights() const;
  NvmCell nvm(std::size_t plane, std::size_t pixel) const;

  /// Precharges every photodiode to V_DD.
  void reset();
  void expose(const Frame& intensities);

  PixelState pixel(std::size_t r, std::size_t c) const;
  const RowMajorMatrix& v_pd() const noexcept { return v_pd_; }

  /// Correlated double sampling of one row, quantized over [0, V_DD].
  std::vector<std::uint32_t> sense_readout(std::size_t row);
  std::uint32_t quantize_cds(double v_reset, double v_exposed) const noexcept;

  /// Single-cycle MAC over the entire array, one current per bit-line (A).
  Eigen::VectorXd compute_mac();
  Eigen::VectorXd compute_mac(const SensorPerturbation& perturbation);

  /// bit j = [I_j * r_pro > v_ref]; exactly zero current maps to 0.
  BitVector sign_activation(const Eigen::VectorXd& currents) const;

  std::uint64_t compute_cycles() const noexcept { return compute_cycles_; }
  std::uint64_t adc_conversions() const noexcept { return adc_conversions_; }

 private:
  Eigen::VectorXd evaluate(const SensorPerturbation* perturbation);

  CfpParams params_;
  SensorConfig config_;
  RowMajorMatrix v_pd_;
  RowMajorMatrix v_reset_sample_;
  std::vector<char> reset_;
  std::vector<BitVector> nvm_;  ///< plane j, pixel i: 1 = parallel = +1
  bool programmed_ = false;
  std::uint64_t compute_cycles_ = 0;
  std::uint64_t adc_conversions_ = 0;
};

/// program -> reset -> expose -> MAC -> sign, the layer-1 path for one frame.
BitVector run_layer1(CfpArray& arr, const Frame& frame, std::span<const BinaryWeightPlane> weights);

}  // namespace pisa
