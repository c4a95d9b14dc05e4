#include "pisa/sensor/cfp_array.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pisa/error.hpp"

namespace pisa {

const char* to_string(SensorMode mode) noexcept {
  return mode == SensorMode::Sensing ? "sensing" : "compute";
}

void SensorConfig::validate() const {
  if (adc_bits < 1 || adc_bits > 16) raise(ErrorKind::ConfigError, "adc_bits must be in [1, 16]");
  if (!(clock_period > 0.0)) raise(ErrorKind::ConfigError, "clock_period must be positive");
  if (!(exposure_gain >= 0.0)) raise(ErrorKind::ConfigError, "exposure_gain must be non-negative");
}

void CfpParams::validate() const {
  if (rows == 0 || cols == 0 || v == 0) raise(ErrorKind::ConfigError, "sensor dimensions must be positive");
  if (!(v_dd > 0.0)) raise(ErrorKind::ConfigError, "v_dd must be positive");
  if (!(unit_current > 0.0)) raise(ErrorKind::ConfigError, "unit_current must be positive");
  if (!(r_pro > 0.0)) raise(ErrorKind::ConfigError, "r_pro must be positive");
}

CfpArray::CfpArray(CfpParams params, SensorConfig config)
    : params_(params),
      config_(config),
      v_pd_(RowMajorMatrix::Constant(params.rows, params.cols, params.v_dd)),
      v_reset_sample_(RowMajorMatrix::Constant(params.rows, params.cols, params.v_dd)),
      reset_(params.pixels(), 1),
      nvm_(params.v, BitVector(params.pixels())) {
  params_.validate();
  config_.validate();
}

void CfpArray::set_adc_bits(unsigned bits) {
  SensorConfig next = config_;
  next.adc_bits = bits;
  next.validate();
  config_ = next;
}

void CfpArray::program_weights(std::span<const BinaryWeightPlane> planes) {
  if (planes.size() != params_.v) {
    raise(ErrorKind::ShapeMismatch, "expected " + std::to_string(params_.v) + " weight planes, got " +
                                        std::to_string(planes.size()));
  }
  const Shape expected{params_.rows, params_.cols};
  for (const auto& p : planes) {
    if (p.shape() != expected) {
      raise(ErrorKind::ShapeMismatch, "weight plane shape " + to_string(p.shape()) + " != " + to_string(expected));
    }
  }
  for (std::size_t j = 0; j < planes.size(); ++j) nvm_[j] = planes[j].bits();
  programmed_ = true;
}

std::vector<BinaryWeightPlane> CfpArray::read_weights() const {
  std::vector<BinaryWeightPlane> out;
  out.reserve(nvm_.size());
  for (std::size_t j = 0; j < nvm_.size(); ++j) {
    BitVector bits(params_.pixels());
    for (std::size_t i = 0; i < bits.size(); ++i) bits.set(i, nvm(j, i).read(params_.mtj));
    out.emplace_back(Shape{params_.rows, params_.cols}, std::move(bits));
  }
  return out;
}

NvmCell CfpArray::nvm(std::size_t plane, std::size_t pixel) const {
  return NvmCell(nvm_.at(plane).get(pixel));
}

void CfpArray::reset() {
  v_pd_.setConstant(params_.v_dd);
  v_reset_sample_.setConstant(params_.v_dd);
  std::fill(reset_.begin(), reset_.end(), 1);
}

void CfpArray::expose(const Frame& intensities) {
  if (static_cast<std::size_t>(intensities.rows()) != params_.rows ||
      static_cast<std::size_t>(intensities.cols()) != params_.cols) {
    raise(ErrorKind::ShapeMismatch, "frame is " + std::to_string(intensities.rows()) + "x" +
                                        std::to_string(intensities.cols()) + ", array is " +
                                        std::to_string(params_.rows) + "x" + std::to_string(params_.cols));
  }
  if (std::find(reset_.begin(), reset_.end(), 0) != reset_.end()) {
    raise(ErrorKind::NotReset, "expose requires every pixel to be reset first");
  }
  for (std::size_t r = 0; r < params_.rows; ++r) {
    for (std::size_t c = 0; c < params_.cols; ++c) {
      const double drop = config_.exposure_gain * intensities(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      v_pd_(r, c) = std::clamp(params_.v_dd - drop, 0.0, params_.v_dd);
    }
  }
  std::fill(reset_.begin(), reset_.end(), 0);
}

PixelState CfpArray::pixel(std::size_t r, std::size_t c) const {
  return PixelState{v_pd_(r, c), reset_[r * params_.cols + c] != 0};
}

std::uint32_t CfpArray::quantize_cds(double v_reset, double v_exposed) const noexcept {
  const double full_scale = static_cast<double>((1U << config_.adc_bits) - 1U);
  const double diff = std::clamp(v_reset - v_exposed, 0.0, params_.v_dd);
  const double code = std::floor(diff / params_.v_dd * full_scale + 0.5);
  return static_cast<std::uint32_t>(std::min(code, full_scale));
}

std::vector<std::uint32_t> CfpArray::sense_readout(std::size_t row) {
  if (config_.mode != SensorMode::Sensing) raise(ErrorKind::ModeError, "sense_readout requires sensing mode");
  if (row >= params_.rows) raise(ErrorKind::AddressOutOfRange, "sensor row " + std::to_string(row));
  std::vector<std::uint32_t> codes(params_.cols);
  for (std::size_t c = 0; c < params_.cols; ++c) codes[c] = quantize_cds(v_reset_sample_(row, c), v_pd_(row, c));
  adc_conversions_ += params_.cols;
  return codes;
}

Eigen::VectorXd CfpArray::compute_mac() { return evaluate(nullptr); }

Eigen::VectorXd CfpArray::compute_mac(const SensorPerturbation& perturbation) { return evaluate(&perturbation); }

Eigen::VectorXd CfpArray::evaluate(const SensorPerturbation* noise) {
  if (config_.mode != SensorMode::Compute) raise(ErrorKind::ModeError, "compute_mac requires compute mode");
  if (!programmed_) raise(ErrorKind::WeightsUnprogrammed, "program_weights must run before compute_mac");

  const std::size_t n_pix = params_.pixels();
  const std::size_t n_cbl = params_.v;
  const bool cell_noise = noise != nullptr && noise->cell_gain.size() != 0;
  const bool cbl_noise = noise != nullptr && noise->cbl_gain.size() != 0;
  const bool nvm_noise = noise != nullptr && noise->nvm_ra.size() != 0 && noise->nvm_tmr.size() != 0;
  if (cell_noise && (static_cast<std::size_t>(noise->cell_gain.rows()) != n_cbl ||
                     static_cast<std::size_t>(noise->cell_gain.cols()) != n_pix)) {
    raise(ErrorKind::ShapeMismatch, "cell_gain must be v x pixels");
  }
  if (cbl_noise && static_cast<std::size_t>(noise->cbl_gain.size()) != n_cbl) {
    raise(ErrorKind::ShapeMismatch, "cbl_gain must have v entries");
  }
  if (nvm_noise && (static_cast<std::size_t>(noise->nvm_ra.rows()) != n_cbl ||
                    static_cast<std::size_t>(noise->nvm_ra.cols()) != n_pix ||
                    noise->nvm_tmr.rows() != noise->nvm_ra.rows() || noise->nvm_tmr.cols() != noise->nvm_ra.cols())) {
    raise(ErrorKind::ShapeMismatch, "nvm deviations must be v x pixels");
  }

  const double* vpd = v_pd_.data();
  Eigen::VectorXd currents(static_cast<Eigen::Index>(n_cbl));
  for (std::size_t j = 0; j < n_cbl; ++j) {
    const BitVector& plane = nvm_[j];
    const auto jj = static_cast<Eigen::Index>(j);
    double source = 0.0;
    double sink = 0.0;
    for (std::size_t i = 0; i < n_pix; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      bool plus = plane.get(i);
      if (nvm_noise) plus = NvmCell(plus).read(params_.mtj, noise->nvm_ra(jj, ii), noise->nvm_tmr(jj, ii));
      const double term = cell_noise ? noise->cell_gain(jj, ii) * vpd[i] : vpd[i];
      if (plus) {
        source += term;
      } else {
        sink += term;
      }
    }
    double current = (source - sink) * (params_.unit_current / params_.v_dd);
    if (cbl_noise) current *= noise->cbl_gain(jj);
    currents(jj) = current;
  }
  ++compute_cycles_;
  return currents;
}

BitVector CfpArray::sign_activation(const Eigen::VectorXd& currents) const {
  BitVector bits(static_cast<std::size_t>(currents.size()));
  for (Eigen::Index j = 0; j < currents.size(); ++j) {
    bits.set(static_cast<std::size_t>(j), currents(j) * params_.r_pro > params_.v_ref);
  }
  return bits;
}

BitVector run_layer1(CfpArray& arr, const Frame& frame, std::span<const BinaryWeightPlane> weights) {
  arr.program_weights(weights);
  arr.reset();
  arr.expose(frame);
  return arr.sign_activation(arr.compute_mac());
}

}  // namespace pisa
