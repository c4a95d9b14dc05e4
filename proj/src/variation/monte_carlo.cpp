#include "pisa/variation/monte_carlo.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <thread>

#include "pisa/error.hpp"

namespace pisa {

void VariationModel::validate() const {
  for (double s : {sigma_pixel, sigma_cbl, sigma_nvm_ra, sigma_tmr, sigma_dram, k_sensor, k_dra, k_tra}) {
    if (!(s >= 0.0)) raise(ErrorKind::ConfigError, "variation sigmas and calibration constants must be >= 0");
  }
  if (!(tra_bitline_ratio > 0.0)) raise(ErrorKind::ConfigError, "tra_bitline_ratio must be positive");
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::mt19937_64 trial_stream(std::uint64_t seed, std::uint64_t trial) noexcept {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(trial)));
}

namespace {

/// Sums fn(trial) over [0, trials) on `threads` workers.
template <class Fn>
std::uint64_t parallel_count(std::uint64_t trials, unsigned threads, Fn fn) {
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(trials, 1)));
  std::vector<std::uint64_t> counts(threads, 0);
  std::vector<std::exception_ptr> errors(threads);
  auto work = [&](unsigned w) {
    try {
      for (std::uint64_t t = w; t < trials; t += threads) counts[w] += fn(t) ? 1 : 0;
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < threads; ++w) pool.emplace_back(work, w);
  work(0);
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  return total;
}

void check_trials(std::uint64_t trials) {
  if (trials == 0) raise(ErrorKind::InvalidCount, "Monte-Carlo needs at least one trial");
}

}  // namespace

DramTrial dram_trial(AndMechanism mechanism, const VariationModel& model, std::uint64_t trial) {
  auto rng = trial_stream(model.seed, trial);
  std::normal_distribution<double> normal;
  double z[7];
  for (double& zi : z) zi = normal(rng);

  DramTrial d;
  const double s = (mechanism == AndMechanism::DRA ? model.k_dra : model.k_tra) * model.sigma_dram;
  d.c_a = 1.0 + s * z[0];
  d.c_b = 1.0 + s * z[1];
  d.v_a = 1.0 + s * z[2];
  d.v_b = 1.0 + s * z[3];
  if (mechanism == AndMechanism::DRA) {
    d.threshold = kDraThresholdFraction + s * z[4];
  } else {
    d.threshold = kTraThresholdFraction + s * z[4];
    d.c_c = 1.0 + s * z[5];
    d.c_bl = model.tra_bitline_ratio * (1.0 + s * z[6]);
  }
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const double qa = d.c_a * a * d.v_a;
      const double qb = d.c_b * b * d.v_b;
      bool out = false;
      bool expected = false;
      if (mechanism == AndMechanism::DRA) {
        d.v_shared[a][b] = (qa + qb) / (d.c_a + d.c_b);
        out = d.v_shared[a][b] < d.threshold;
        expected = !(a && b);
      } else {
        // Bit line precharged to V_dd/2; the control cell holds 0.
        d.v_shared[a][b] = (d.c_bl * 0.5 + qa + qb) / (d.c_bl + d.c_a + d.c_b + d.c_c);
        out = d.v_shared[a][b] > d.threshold;
        expected = a && b;
      }
      d.output[a][b] = out;
      d.failed = d.failed || out != expected;
    }
  }
  return d;
}

McReport mc_dram(AndMechanism mechanism, const VariationModel& model, std::uint64_t trials, unsigned threads) {
  model.validate();
  check_trials(trials);
  McReport r;
  r.mechanism = to_string(mechanism);
  r.sigma = model.sigma_dram;
  r.trials = trials;
  r.failures = parallel_count(trials, threads, [&](std::uint64_t t) { return dram_trial(mechanism, model, t).failed; });
  return r;
}

SensorPerturbation sample_sensor_perturbation(const VariationModel& model, std::size_t v, std::size_t pixels,
                                               std::uint64_t trial) {
  auto rng = trial_stream(model.seed, trial);
  std::normal_distribution<double> normal;
  const auto rows = static_cast<Eigen::Index>(v);
  const auto cols = static_cast<Eigen::Index>(pixels);
  auto draw = [&](double sigma, Eigen::Index r, Eigen::Index c) {
    Eigen::MatrixXd m(r, c);
    const double s = model.k_sensor * sigma;
    for (Eigen::Index j = 0; j < r; ++j) {
      for (Eigen::Index i = 0; i < c; ++i) m(j, i) = 1.0 + s * normal(rng);
    }
    return m;
  };
  SensorPerturbation p;
  p.cell_gain = draw(model.sigma_pixel, rows, cols);
  p.cbl_gain = draw(model.sigma_cbl, rows, 1).col(0);
  p.nvm_ra = draw(model.sigma_nvm_ra, rows, cols);
  p.nvm_tmr = draw(model.sigma_tmr, rows, cols);
  return p;
}

McReport mc_sensor(const CfpParams& params, const SensorConfig& config, std::span<const Frame> frames,
                   std::span<const BinaryWeightPlane> weights, const VariationModel& model, std::uint64_t trials,
                   unsigned threads) {
  model.validate();
  check_trials(trials);
  SensorConfig cfg = config;
  cfg.mode = SensorMode::Compute;

  std::vector<CfpArray> arrays;
  std::vector<BitVector> ideal;
  for (const Frame& f : frames) {
    CfpArray arr(params, cfg);
    arr.program_weights(weights);
    arr.reset();
    arr.expose(f);
    ideal.push_back(arr.sign_activation(arr.compute_mac()));
    arrays.push_back(std::move(arr));
  }

  McReport r;
  r.mechanism = "sensor";
  r.sigma = std::max(model.sigma_pixel, model.sigma_cbl);
  r.trials = trials;
  r.failures = parallel_count(trials, threads, [&](std::uint64_t t) {
    const SensorPerturbation p = sample_sensor_perturbation(model, params.v, params.pixels(), t);
    for (std::size_t f = 0; f < arrays.size(); ++f) {
      CfpArray arr = arrays[f];
      if (arr.sign_activation(arr.compute_mac(p)) != ideal[f]) return true;
    }
    return false;
  });
  return r;
}

std::vector<McReport> sweep_dram(const VariationModel& model, std::span<const double> sigmas, std::uint64_t trials,
                                 unsigned threads) {
  std::vector<McReport> rows;
  for (double s : sigmas) {
    VariationModel m = model;
    m.sigma_dram = s;
    for (AndMechanism mech : {AndMechanism::DRA, AndMechanism::TRA}) rows.push_back(mc_dram(mech, m, trials, threads));
  }
  return rows;
}

std::vector<McReport> sweep_sensor(const CfpParams& params, const SensorConfig& config, std::span<const Frame> frames,
                                   std::span<const BinaryWeightPlane> weights, const VariationModel& model,
                                   std::span<const double> sigmas, std::uint64_t trials, unsigned threads) {
  std::vector<McReport> rows;
  for (double s : sigmas) {
    VariationModel m = model;
    m.sigma_pixel = s;
    m.sigma_cbl = s;
    rows.push_back(mc_sensor(params, config, frames, weights, m, trials, threads));
  }
  return rows;
}

SensorMcWorkload default_sensor_workload(const CfpParams& base, std::uint64_t seed) {
  SensorMcWorkload w;
  w.params = base;
  w.params.rows = 4;
  w.params.cols = 4;
  w.params.v = 8;
  const std::size_t n = w.params.pixels();
  std::mt19937_64 rng(seed);
  for (std::size_t j = 0; j < w.params.v; ++j) {
    std::vector<int> signs(n, -1);
    std::fill_n(signs.begin(), j % 2 == 0 ? 12 : 4, 1);
    std::shuffle(signs.begin(), signs.end(), rng);
    w.weights.push_back(BinaryWeightPlane::encode({w.params.rows, w.params.cols}, signs));
  }
  for (double x : {0.25, 0.5}) {
    w.frames.push_back(Frame::Constant(static_cast<Eigen::Index>(w.params.rows), static_cast<Eigen::Index>(w.params.cols), x));
  }
  return w;
}

std::string mc_csv(std::span<const McReport> rows) {
  std::string out = "sigma_pct,mechanism,trials,failures,failure_rate\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.6g,%s,%llu,%llu,%.6f\n", r.sigma * 100.0, r.mechanism.c_str(),
                  static_cast<unsigned long long>(r.trials), static_cast<unsigned long long>(r.failures),
                  r.failure_rate());
    out += buf;
  }
  return out;
}

}  // namespace pisa
