#include "pisa/io/cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pisa/error.hpp"
#include "pisa/io/config.hpp"
#include "pisa/io/images.hpp"
#include "pisa/io/report.hpp"
#include "pisa/io/weight_file.hpp"
#include "pisa/perf/workload.hpp"
#include "pisa/pipeline/selftest.hpp"
#include "pisa/pipeline/system.hpp"
#include "pisa/variation/monte_carlo.hpp"

namespace pisa {

namespace {

namespace fs = std::filesystem;

const fs::path kDataDir = PISA_DATA_DIR;

struct Common {
  std::string config;
  std::string weights = (kDataDir / "fixtures" / "mnist_bwnn.pisaw").string();
  std::string images = (kDataDir / "mnist" / "t10k-images-idx3-ubyte.gz").string();
  std::string labels;
  std::optional<std::uint64_t> seed;
  std::string platform;
  std::string wi;
  std::string cost_table;
  std::string out;
  unsigned threads = 0;
};

RunConfig load_config(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : load_run_config(c.config);
  if (c.seed) cfg.variation.seed = *c.seed;
  if (!c.platform.empty() && c.platform != "all") {
    const auto p = parse_platform(c.platform);
    if (!p) raise(ErrorKind::ConfigError, "unknown platform '" + c.platform + "'");
    cfg.platform = *p;
  }
  if (!c.wi.empty() && c.wi != "all") cfg.wi = parse_wi(c.wi);
  if (!c.cost_table.empty()) cfg.cost_table = c.cost_table;
  return cfg;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) raise(ErrorKind::IoError, "cannot write " + path);
  f << text;
}

std::string default_labels(const Common& c) {
  if (!c.labels.empty()) return c.labels;
  const std::string img = "images-idx3-ubyte";
  std::string guess = c.images;
  const auto at = guess.find(img);
  if (at == std::string::npos) return {};
  guess.replace(at, img.size(), "labels-idx1-ubyte");
  return fs::exists(guess) ? guess : std::string{};
}

SystemConfig system_config(const RunConfig& cfg) {
  SystemConfig s;
  s.sensor = cfg.sensor;
  s.sensor_config = cfg.sensor_config;
  s.substrate = cfg.substrate;
  s.switch_threshold = cfg.switch_threshold;
  return s;
}

std::vector<double> parse_sigmas(const std::string& list) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || !(v >= 0.0)) raise(ErrorKind::ConfigError, "bad sigma '" + item + "'");
    out.push_back(v / 100.0);
  }
  if (out.empty()) raise(ErrorKind::ConfigError, "empty sigma list");
  return out;
}

int cmd_infer(const Common& c, const std::string& mode, std::size_t limit, const std::string& substrate,
              std::ostream& out) {
  RunConfig cfg = load_config(c);
  if (!substrate.empty()) {
    bool found = false;
    for (Substrate s : {Substrate::Functional, Substrate::PnsDRA, Substrate::PnsTRA}) {
      if (substrate == to_string(s)) {
        cfg.substrate = s;
        found = true;
      }
    }
    if (!found) raise(ErrorKind::ConfigError, "unknown substrate '" + substrate + "'");
  }
  const NetworkSpec net = load_weights(c.weights);
  ImageSet images = load_images(c.images);
  std::vector<std::uint8_t> labels;
  if (const std::string lp = default_labels(c); !lp.empty()) labels = load_labels(lp);
  if (!labels.empty() && labels.size() != images.frames.size()) {
    raise(ErrorKind::ShapeMismatch, "image and label counts differ");
  }
  if (limit != 0 && limit < images.frames.size()) {
    images.frames.resize(limit);
    if (!labels.empty()) labels.resize(limit);
  }

  const SystemConfig sys = system_config(cfg);
  const bool noisy = cfg.variation.sigma_pixel > 0.0 || cfg.variation.sigma_cbl > 0.0;
  const CostTable costs = resolve_cost_table(cfg);
  nlohmann::json report;
  report["weights"] = c.weights;
  report["images"] = c.images;
  report["frames"] = images.frames.size();
  report["substrate"] = to_string(cfg.substrate);

  std::vector<SensorPath> paths;
  if (mode == "coarse" || mode == "both") paths.push_back(SensorPath::Coarse);
  if (mode == "fine" || mode == "both") paths.push_back(SensorPath::Fine);

  for (SensorPath path : paths) {
    const auto results = infer_batch(net, sys, images.frames, path, c.threads,
                                     noisy && path == SensorPath::Coarse ? &cfg.variation : nullptr);
    Trace total;
    nlohmann::json preds = nlohmann::json::array();
    for (const auto& r : results) {
      total += r.trace;
      preds.push_back(r.predicted);
    }
    nlohmann::json entry;
    entry["predictions"] = preds;
    if (!labels.empty()) {
      const double acc = accuracy(results, labels);
      out << to_string(path) << " accuracy: " << acc << " (" << static_cast<std::size_t>(acc * labels.size() + 0.5)
          << "/" << labels.size() << ")\n";
      entry["accuracy"] = acc;
    } else {
      out << to_string(path) << " frames: " << results.size() << "\n";
    }
    const bool executed = is_pns(cfg.platform);
    Trace t = total;
    if (!executed) {
      t = Trace{};
      const Trace one = build_trace(to_workload(net, cfg.sensor_config.adc_bits), cfg.platform, path);
      for (std::size_t i = 0; i < results.size(); ++i) t += one;
    }
    entry["trace_source"] = executed ? "executed" : "planned";
    entry["report"] = to_json(account(t, costs, cfg.platform, cfg.platform_params()));
    report[to_string(path)] = entry;
  }

  if (mode == "adaptive") {
    PisaSystem system(net, sys);
    std::size_t switched = 0;
    std::size_t hit = 0;
    for (std::size_t i = 0; i < images.frames.size(); ++i) {
      const AdaptiveResult a = system.run_adaptive(images.frames[i]);
      switched += a.fine ? 1 : 0;
      if (!labels.empty()) hit += a.final().predicted == labels[i] ? 1 : 0;
    }
    out << "adaptive switched: " << switched << "/" << images.frames.size() << "\n";
    if (!labels.empty()) out << "adaptive accuracy: " << static_cast<double>(hit) / labels.size() << "\n";
    report["adaptive"] = {{"switched", switched}, {"threshold", cfg.switch_threshold}};
  }
  if (paths.empty() && mode != "adaptive") raise(ErrorKind::ConfigError, "unknown mode '" + mode + "'");

  const std::string text = report.dump(2) + "\n";
  if (!c.out.empty()) emit(text, c.out, out);
  out << "platform: " << to_string(cfg.platform) << "\n";
  return kExitOk;
}

int cmd_mc(const Common& c, const std::string& target, const std::string& sigma_list, std::uint64_t trials,
           std::ostream& out) {
  const RunConfig cfg = load_config(c);
  const std::vector<double> sigmas = parse_sigmas(sigma_list);
  std::vector<McReport> rows;
  if (target == "dram") {
    rows = sweep_dram(cfg.variation, sigmas, trials, c.threads);
  } else if (target == "sensor") {
    const SensorMcWorkload w = default_sensor_workload(cfg.sensor, cfg.variation.seed);
    rows = sweep_sensor(w.params, cfg.sensor_config, w.frames, w.weights, cfg.variation, sigmas, trials, c.threads);
  } else {
    raise(ErrorKind::ConfigError, "mc target must be 'sensor' or 'dram'");
  }
  emit(mc_csv(rows), c.out, out);
  return kExitOk;
}

int cmd_perf(const Common& c, std::ostream& out) {
  const RunConfig cfg = load_config(c);
  const CostTable costs = resolve_cost_table(cfg);
  std::vector<WiConfig> wis;
  if (c.wi.empty() || c.wi == "all") {
    for (unsigned i : {32U, 16U, 8U, 4U}) wis.push_back({1, i});
  } else {
    wis.push_back(cfg.wi);
  }
  std::vector<Platform> platforms;
  if (c.platform.empty() || c.platform == "all") {
    platforms.assign(std::begin(kAllPlatforms), std::end(kAllPlatforms));
  } else {
    platforms = {Platform::BaselineCpu};
    if (cfg.platform != Platform::BaselineCpu) platforms.push_back(cfg.platform);
  }

  nlohmann::json doc;
  doc["cost_table"] = cfg.cost_table.empty() ? "defaults" : cfg.cost_table.string();
  doc["note"] = "host CPU/GPU costs are calibrated, not measured";
  std::vector<ComparisonSummary> summaries;
  for (const WiConfig& wi : wis) {
    const Workload w = svhn_workload(wi.input_bits, wi.weight_bits);
    std::vector<TraceReport> reports;
    for (Platform p : platforms) reports.push_back(account(build_trace(w, p), costs, p, cfg.platform_params()));
    summaries.push_back(compare(reports));
    nlohmann::json entry;
    entry["wi"] = to_string(wi);
    entry["comparison"] = to_json(summaries.back());
    for (const auto& r : reports) entry["reports"].push_back(to_json(r));
    doc["workloads"].push_back(entry);
  }
  if (c.out.empty()) {
    out << doc.dump(2) << "\n";
  } else {
    emit(doc.dump(2) + "\n", c.out + ".json", out);
    emit(comparison_csv(summaries), c.out + ".csv", out);
    out << "wrote " << c.out << ".json and " << c.out << ".csv\n";
  }
  return kExitOk;
}

int cmd_dump_trace(const Common& c, std::size_t index, const std::string& mode, std::ostream& out) {
  const RunConfig cfg = load_config(c);
  nlohmann::json doc;
  if (!c.wi.empty()) {
    const Workload w = svhn_workload(cfg.wi.input_bits, cfg.wi.weight_bits);
    doc = to_json(build_trace(w, cfg.platform, mode == "fine" ? SensorPath::Fine : SensorPath::Coarse));
  } else {
    const NetworkSpec net = load_weights(c.weights);
    const ImageSet images = load_images(c.images);
    if (index >= images.frames.size()) raise(ErrorKind::AddressOutOfRange, "frame index " + std::to_string(index));
    PisaSystem sys(net, system_config(cfg));
    InferenceResult r;
    if (mode == "fine") {
      sys.switch_mode(SensorMode::Sensing);
      r = sys.run_fine(images.frames[index]);
    } else {
      r = sys.run_coarse(images.frames[index]);
    }
    doc = to_json(r.trace);
    doc["predicted"] = r.predicted;
  }
  emit(doc.dump(2) + "\n", c.out, out);
  return kExitOk;
}

int cmd_selftest(const Common& c, std::ostream& out) {
  bool ok = true;
  for (const auto& check : run_selftest(static_cast<unsigned>(c.seed.value_or(7)))) {
    out << (check.passed ? "PASS " : "FAIL ") << check.name << ": " << check.detail << "\n";
    ok = ok && check.passed;
  }
  return ok ? kExitOk : kExitInvariant;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "Run configuration (TOML)");
  app->add_option("--weights", c.weights, "Network weight file");
  app->add_option("--images", c.images, "IDX or PGM images, optionally gzipped");
  app->add_option("--labels", c.labels, "IDX labels");
  app->add_option("--seed", c.seed, "Variation seed");
  app->add_option("--platform", c.platform, "baseline-cpu, pisa-cpu, pisa-gpu, pisa-pns-i, pisa-pns-ii or all");
  app->add_option("--wi", c.wi, "Weight:input precision, e.g. 1:4, or all");
  app->add_option("--cost-table", c.cost_table, "Cost table override (TOML)");
  app->add_option("--out", c.out, "Output path");
  app->add_option("--threads", c.threads, "Worker threads, 0 = all cores");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Behavioral simulator of a hybrid in-sensor / near-sensor BWNN accelerator", "pisa"};
  app.require_subcommand(1);
  Common c;

  std::string mode = "coarse";
  std::size_t limit = 0;
  std::string substrate;
  auto* infer = app.add_subcommand("infer", "Run the network on images");
  add_common(infer, c);
  infer->add_option("--mode", mode, "coarse, fine, both or adaptive")->check(CLI::IsMember({"coarse", "fine", "both", "adaptive"}));
  infer->add_option("--limit", limit, "Use only the first N images");
  infer->add_option("--substrate", substrate, "functional, pns-dra or pns-tra");

  std::string target;
  std::string sigmas = "5,10,15,20,30";
  std::uint64_t trials = 10000;
  auto* mc = app.add_subcommand("mc", "Monte-Carlo variation sweep (CSV)");
  add_common(mc, c);
  mc->add_option("target", target, "sensor or dram")->required()->check(CLI::IsMember({"sensor", "dram"}));
  mc->add_option("--sigma", sigmas, "Comma-separated sigmas in percent");
  mc->add_option("--trials", trials, "Trials per point")->check(CLI::PositiveNumber);

  auto* perf = app.add_subcommand("perf", "Platform comparison on the SVHN-topology workload");
  add_common(perf, c);

  std::size_t index = 0;
  std::string trace_mode = "coarse";
  auto* dump = app.add_subcommand("dump-trace", "Raw primitive tallies of one frame or a planned workload");
  add_common(dump, c);
  dump->add_option("--index", index, "Frame index");
  dump->add_option("--mode", trace_mode, "coarse or fine")->check(CLI::IsMember({"coarse", "fine"}));

  auto* self = app.add_subcommand("selftest", "Oracle-equivalence checks");
  add_common(self, c);

  if (argc <= 1) {
    err << app.help();
    return kExitUsage;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*infer) return cmd_infer(c, mode, limit, substrate, out);
    if (*mc) return cmd_mc(c, target, sigmas, trials, out);
    if (*perf) return cmd_perf(c, out);
    if (*dump) return cmd_dump_trace(c, index, trace_mode, out);
    if (*self) return cmd_selftest(c, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::InvariantViolation ? kExitInvariant : kExitData;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInvariant;
  }
  return kExitUsage;
}

}  // namespace pisa
