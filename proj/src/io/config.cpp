#include "pisa/io/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#define TOML_EXCEPTIONS 1
#define TOML_ENABLE_FORMATTERS 0
#include "toml.hpp"

#include "pisa/error.hpp"

namespace pisa {

WiConfig parse_wi(std::string_view s) {
  const auto colon = s.find(':');
  auto num = [&](std::string_view part) {
    unsigned v = 0;
    const auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc{} || p != part.data() + part.size() || v == 0) {
      raise(ErrorKind::ConfigError, "W:I must look like 1:4, got '" + std::string(s) + "'");
    }
    return v;
  };
  if (colon == std::string_view::npos) raise(ErrorKind::ConfigError, "W:I must look like 1:4, got '" + std::string(s) + "'");
  WiConfig wi{num(s.substr(0, colon)), num(s.substr(colon + 1))};
  if (wi.weight_bits > 16 || wi.input_bits > kMaxBits) raise(ErrorKind::ConfigError, "W:I widths out of range");
  return wi;
}

std::string to_string(const WiConfig& wi) {
  return std::to_string(wi.weight_bits) + ":" + std::to_string(wi.input_bits);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void RunConfig::validate() const {
  sensor.validate();
  sensor_config.validate();
  pns.validate();
  variation.validate();
  if (!(frame_period_s > 0.0)) raise(ErrorKind::ConfigError, "frame_period must be positive");
  if (!(switch_threshold >= 0.0 && switch_threshold <= 1.0)) {
    raise(ErrorKind::ConfigError, "switch_threshold must be in [0, 1]");
  }
}

PlatformParams RunConfig::platform_params() const {
  return PlatformParams{frame_period_s, pns.parallel_subarrays};
}

namespace {

toml::table parse_toml(std::string_view text, const std::string& origin) {
  try {
    return toml::parse(text, origin);
  } catch (const toml::parse_error& e) {
    raise(ErrorKind::ConfigError, origin + ":" + std::to_string(e.source().begin.line) + ": " +
                                      std::string(e.description()));
  }
}

std::string where(const toml::node& n, const std::string& origin) {
  return origin + ":" + std::to_string(n.source().begin.line);
}

double as_number(const toml::node& n, const std::string& key, const std::string& origin) {
  if (auto v = n.value<double>()) return *v;
  raise(ErrorKind::ConfigError, where(n, origin) + ": '" + key + "' must be a number");
}

std::uint64_t as_count(const toml::node& n, const std::string& key, const std::string& origin) {
  const auto* i = n.as_integer();
  if (i == nullptr || i->get() < 0) raise(ErrorKind::ConfigError, where(n, origin) + ": '" + key + "' must be a non-negative integer");
  return static_cast<std::uint64_t>(i->get());
}

std::string as_text(const toml::node& n, const std::string& key, const std::string& origin) {
  if (auto v = n.value<std::string>()) return *v;
  raise(ErrorKind::ConfigError, where(n, origin) + ": '" + key + "' must be a string");
}

using Setter = std::function<void(const toml::node&, const std::string&)>;

}  // namespace

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& origin) {
  const std::string name = origin.empty() ? "<config>" : origin.string();
  const toml::table doc = parse_toml(text, name);
  RunConfig c;

  auto num = [&](double& dst) { return Setter([&dst, &name](const toml::node& n, const std::string& k) { dst = as_number(n, k, name); }); };
  auto cnt = [&](std::size_t& dst) {
    return Setter([&dst, &name](const toml::node& n, const std::string& k) { dst = as_count(n, k, name); });
  };
  auto bits = [&](unsigned& dst) {
    return Setter([&dst, &name](const toml::node& n, const std::string& k) { dst = static_cast<unsigned>(as_count(n, k, name)); });
  };

  const std::map<std::string, std::map<std::string, Setter>> schema = {
      {"sensor",
       {{"rows", cnt(c.sensor.rows)},
        {"cols", cnt(c.sensor.cols)},
        {"v", cnt(c.sensor.v)},
        {"v_dd", num(c.sensor.v_dd)},
        {"unit_current", num(c.sensor.unit_current)},
        {"r_pro", num(c.sensor.r_pro)},
        {"v_ref", num(c.sensor.v_ref)},
        {"exposure_gain", num(c.sensor_config.exposure_gain)},
        {"adc_bits", bits(c.sensor_config.adc_bits)},
        {"clock_period", num(c.sensor_config.clock_period)},
        {"mtj_r_parallel", num(c.sensor.mtj.r_parallel)},
        {"mtj_tmr", num(c.sensor.mtj.tmr)},
        {"mtj_read_voltage", num(c.sensor.mtj.read_voltage)}}},
      {"pns",
       {{"rows_per_subarray", cnt(c.pns.rows_per_subarray)},
        {"cols", cnt(c.pns.cols)},
        {"mats_x", cnt(c.pns.mats_x)},
        {"mats_y", cnt(c.pns.mats_y)},
        {"banks_x", cnt(c.pns.banks_x)},
        {"banks_y", cnt(c.pns.banks_y)},
        {"activated_rows", cnt(c.pns.activated_rows)},
        {"activated_col_groups", cnt(c.pns.activated_col_groups)},
        {"parallel_subarrays", cnt(c.pns.parallel_subarrays)},
        {"substrate",
         [&](const toml::node& n, const std::string& k) {
           const std::string s = as_text(n, k, name);
           bool found = false;
           for (Substrate sub : {Substrate::Functional, Substrate::PnsDRA, Substrate::PnsTRA}) {
             if (s == to_string(sub)) {
               c.substrate = sub;
               found = true;
             }
           }
           if (!found) raise(ErrorKind::ConfigError, where(n, name) + ": unknown substrate '" + s + "'");
         }}}},
      {"perf",
       {{"cost_table", [&](const toml::node& n, const std::string& k) { c.cost_table = as_text(n, k, name); }},
        {"platform",
         [&](const toml::node& n, const std::string& k) {
           const std::string s = as_text(n, k, name);
           const auto p = parse_platform(s);
           if (!p) raise(ErrorKind::ConfigError, where(n, name) + ": unknown platform '" + s + "'");
           c.platform = *p;
         }},
        {"wi", [&](const toml::node& n, const std::string& k) { c.wi = parse_wi(as_text(n, k, name)); }},
        {"frame_period", num(c.frame_period_s)}}},
      {"variation",
       {{"sigma_pixel", num(c.variation.sigma_pixel)},
        {"sigma_cbl", num(c.variation.sigma_cbl)},
        {"sigma_nvm_ra", num(c.variation.sigma_nvm_ra)},
        {"sigma_tmr", num(c.variation.sigma_tmr)},
        {"sigma_dram", num(c.variation.sigma_dram)},
        {"seed", [&](const toml::node& n, const std::string& k) { c.variation.seed = as_count(n, k, name); }},
        {"k_sensor", num(c.variation.k_sensor)},
        {"k_dra", num(c.variation.k_dra)},
        {"k_tra", num(c.variation.k_tra)},
        {"tra_bitline_ratio", num(c.variation.tra_bitline_ratio)}}},
      {"pipeline", {{"switch_threshold", num(c.switch_threshold)}}},
  };

  for (const auto& [section, node] : doc) {
    const std::string sec(section.str());
    const auto s = schema.find(sec);
    if (s == schema.end() || !node.is_table()) {
      raise(ErrorKind::ConfigError, where(node, name) + ": unknown section '" + sec + "'");
    }
    for (const auto& [key, value] : *node.as_table()) {
      const std::string k(key.str());
      const auto setter = s->second.find(k);
      if (setter == s->second.end()) raise(ErrorKind::ConfigError, where(value, name) + ": unknown key '" + sec + "." + k + "'");
      setter->second(value, k);
    }
  }
  if (!c.cost_table.empty() && c.cost_table.is_relative() && !origin.empty()) {
    c.cost_table = origin.parent_path() / c.cost_table;
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) { return parse_run_config(read_text_file(path), path); }

CostTable parse_cost_table(std::string_view text, const std::string& origin) {
  const toml::table doc = parse_toml(text, origin);
  CostTable t;
  for (const auto& [name, node] : doc) {
    const std::string entry(name.str());
    if (!node.is_table()) raise(ErrorKind::ConfigError, where(node, origin) + ": '" + entry + "' must be a table");
    Cost c;
    bool have_e = false;
    bool have_l = false;
    for (const auto& [key, value] : *node.as_table()) {
      const std::string k(key.str());
      if (k == "energy") {
        c.energy = as_number(value, k, origin);
        have_e = true;
      } else if (k == "latency") {
        c.latency = as_number(value, k, origin);
        have_l = true;
      } else {
        raise(ErrorKind::ConfigError, where(value, origin) + ": unknown key '" + entry + "." + k + "'");
      }
    }
    if (!have_e || !have_l) raise(ErrorKind::ConfigError, where(node, origin) + ": '" + entry + "' needs energy and latency");
    t.set(entry, c);
  }
  t.validate();
  return t;
}

CostTable load_cost_table(const std::filesystem::path& path) {
  return parse_cost_table(read_text_file(path), path.string());
}

std::string to_toml(const CostTable& table) {
  std::string out;
  char buf[128];
  for (const auto& [name, c] : table.entries()) {
    std::snprintf(buf, sizeof buf, "[%s]\nenergy = %.6g\nlatency = %.6g\n\n", name.c_str(), c.energy, c.latency);
    out += buf;
  }
  return out;
}

CostTable resolve_cost_table(const RunConfig& config) {
  return config.cost_table.empty() ? CostTable::defaults() : load_cost_table(config.cost_table);
}

}  // namespace pisa
