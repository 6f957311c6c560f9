#include "run_config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mtjsnn/errors.hpp"

namespace mtjsnn::cli {

using nlohmann::json;

namespace {

void fail(const std::string& where, const std::string& what) { throw ConfigError(where + ": " + what); }

// Wraps a JSON object and rejects any key that was never looked at.
class Section {
 public:
  Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail(where_, "must be an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) fail(where_, "unknown key '" + key + "'");
    }
  }
  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  const json& at(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }
  double number(const std::string& key, double fallback, double lo, double hi) {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number()) fail(where_ + "." + key, "must be a number");
    const double x = v.get<double>();
    if (!(x >= lo && x <= hi)) fail(where_ + "." + key, "out of range [" + fmt(lo) + ", " + fmt(hi) + "]");
    return x;
  }
  long long integer(const std::string& key, long long fallback, long long lo, long long hi) {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number_integer()) fail(where_ + "." + key, "must be an integer");
    const auto x = v.get<long long>();
    if (x < lo || x > hi) fail(where_ + "." + key, "out of range");
    return x;
  }
  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_string()) fail(where_ + "." + key, "must be a string");
    return v.get<std::string>();
  }
  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_boolean()) fail(where_ + "." + key, "must be a boolean");
    return v.get<bool>();
  }
  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_array()) fail(where_ + "." + key, "must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) fail(where_ + "." + key, "must be an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
  const std::string& where() const { return where_; }

 private:
  static std::string fmt(double v) {
    std::ostringstream s;
    s << v;
    return s.str();
  }
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

constexpr double kInf = 1e300;

DeviceParams preset(const std::string& name) {
  for (auto d : preset_devices()) {
    std::string a = d.name, b = name;
    for (auto* s : {&a, &b}) {
      for (char& c : *s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    if (a == b) return d;
  }
  fail("devices", "unknown preset '" + name + "' (expected 1kBT, 2kBT, 10kBT or 20kBT)");
  return {};
}

DeviceParams parse_device(const json& j, std::size_t index) {
  if (j.is_string()) return preset(j.get<std::string>());
  Section s(j, "devices[" + std::to_string(index) + "]");
  DeviceParams d;
  if (s.has("preset")) {
    d = preset(s.string("preset", ""));
  } else {
    for (const char* k : {"name", "length_nm", "width_nm", "thickness_nm", "ms_ka_per_m"}) {
      if (!s.has(k)) fail(s.where(), std::string("custom device needs '") + k + "'");
    }
    d = make_device(s.string("name", ""), s.number("length_nm", 0, 1e-3, kInf) * 1e-9,
                    s.number("width_nm", 0, 1e-3, kInf) * 1e-9, s.number("thickness_nm", 0, 1e-3, kInf) * 1e-9,
                    s.number("ms_ka_per_m", 0, 1e-6, kInf) * 1e3);
  }
  d.name = s.string("name", d.name);
  d.hm_thickness = s.number("hm_thickness_nm", d.hm_thickness * 1e9, 1e-3, kInf) * 1e-9;
  d.hm_width = s.number("hm_width_nm", d.hm_width * 1e9, 0, kInf) * 1e-9;
  d.hm_resistivity = s.number("hm_resistivity_ohm_m", d.hm_resistivity, 1e-12, kInf);
  d.gilbert_damping = s.number("damping", d.gilbert_damping, 1e-6, 0.999999);
  d.spin_hall_angle = s.number("spin_hall_angle", d.spin_hall_angle, 0, 1);
  d.spin_flip_length = s.number("spin_flip_length_nm", d.spin_flip_length * 1e9, 1e-3, kInf) * 1e-9;
  d.temperature = s.number("temperature_k", d.temperature, 0, 1e4);
  d.mgo_resistance_p = s.number("r_p_ohm", d.mgo_resistance_p, 1e-9, kInf);
  d.mgo_resistance_ap = s.number("r_ap_ohm", d.mgo_resistance_ap, 1e-9, kInf);
  if (s.has("demag")) {
    const auto n = s.numbers("demag", {});
    if (n.size() != 3) fail(s.where() + ".demag", "must be [Nxx, Nyy, Nzz]");
    d.demag_factors = {n[0], n[1], n[2]};
  }
  try {
    validate(d);
  } catch (const InvalidArgument& e) {
    fail(s.where(), e.what());
  }
  return d;
}

OperatingMode mode_of(const std::string& text, const std::string& where) {
  try {
    return parse_mode(text);
  } catch (const InvalidArgument& e) {
    fail(where, e.what());
  }
  return OperatingMode::synchronous;
}

}  // namespace

const DeviceParams& RunConfig::device(const std::string& name) const {
  for (const auto& d : devices) {
    if (d.name == name) return d;
  }
  throw ConfigError("no device named '" + name + "' in the config");
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir, const Overrides& o) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (o.seed) doc["seed"] = *o.seed;
  if (o.workers) doc["workers"] = *o.workers;
  if (o.mode) doc["network"]["mode"] = *o.mode;
  if (o.fidelity) doc["network"]["fidelity"] = *o.fidelity;

  RunConfig c;
  c.hash = fnv1a_hex(doc.dump());
  auto path = [&](const std::string& p) {
    std::filesystem::path q(p);
    return q.is_absolute() || p.empty() ? q : base_dir / q;
  };

  Section top(doc, "config");
  c.seed = static_cast<std::uint64_t>(top.integer("seed", 1, 0, std::numeric_limits<long long>::max()));
  c.workers = static_cast<unsigned>(top.integer("workers", 0, 0, 1024));
  if (top.has("output_dir")) c.output_dir = path(top.string("output_dir", ""));

  if (top.has("devices")) {
    const auto& arr = top.at("devices");
    if (!arr.is_array()) fail("devices", "must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i) c.devices.push_back(parse_device(arr[i], i));
  } else {
    c.devices = preset_devices();
  }

  if (top.has("simulation")) {
    Section s(top.at("simulation"), "simulation");
    auto& m = c.simulation;
    m.dt = s.number("dt_ps", 1.0, 1e-6, 1e3) * 1e-12;
    m.pulse_width = s.number("pulse_width_ns", 0.5, 1e-6, 1e6) * 1e-9;
    m.n_trials = static_cast<int>(s.integer("n_trials", 1000, 100, 100000000));
    m.points = static_cast<int>(s.integer("points", 13, 5, 10000));
    for (double i : s.numbers("currents_ua", {})) m.currents.push_back(i * 1e-6);
    m.async_window = s.number("async_window_ns", 2000, 1, 1e9) * 1e-9;
    m.dwell_duration = s.number("dwell_duration_ns", 10000, 1, 1e10) * 1e-9;
    m.dwell_bias.clear();
    for (double i : s.numbers("dwell_bias_ua", {0.0})) m.dwell_bias.push_back(i * 1e-6);
    m.read_stream_duration = s.number("read_stream_ns", 200, 0, 1e9) * 1e-9;
    m.t_read = s.number("t_read_ns", 1, 0, 1e12) * 1e-9;
    m.retention_deltas = s.numbers("retention_deltas_kbt", {});
    m.neuron = s.boolean("neuron_models", true);
  }

  if (top.has("readout")) {
    Section s(top.at("readout"), "readout");
    auto& r = c.readout;
    r.read_current = s.number("read_current_ua", r.read_current * 1e6, 0, 1e6) * 1e-6;
    r.r_ref = s.number("r_ref_ohm", r.r_ref, 0, kInf);
    r.read_time_sync = s.number("read_time_ns", r.read_time_sync * 1e9, 1e-6, 1e6) * 1e-9;
    r.tau_rc = s.number("tau_rc_ns", r.tau_rc * 1e9, 1e-6, 1e6) * 1e-9;
    r.input_band = s.number("input_band", r.input_band, 0, 1);
    r.output_band = s.number("output_band", r.output_band, 0, 0.49);
    r.inverter_threshold_offset = s.number("threshold_offset", r.inverter_threshold_offset, -0.1, 0.1);
    r.sigma_level = static_cast<int>(s.integer("sigma_level", r.sigma_level, -2, 2));
    r.offset_per_sigma = s.number("offset_per_sigma", r.offset_per_sigma, 0, 0.05);
  }

  if (top.has("energy")) {
    Section s(top.at("energy"), "energy");
    auto& e = c.energy;
    e.sync_read_energy = s.number("sync_read_fj", e.sync_read_energy * 1e15, 0, kInf) * 1e-15;
    e.async_static_power = s.number("async_static_uw", e.async_static_power * 1e6, 0, kInf) * 1e-6;
    e.async_toggle_energy = s.number("async_toggle_fj", e.async_toggle_energy * 1e15, 0, kInf) * 1e-15;
    if (s.has("runs")) {
      const auto& arr = s.at("runs");
      if (!arr.is_array()) fail("energy.runs", "must be an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        Section r(arr[i], "energy.runs[" + std::to_string(i) + "]");
        EnergyRun run;
        run.device = r.string("device", "");
        run.mode = mode_of(r.string("mode", "sync"), r.where());
        c.energy_runs.push_back(run);
      }
    }
  }
  if (c.energy_runs.empty()) {
    c.energy_runs = {{"1kBT", OperatingMode::asynchronous},
                     {"2kBT", OperatingMode::asynchronous},
                     {"10kBT", OperatingMode::synchronous},
                     {"20kBT", OperatingMode::synchronous}};
  }

  if (top.has("network")) {
    Section s(top.at("network"), "network");
    auto& n = c.network;
    n.weights = path(s.string("weights", ""));
    n.images = path(s.string("images", ""));
    n.labels = path(s.string("labels", ""));
    n.characteristics = path(s.string("characteristics", ""));
    n.n_images = static_cast<std::size_t>(s.integer("n_images", 500, 1, 100000000));
    n.time_sync = s.number("time_sync_ns", 120, 1e-3, 1e9) * 1e-9;
    n.time_async = s.number("time_async_ns", 400, 1e-3, 1e9) * 1e-9;
    n.device = s.string("device", n.device);
    n.mode = mode_of(s.string("mode", "sync"), "network.mode");
    try {
      n.fidelity = parse_fidelity(s.string("fidelity", "behavioral"));
    } catch (const InvalidArgument& e) {
      fail("network.fidelity", e.what());
    }
    n.g_o = s.number("g_o_us", 5, 1e-9, 1e9) * 1e-6;
    n.target_accuracy = s.number("target_accuracy", 0.96, 0, 1);
  }

  if (top.has("sweep")) {
    Section s(top.at("sweep"), "sweep");
    SweepSettings w;
    try {
      w.kind = parse_sweep_kind(s.string("kind", ""));
    } catch (const InvalidArgument& e) {
      fail("sweep.kind", e.what());
    }
    w.values = s.numbers("values", {});
    if (w.values.empty()) fail("sweep.values", "must not be empty");
    w.n_mc = static_cast<int>(s.integer("n_mc", 50, 1, 100000));
    if (s.has("n_images")) w.n_images = static_cast<std::size_t>(s.integer("n_images", 1, 1, 100000000));
    c.sweep = w;
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path, const Overrides& o) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path(), o);
}

}  // namespace mtjsnn::cli
