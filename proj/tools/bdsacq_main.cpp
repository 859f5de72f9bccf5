// bdsacq command-line front end.

#include "bdsacq/acquisition.hpp"
#include "bdsacq/codegen.hpp"
#include "bdsacq/dam.hpp"
#include "bdsacq/evalbench.hpp"
#include "bdsacq/ifio.hpp"
#include "bdsacq/report.hpp"
#include "bdsacq/sigsynth.hpp"
#include "bdsacq/vlda.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace bdsacq;

namespace {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,
  kExitIo = 3,
  kExitInfeasible = 4,
};

bool g_verbose = false;

struct Common {
  bool json = false;
  std::string out;
  int jobs = 1;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_flag("--json", c.json, "Emit JSON instead of CSV");
  cmd->add_option("--out", c.out, "Write the report to this file instead of stdout");
}

void add_jobs(CLI::App* cmd, Common& c) {
  cmd->add_option("--jobs", c.jobs, "Worker threads (results do not depend on this)")
      ->check(CLI::PositiveNumber);
}

void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw IoError("cannot open output file " + c.out);
  f << text;
  if (!f) throw IoError("write failed: " + c.out);
}

class Stopwatch {
 public:
  Stopwatch() : enabled_(g_verbose), start_(std::chrono::steady_clock::now()) {}
  void report(const std::string& what) const {
    if (!enabled_) return;
    const double s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    std::cerr << what << ": " << s << " s\n";
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point start_;
};

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("not a number: '" + item + "'");
    }
    if (used != item.size()) throw std::invalid_argument("not a number: '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty list: '" + text + "'");
  return out;
}

std::vector<int> parse_prn_list(const std::string& text) {
  std::vector<int> out;
  if (text == "all") {
    out.resize(constants::kMaxPrn);
    std::iota(out.begin(), out.end(), 1);
    return out;
  }
  for (double v : parse_double_list(text)) {
    if (v != std::floor(v) || v < 1 || v > constants::kMaxPrn) {
      throw std::invalid_argument("PRN must be an integer in 1..63");
    }
    out.push_back(static_cast<int>(v));
  }
  return out;
}

// Scenario keys settable from the command line. Flags override file values.
const std::vector<std::pair<std::string, std::string>> kScenarioFlags = {
    {"prn", "--prn"},
    {"cn0", "--cn0"},
    {"fs", "--fs"},
    {"f_if", "--if"},
    {"carrier_doppler", "--carrier-doppler"},
    {"code_doppler", "--code-doppler"},
    {"carrier_phase", "--carrier-phase"},
    {"code_phase_offset", "--code-phase"},
    {"duration", "--duration"},
    {"nav_seed", "--nav-seed"},
    {"noise_seed", "--noise-seed"},
    {"nh_enabled", "--nh"},
    {"signal_power", "--signal-power"},
};

struct ScenarioFlags {
  std::string config;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  // Keys read from the config file that do not describe the scenario.
  std::map<std::string, std::string> extra;

  void add(CLI::App* cmd, bool with_prn = true) {
    cmd->add_option("--config", config, "Scenario/campaign file (key = value lines)");
    for (const auto& [key, flag] : kScenarioFlags) {
      if (!with_prn && key == "prn") continue;
      options[key] = cmd->add_option(flag, values[key], "Scenario " + key);
    }
  }

  bool given(const std::string& key) const {
    auto it = options.find(key);
    return it != options.end() && it->second->count() > 0;
  }

  // `campaign_keys` are accepted in the file and returned via `extra`.
  ScenarioConfig build(const std::set<std::string>& campaign_keys = {}) {
    ScenarioConfig sc;
    file_keys.clear();
    if (!config.empty()) {
      std::ifstream in(config);
      if (!in) throw IoError("cannot open config file " + config);
      for (const auto& [key, value] : read_key_values(in)) {
        if (campaign_keys.count(key)) {
          extra[key] = value;
        } else {
          set_scenario_field(sc, key, value);
          file_keys.insert(key);
        }
      }
    }
    for (const auto& [key, opt] : options) {
      if (opt->count() > 0) set_scenario_field(sc, key, values[key]);
    }
    return sc;
  }

  bool set_anywhere(const std::string& key) const { return given(key) || file_keys.count(key) > 0; }

  std::set<std::string> file_keys;
};

// Campaign values: flag if given, else config file, else default.
template <typename T>
T pick(CLI::Option* flag, const T& flag_value, const std::map<std::string, std::string>& extra,
       const std::string& key, T fallback) {
  if (flag != nullptr && flag->count() > 0) return flag_value;
  auto it = extra.find(key);
  if (it == extra.end()) return fallback;
  std::istringstream in(it->second);
  T v{};
  if constexpr (std::is_same_v<T, std::string>) {
    return it->second;
  } else {
    in >> v;
    if (!in || !in.eof()) throw std::invalid_argument("config key " + key + ": bad value '" + it->second + "'");
    return v;
  }
}

SampleFormat infer_format(const std::string& explicit_format, const std::string& path) {
  if (!explicit_format.empty()) return parse_sample_format(explicit_format);
  if (path.size() >= 3 && path.substr(path.size() - 3) == ".i8") return SampleFormat::I8;
  return SampleFormat::I16LE;
}

// ---------------------------------------------------------------- synth

struct SynthCmd {
  Common common;
  ScenarioFlags scenario;
  std::string format;
  double scale = 0.0;

  void setup(CLI::App& app) {
    auto* cmd = app.add_subcommand("synth", "Synthesize an IF capture (signal + AWGN) to a raw file");
    scenario.add(cmd);
    cmd->add_option("--format", format, "Sample format: i8 or i16 (default from extension, else i16)");
    cmd->add_option("--scale", scale, "Multiply samples by this before rounding; 0 = auto (90% of full scale)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--out", common.out, "Output IF file")->required();
    cmd->add_flag("--json", common.json, "Print the summary as JSON");
    cmd->callback([this] { run(); });
  }

  void run() {
    const ScenarioConfig sc = scenario.build();
    sc.validate();
    const SampleFormat fmt = infer_format(format, common.out);
    SampledSignal signal = add_awgn(synth_if_signal(sc), sc.cn0, sc.noise_seed, sc.signal_power);
    const double limit = fmt == SampleFormat::I8 ? 127.0 : 32767.0;
    double used = scale;
    if (used == 0.0) {
      const double peak = signal.samples.size() > 0 ? signal.samples.abs().maxCoeff() : 0.0;
      used = peak > 0.0 ? 0.9 * limit / peak : 1.0;
    }
    signal.samples *= used;
    write_if_file(signal, common.out, fmt);

    nlohmann::ordered_json j;
    j["file"] = common.out;
    j["format"] = to_string(fmt);
    j["samples"] = signal.size();
    j["fs"] = signal.fs;
    j["f_if"] = sc.f_if;
    j["scale"] = used;
    if (common.json) {
      std::cout << j.dump(2) << "\n";
    } else {
      std::cout << "file,format,samples,fs,f_if,scale\n"
                << common.out << ',' << to_string(fmt) << ',' << signal.size() << ',' << signal.fs << ','
                << sc.f_if << ',' << used << '\n';
    }
  }
};

// ---------------------------------------------------------- acquisition

struct InputFlags {
  std::string in;
  std::string format;

  void add(CLI::App* cmd) {
    cmd->add_option("--in", in, "Raw IF file to acquire (otherwise a scenario is synthesized)");
    cmd->add_option("--format", format, "Raw file format: i8 or i16 (default from extension, else i16)");
  }
};

// Reads the file or synthesizes the scenario. `needed` > 0 sets the
// synthetic duration when neither the file nor the flags gave one.
SampledSignal load_input(const InputFlags& input, ScenarioFlags& scenario, Eigen::Index needed,
                         ScenarioConfig& sc_out) {
  sc_out = scenario.build();
  if (!input.in.empty()) {
    return read_if_file(input.in, infer_format(input.format, input.in), sc_out.fs, sc_out.f_if);
  }
  if (!scenario.set_anywhere("duration") && needed > 0) {
    sc_out.duration = static_cast<double>(needed) / sc_out.fs;
  }
  sc_out.validate();
  return add_awgn(synth_if_signal(sc_out), sc_out.cn0, sc_out.noise_seed, sc_out.signal_power);
}

struct ThresholdFlags {
  double gamma = 1.5;
  CLI::Option* gamma_opt = nullptr;
  int calibrate = 0;
  double pfa = 1e-2;
  std::uint64_t seed = 1;

  void add(CLI::App* cmd) {
    gamma_opt = cmd->add_option("--gamma", gamma, "Ratio threshold (default 1.5)");
    cmd->add_option("--calibrate", calibrate, "Calibrate gamma on this many noise-only trials (single PRN)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--pfa", pfa, "False-alarm target for --calibrate")->check(CLI::Range(1e-9, 1.0));
    cmd->add_option("--seed", seed, "Master seed for --calibrate");
  }
};

struct AcquireVldaCmd {
  Common common;
  ScenarioFlags scenario;
  InputFlags input;
  ThresholdFlags threshold;
  double t = 1.0;
  double fmin = -6.0;
  double fmax = 6.0;
  int delay = 0;
  double bandwidth = constants::kDefaultBandwidth;
  std::string prns = "all";
  bool carrier = false;
  double carrier_window = 0.01;

  void setup(CLI::App& app) {
    auto* cmd = app.add_subcommand("acquire-vlda", "Delay-and-multiply + variable-length accumulation acquisition");
    add_common(cmd, common);
    add_jobs(cmd, common);
    scenario.add(cmd);
    input.add(cmd);
    threshold.add(cmd);
    cmd->add_option("--T", t, "Coherent accumulation length, s")->check(CLI::PositiveNumber);
    cmd->add_option("--fmin", fmin, "Lowest candidate code Doppler, Hz");
    cmd->add_option("--fmax", fmax, "Highest candidate code Doppler, Hz");
    cmd->add_option("--delay", delay, "Delay in samples (default: smallest feasible delay)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--bw", bandwidth, "Front-end bandwidth for delay selection, Hz")->check(CLI::PositiveNumber);
    cmd->add_option("--prns", prns, "Comma separated PRNs, or 'all'");
    cmd->add_flag("--estimate-carrier", carrier, "Estimate the carrier frequency of detected PRNs");
    cmd->add_option("--carrier-window", carrier_window, "Carrier estimation window, s")
        ->check(CLI::PositiveNumber);
    cmd->callback([this] { run(); });
  }

  void run() {
    Stopwatch sw;
    const auto ids = parse_prn_list(prns);
    ScenarioConfig probe = scenario.build();
    VldaConfig vc;
    vc.coherent_length = t;
    vc.grid = doppler_grid(t, fmin, fmax);
    vc.dam = delay > 0 ? DamConfig{delay, delay / probe.fs, probe.fs, probe.f_if, bandwidth}
                       : select_delay(probe.fs, probe.f_if, bandwidth);
    vc.jobs = common.jobs;
    vc.estimate_carrier = carrier;
    vc.carrier_window = carrier_window;
    ScenarioConfig sc;
    const SampledSignal signal = load_input(input, scenario, vc.required_samples(), sc);
    vc.threshold = resolve_threshold(sc, vc);
    const DamReferenceBank bank(ids, vc.dam.delay_samples, signal.fs);
    const auto results = acquire_vlda(signal, bank, ids, vc);
    sw.report("acquire-vlda");
    emit(common, common.json ? results_json(results) : results_csv(results));
  }

  DetectionThreshold resolve_threshold(const ScenarioConfig& sc, const VldaConfig& vc) const {
    if (threshold.calibrate <= 0) return {threshold.gamma, threshold.pfa};
    CampaignConfig cc;
    cc.method = Method::Vlda;
    cc.vlda = vc;
    cc.scenario = sc;
    cc.jobs = common.jobs;
    return calibrate_threshold(cc, threshold.pfa, threshold.calibrate, threshold.seed);
  }
};

struct AcquireNchCmd {
  Common common;
  ScenarioFlags scenario;
  InputFlags input;
  ThresholdFlags threshold;
  int n_nch = 10;
  double cmin = -5000.0;
  double cmax = 5000.0;
  double cstep = 500.0;
  std::string prns = "all";

  void setup(CLI::App& app) {
    auto* cmd = app.add_subcommand("acquire-nch", "Non-coherent (squared magnitude) baseline acquisition");
    add_common(cmd, common);
    add_jobs(cmd, common);
    scenario.add(cmd);
    input.add(cmd);
    threshold.add(cmd);
    cmd->add_option("--n-nch", n_nch, "Number of 1 ms periods accumulated")->check(CLI::PositiveNumber);
    cmd->add_option("--carrier-min", cmin, "Lowest carrier Doppler bin, Hz");
    cmd->add_option("--carrier-max", cmax, "Highest carrier Doppler bin, Hz");
    cmd->add_option("--carrier-step", cstep, "Carrier bin spacing, Hz")->check(CLI::PositiveNumber);
    cmd->add_option("--prns", prns, "Comma separated PRNs, or 'all'");
    cmd->callback([this] { run(); });
  }

  void run() {
    Stopwatch sw;
    const auto ids = parse_prn_list(prns);
    NchConfig nc;
    nc.n_nch = n_nch;
    nc.carrier_min = cmin;
    nc.carrier_max = cmax;
    nc.carrier_step = cstep;
    nc.jobs = common.jobs;
    ScenarioConfig probe = scenario.build();
    const auto needed = static_cast<Eigen::Index>(n_nch * std::llround(probe.fs * constants::kB1iCodePeriod));
    ScenarioConfig sc;
    const SampledSignal signal = load_input(input, scenario, needed, sc);
    if (threshold.calibrate > 0) {
      CampaignConfig cc;
      cc.method = Method::Nch;
      cc.nch = nc;
      cc.scenario = sc;
      cc.jobs = common.jobs;
      nc.threshold = calibrate_threshold(cc, threshold.pfa, threshold.calibrate, threshold.seed);
    } else {
      nc.threshold = {threshold.gamma, threshold.pfa};
    }
    const CodeReferenceBank bank(ids, signal.fs);
    const auto results = acquire_nch(signal, bank, ids, nc);
    sw.report("acquire-nch");
    emit(common, common.json ? results_json(results) : results_csv(results));
  }
};

// ------------------------------------------------------------- sweeps

struct TauSweepCmd {
  Common common;
  double tau_min = 0.0;
  double tau_max = 2.0;
  double fs = constants::kDefaultFs;
  std::string prns = "all";

  void setup(CLI::App& app) {
    auto* cmd = app.add_subcommand("tau-sweep", "K_auto / K_cross of the delay-product codes versus delay");
    add_common(cmd, common);
    cmd->add_option("--tau-min", tau_min, "Smallest delay, microseconds")->check(CLI::NonNegativeNumber);
    cmd->add_option("--tau-max", tau_max, "Largest delay, microseconds")->check(CLI::NonNegativeNumber);
    cmd->add_option("--fs", fs, "Sampling rate, Hz")->check(CLI::PositiveNumber);
    cmd->add_option("--prns", prns, "Comma separated PRNs, or 'all'");
    cmd->callback([this] { run(); });
  }

  void run() {
    std::vector<RangingCode> codes;
    for (int prn : parse_prn_list(prns)) codes.push_back(gen_ranging_code(prn));
    const auto reports = tau_performance_sweep(codes, tau_min * 1e-6, tau_max * 1e-6, fs);
    emit(common, common.json ? sweep_json(reports) : sweep_to_csv(reports));
  }
};

struct DopplerGridCmd {
  Common common;
  double t = 1.0;
  double fmin = -6.0;
  double fmax = 6.0;

  void setup(CLI::App& app) {
    auto* cmd = app.add_subcommand("doppler-grid", "Candidate code-Doppler bins for a coherent length");
    add_common(cmd, common);
    cmd->add_option("--T", t, "Coherent accumulation length, s")->check(CLI::PositiveNumber);
    cmd->add_option("--fmin", fmin, "Lowest code Doppler, Hz");
    cmd->add_option("--fmax", fmax, "Highest code Doppler, Hz");
    cmd->callback([this] { run(); });
  }

  void run() {
    const DopplerGrid g = doppler_grid(t, fmin, fmax);
    if (common.json) {
      nlohmann::ordered_json j;
      j["T"] = t;
      j["f_min"] = g.f_min;
      j["f_max"] = g.f_max;
      j["step"] = g.step;
      j["n_bins"] = g.size();
      j["bins"] = g.bins;
      emit(common, j.dump(2) + "\n");
      return;
    }
    std::ostringstream out;
    out.precision(12);
    out << "index,doppler_hz\n";
    for (std::size_t i = 0; i < g.size(); ++i) out << i << ',' << g.bins[i] << '\n';
    emit(common, out.str());
  }
};

// ---------------------------------------------------------- campaigns

const std::set<std::string> kCampaignKeys = {"method", "T",     "n_nch",        "trials", "pfa",
                                             "calib_trials", "gamma", "seed",   "cn0_points",
                                             "cn0_low", "cn0_high", "resolution", "pd_target"};

struct CampaignFlags {
  std::string method = "vlda";
  double t = 1.0;
  int n_nch = 10;
  int trials = 150;
  double pfa = 1e-2;
  int calib_trials = 1000;
  double gamma = 0.0;
  std::uint64_t seed = 1;
  std::map<std::string, CLI::Option*> opt;

  void add(CLI::App* cmd) {
    opt["method"] = cmd->add_option("--method", method, "vlda or nch");
    opt["T"] = cmd->add_option("--T", t, "VLDA coherent length, s")->check(CLI::PositiveNumber);
    opt["n_nch"] = cmd->add_option("--n-nch", n_nch, "NCH periods")->check(CLI::PositiveNumber);
    opt["trials"] = cmd->add_option("--trials", trials, "Trials per C/N0 point")->check(CLI::PositiveNumber);
    opt["pfa"] = cmd->add_option("--pfa", pfa, "False-alarm target")->check(CLI::Range(1e-9, 1.0));
    opt["calib_trials"] =
        cmd->add_option("--calib-trials", calib_trials, "Noise-only calibration trials (>= 10/pfa)");
    opt["gamma"] = cmd->add_option("--gamma", gamma, "Use this threshold instead of calibrating");
    opt["seed"] = cmd->add_option("--seed", seed, "Master seed");
  }

  // Resolves flag/file/default precedence into a campaign.
  CampaignConfig build(const ScenarioConfig& sc, const std::map<std::string, std::string>& extra, int jobs) {
    method = pick(opt["method"], method, extra, "method", std::string("vlda"));
    t = pick(opt["T"], t, extra, "T", 1.0);
    n_nch = pick(opt["n_nch"], n_nch, extra, "n_nch", 10);
    trials = pick(opt["trials"], trials, extra, "trials", 150);
    pfa = pick(opt["pfa"], pfa, extra, "pfa", 1e-2);
    calib_trials = pick(opt["calib_trials"], calib_trials, extra, "calib_trials", 1000);
    gamma = pick(opt["gamma"], gamma, extra, "gamma", 0.0);
    seed = pick<std::uint64_t>(opt["seed"], seed, extra, "seed", 1);
    CampaignConfig cc;
    cc.method = parse_method(method);
    cc.scenario = sc;
    cc.jobs = jobs;
    cc.vlda.coherent_length = t;
    cc.vlda.grid = doppler_grid(t, -6.0, 6.0);
    cc.vlda.dam = select_delay(sc.fs, sc.f_if, constants::kDefaultBandwidth);
    cc.nch.n_nch = n_nch;
    return cc;
  }

  DetectionThreshold threshold(const CampaignConfig& cc) const {
    if (gamma > 0.0) return {gamma, pfa};
    // Calibration trials use their own seed stream, disjoint from detection trials.
    return calibrate_threshold(cc, pfa, calib_trials, trial_seed(seed, ~std::uint64_t{0}));
  }
};

struct MonteCarloCmd {
  Common common;
  ScenarioFlags scenario;
  CampaignFlags campaign;
  std::string cn0 = "34,35,36,37,38,39,40,41,42";
  CLI::Option* cn0_opt = nullptr;

  void setup(CLI::App& app) {
    auto* cmd = app.add_subcommand("montecarlo", "Detection probability versus C/N0");
    add_common(cmd, common);
    add_jobs(cmd, common);
    scenario.add(cmd);
    campaign.add(cmd);
    cn0_opt = cmd->add_option("--cn0-points", cn0, "Comma separated C/N0 values, dB-Hz");
    cmd->callback([this] { run(); });
  }

  void run() {
    Stopwatch sw;
    const ScenarioConfig sc = scenario.build(kCampaignKeys);
    const CampaignConfig cc = campaign.build(sc, scenario.extra, common.jobs);
    const auto points = parse_double_list(pick(cn0_opt, cn0, scenario.extra, "cn0_points", cn0));
    const DetectionThreshold th = campaign.threshold(cc);
    sw.report("calibration");
    const MonteCarloReport rep = monte_carlo(cc, points, campaign.trials, th, campaign.seed);
    sw.report("montecarlo");
    emit(common, common.json ? monte_carlo_json(rep) : monte_carlo_csv(rep));
  }
};

struct SensitivityCmd {
  Common common;
  ScenarioFlags scenario;
  CampaignFlags campaign;
  double low = 30.0;
  double high = 46.0;
  double resolution = 0.25;
  double pd_target = 0.9;
  CLI::Option* low_opt = nullptr;
  CLI::Option* high_opt = nullptr;
  CLI::Option* res_opt = nullptr;
  CLI::Option* pd_opt = nullptr;

  void setup(CLI::App& app) {
    auto* cmd = app.add_subcommand("sensitivity", "Smallest C/N0 reaching the target Pd (bisection)");
    add_common(cmd, common);
    add_jobs(cmd, common);
    scenario.add(cmd);
    campaign.add(cmd);
    low_opt = cmd->add_option("--cn0-low", low, "Lower end of the search, dB-Hz");
    high_opt = cmd->add_option("--cn0-high", high, "Upper end of the search, dB-Hz");
    res_opt = cmd->add_option("--resolution", resolution, "C/N0 grid step, dB")->check(CLI::PositiveNumber);
    pd_opt = cmd->add_option("--pd-target", pd_target, "Target detection probability")->check(CLI::Range(0.0, 1.0));
    cmd->callback([this] { run(); });
  }

  void run() {
    Stopwatch sw;
    const ScenarioConfig sc = scenario.build(kCampaignKeys);
    const CampaignConfig cc = campaign.build(sc, scenario.extra, common.jobs);
    const auto& ex = scenario.extra;
    const DetectionThreshold th = campaign.threshold(cc);
    sw.report("calibration");
    const auto res = sensitivity_search(cc, th, campaign.trials, campaign.seed, pick(low_opt, low, ex, "cn0_low", low),
                                        pick(high_opt, high, ex, "cn0_high", high),
                                        pick(pd_opt, pd_target, ex, "pd_target", pd_target),
                                        pick(res_opt, resolution, ex, "resolution", resolution));
    sw.report("sensitivity");
    if (common.json) {
      emit(common, sensitivity_json(res));
    } else {
      std::ostringstream out;
      out << "method,parameter,cn0_at_pd_target,bracket_low,resolution,pd_target\n"
          << to_string(res.method) << ',' << res.parameter << ',' << res.cn0_at_pd90 << ',' << res.bracket_low
          << ',' << res.resolution << ',' << res.pd_target << '\n';
      emit(common, out.str());
    }
  }
};

// --------------------------------------------------------- analytics

struct ComplexityCmd {
  Common common;
  std::string method = "both";
  double fs = constants::kDefaultFs;
  double t = 10.0;
  int n_nch = 20;
  int n_sat = 63;
  int n_f = 0;
  std::string sweep;
  std::string sweep_t = "1,2,5,10,20,50";
  std::string sweep_n = "10,20";

  void setup(CLI::App& app) {
    auto* cmd = app.add_subcommand("complexity", "Real multiplication/addition counts of both pipelines");
    add_common(cmd, common);
    cmd->add_option("--method", method, "vlda, nch or both");
    cmd->add_option("--fs", fs, "Sampling rate, Hz")->check(CLI::PositiveNumber);
    cmd->add_option("--T", t, "VLDA coherent length, s")->check(CLI::PositiveNumber);
    cmd->add_option("--n-nch", n_nch, "NCH periods")->check(CLI::NonNegativeNumber);
    cmd->add_option("--n-sat", n_sat, "Number of PRNs searched")->check(CLI::NonNegativeNumber);
    cmd->add_option("--n-f", n_f, "Override the number of frequency bins (0 = default)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--sweep", sweep, "Comma separated sampling rates in MHz; emits a table over fs");
    cmd->add_option("--sweep-T", sweep_t, "VLDA lengths for --sweep, s");
    cmd->add_option("--sweep-n", sweep_n, "NCH period counts for --sweep");
    cmd->callback([this] { run(); });
  }

  void run() {
    if (method != "vlda" && method != "nch" && method != "both") {
      throw std::invalid_argument("--method must be vlda, nch or both");
    }
    if (!sweep.empty()) {
      std::vector<double> fs_values;
      for (double mhz : parse_double_list(sweep)) fs_values.push_back(mhz * 1e6);
      const auto ts = method == "nch" ? std::vector<double>{} : parse_double_list(sweep_t);
      std::vector<int> ns;
      if (method != "vlda") {
        for (double n : parse_double_list(sweep_n)) ns.push_back(static_cast<int>(n));
      }
      if (!common.json) {
        emit(common, complexity_sweep_csv(fs_values, ts, ns, n_sat));
        return;
      }
      std::vector<ComplexityReport> reps;
      for (double f : fs_values) {
        for (double tt : ts) reps.push_back(vlda_complexity_at(f, tt, n_sat));
        for (int n : ns) reps.push_back(nch_complexity_at(f, n, n_sat));
      }
      emit(common, complexity_json(reps));
      return;
    }
    std::vector<ComplexityReport> reps;
    const auto m = static_cast<std::int64_t>(std::llround(fs * constants::kB1iCodePeriod));
    if (method != "nch") {
      ComplexityReport r = vlda_complexity_at(fs, t, n_sat);
      if (n_f > 0) r = complexity_vlda(m, r.n_t, n_f, n_sat);
      reps.push_back(r);
    }
    if (method != "vlda") reps.push_back(complexity_nch(m, n_f > 0 ? n_f : 21, n_nch, n_sat));
    emit(common, common.json ? complexity_json(reps) : complexity_csv(reps));
  }
};

struct LinkBudgetCmd {
  Common common;
  double power = -163.0;
  double temp = 290.0;
  double bw = constants::kDefaultBandwidth;
  double required = 14.0;

  void setup(CLI::App& app) {
    auto* cmd = app.add_subcommand("link-budget", "SNR before/after delay-and-multiply and minimum coherent length");
    add_common(cmd, common);
    cmd->add_option("--power", power, "Received power, dBW");
    cmd->add_option("--temp", temp, "Noise temperature, K")->check(CLI::PositiveNumber);
    cmd->add_option("--bw", bw, "Bandwidth, Hz")->check(CLI::PositiveNumber);
    cmd->add_option("--required-snr", required, "Required post-integration SNR, dB");
    cmd->callback([this] { run(); });
  }

  void run() {
    const LinkBudget lb = link_budget(power, temp, bw, required);
    if (common.json) {
      emit(common, to_json(lb) + "\n");
      return;
    }
    std::ostringstream out;
    out.precision(10);
    out << "received_power_dbw,noise_temperature_k,bandwidth_hz,snr_db,snr_after_dam_db,"
           "required_baseband_snr_db,min_coherent_length_s\n"
        << lb.received_power << ',' << lb.noise_temperature << ',' << lb.bandwidth << ',' << lb.snr << ','
        << lb.snr_after_dam << ',' << lb.required_baseband_snr << ',' << lb.min_coherent_length << '\n';
    emit(common, out.str());
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bdsacq: BeiDou B1I delay-and-multiply / variable-length accumulation acquisition toolkit"};
  app.require_subcommand(1);
  app.add_flag("-v,--verbose", g_verbose, "Print stage timings to stderr");

  SynthCmd synth;
  AcquireVldaCmd vlda;
  AcquireNchCmd nch;
  TauSweepCmd tau;
  DopplerGridCmd grid;
  MonteCarloCmd mc;
  SensitivityCmd sens;
  ComplexityCmd cx;
  LinkBudgetCmd lb;
  synth.setup(app);
  vlda.setup(app);
  nch.setup(app);
  tau.setup(app);
  grid.setup(app);
  mc.setup(app);
  sens.setup(app);
  cx.setup(app);
  lb.setup(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}
