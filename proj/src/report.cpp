#include "bdsacq/report.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

namespace bdsacq {

namespace {

using json = nlohmann::ordered_json;

// JSON has no inf/NaN; they become null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

template <typename T>
json optional_number(const std::optional<T>& v) {
  return v ? number(*v) : json(nullptr);
}

std::string csv_number(double v) {
  std::ostringstream s;
  s.precision(12);
  s << v;
  return s.str();
}

std::string csv_optional(const std::optional<double>& v) { return v ? csv_number(*v) : ""; }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json complexity_object(const ComplexityReport& r) {
  json j;
  j["method"] = to_string(r.method);
  j["M"] = r.m;
  j["N_T"] = r.n_t;
  j["N_f"] = r.n_f;
  j["N_sat"] = r.n_sat;
  j["N_nch"] = r.n_nch;
  j["multiplications"] = r.multiplications;
  j["additions"] = r.additions;
  j["total"] = r.total();
  return j;
}

}  // namespace

std::string results_csv(std::span<const AcquisitionResult> results) {
  std::ostringstream out;
  out << "prn,detected,peak,second_peak,ratio,code_phase,code_doppler_hz,carrier_doppler_hz\n";
  for (const auto& r : results) {
    out << r.prn << ',' << (r.detected ? 1 : 0) << ',' << csv_number(r.peak) << ','
        << csv_number(r.second_peak) << ',' << csv_number(r.ratio) << ',' << r.code_phase << ','
        << csv_optional(r.code_doppler) << ',' << csv_optional(r.carrier_doppler) << '\n';
  }
  return out.str();
}

std::string results_json(std::span<const AcquisitionResult> results) {
  json arr = json::array();
  for (const auto& r : results) {
    json j;
    j["prn"] = r.prn;
    j["detected"] = r.detected;
    j["peak"] = number(r.peak);
    j["second_peak"] = number(r.second_peak);
    j["ratio"] = number(r.ratio);
    j["code_phase"] = r.code_phase;
    j["code_doppler_hz"] = optional_number(r.code_doppler);
    j["carrier_doppler_hz"] = optional_number(r.carrier_doppler);
    arr.push_back(j);
  }
  return dump(json{{"results", arr}});
}

std::string monte_carlo_csv(const MonteCarloReport& report) {
  std::ostringstream out;
  out << "cn0,pd,ci_low,ci_high\n";
  for (std::size_t i = 0; i < report.cn0_points.size(); ++i) {
    out << csv_number(report.cn0_points[i]) << ',' << csv_number(report.pd[i]) << ','
        << csv_number(report.ci[i].low) << ',' << csv_number(report.ci[i].high) << '\n';
  }
  return out.str();
}

std::string monte_carlo_json(const MonteCarloReport& report) {
  json j;
  j["method"] = to_string(report.method);
  j["parameter"] = report.parameter;
  j["trials_per_point"] = report.trials_per_point;
  j["pfa_target"] = report.pfa_target;
  j["threshold"] = number(report.threshold);
  j["master_seed"] = report.master_seed;
  json points = json::array();
  for (std::size_t i = 0; i < report.cn0_points.size(); ++i) {
    points.push_back({{"cn0", report.cn0_points[i]},
                      {"pd", report.pd[i]},
                      {"ci_low", report.ci[i].low},
                      {"ci_high", report.ci[i].high}});
  }
  j["points"] = points;
  return dump(j);
}

std::string sensitivity_json(const SensitivityResult& result) {
  json j;
  j["method"] = to_string(result.method);
  j["parameter"] = result.parameter;
  j["pd_target"] = result.pd_target;
  j["cn0_at_pd_target"] = result.cn0_at_pd90;
  j["bracket_low"] = result.bracket_low;
  j["resolution"] = result.resolution;
  json ev = json::array();
  for (const auto& [cn0, pd] : result.evaluated) ev.push_back({{"cn0", cn0}, {"pd", pd}});
  j["evaluated"] = ev;
  return dump(j);
}

std::string complexity_csv(std::span<const ComplexityReport> reports) {
  std::ostringstream out;
  out << "method,M,N_T,N_f,N_sat,N_nch,multiplications,additions,total\n";
  for (const auto& r : reports) {
    out << to_string(r.method) << ',' << r.m << ',' << r.n_t << ',' << r.n_f << ',' << r.n_sat << ','
        << r.n_nch << ',' << csv_number(r.multiplications) << ',' << csv_number(r.additions) << ','
        << csv_number(r.total()) << '\n';
  }
  return out.str();
}

std::string complexity_json(std::span<const ComplexityReport> reports) {
  json arr = json::array();
  for (const auto& r : reports) arr.push_back(complexity_object(r));
  return dump(json{{"complexity", arr}});
}

std::string sweep_json(std::span<const CorrelationReport> reports) {
  json arr = json::array();
  for (const auto& r : reports) {
    arr.push_back({{"delay_samples", r.delay_samples},
                   {"tau_us", r.tau * 1e6},
                   {"k_auto", number(r.k_auto)},
                   {"k_cross", optional_number(r.k_cross)}});
  }
  return dump(json{{"sweep", arr}});
}

std::string threshold_json(const DetectionThreshold& threshold) {
  return dump(json{{"gamma", number(threshold.gamma)}, {"target_pfa", threshold.target_pfa}});
}

}  // namespace bdsacq
