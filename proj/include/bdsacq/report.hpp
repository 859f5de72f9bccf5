#pragma once

#include "bdsacq/acquisition.hpp"
#include "bdsacq/codegen.hpp"
#include "bdsacq/evalbench.hpp"

#include <span>
#include <string>

namespace bdsacq {

// CSV and JSON renderings. Output depends only on the values passed in, so
// identical inputs give byte-identical text.

/// Columns: prn,detected,peak,second_peak,ratio,code_phase,code_doppler_hz,carrier_doppler_hz.
std::string results_csv(std::span<const AcquisitionResult> results);
std::string results_json(std::span<const AcquisitionResult> results);

/// Columns: cn0,pd,ci_low,ci_high.
std::string monte_carlo_csv(const MonteCarloReport& report);
std::string monte_carlo_json(const MonteCarloReport& report);

std::string sensitivity_json(const SensitivityResult& result);

std::string complexity_csv(std::span<const ComplexityReport> reports);
std::string complexity_json(std::span<const ComplexityReport> reports);

std::string sweep_json(std::span<const CorrelationReport> reports);

std::string threshold_json(const DetectionThreshold& threshold);

}  // namespace bdsacq
