#pragma once

#include "bdsacq/sigsynth.hpp"

#include <string>

namespace bdsacq {

/// Raw headerless real sample formats.
enum class SampleFormat { I8, I16LE };

SampleFormat parse_sample_format(const std::string& name);
std::string to_string(SampleFormat format);
int sample_bytes(SampleFormat format);

/// Samples are rounded to the nearest integer. Values outside the format's
/// range raise std::invalid_argument; I/O failures raise IoError.
void write_if_file(const SampledSignal& signal, const std::string& path, SampleFormat format);

/// A file whose size is not a multiple of the sample size raises IoError.
SampledSignal read_if_file(const std::string& path, SampleFormat format, double fs, double f_if);

}  // namespace bdsacq
