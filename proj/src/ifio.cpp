#include "bdsacq/ifio.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <limits>
#include <vector>

namespace bdsacq {

SampleFormat parse_sample_format(const std::string& name) {
  if (name == "i8") return SampleFormat::I8;
  if (name == "i16" || name == "i16le" || name == "i16-le") return SampleFormat::I16LE;
  throw std::invalid_argument("unknown sample format: " + name);
}

std::string to_string(SampleFormat format) { return format == SampleFormat::I8 ? "i8" : "i16-le"; }

int sample_bytes(SampleFormat format) { return format == SampleFormat::I8 ? 1 : 2; }

void write_if_file(const SampledSignal& signal, const std::string& path, SampleFormat format) {
  const double lo = format == SampleFormat::I8 ? std::numeric_limits<std::int8_t>::min()
                                               : std::numeric_limits<std::int16_t>::min();
  const double hi = format == SampleFormat::I8 ? std::numeric_limits<std::int8_t>::max()
                                               : std::numeric_limits<std::int16_t>::max();
  std::vector<unsigned char> bytes;
  bytes.reserve(static_cast<std::size_t>(signal.size()) * sample_bytes(format));
  for (Eigen::Index n = 0; n < signal.size(); ++n) {
    const double v = std::nearbyint(signal.samples[n]);
    if (!(v >= lo && v <= hi)) {
      throw std::invalid_argument("write_if_file: sample " + std::to_string(n) +
                                  " outside the representable range");
    }
    const auto iv = static_cast<std::int32_t>(v);
    if (format == SampleFormat::I8) {
      bytes.push_back(static_cast<unsigned char>(static_cast<std::int8_t>(iv)));
    } else {
      const auto u = static_cast<std::uint16_t>(static_cast<std::int16_t>(iv));
      bytes.push_back(static_cast<unsigned char>(u & 0xffu));
      bytes.push_back(static_cast<unsigned char>(u >> 8));
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path);
}

SampledSignal read_if_file(const std::string& path, SampleFormat format, double fs, double f_if) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path);
  const auto width = static_cast<std::size_t>(sample_bytes(format));
  if (bytes.size() % width != 0) {
    throw IoError("truncated IF file " + path + ": " + std::to_string(bytes.size()) +
                  " bytes is not a multiple of the sample size");
  }
  SampledSignal signal;
  signal.fs = fs;
  signal.f_if = f_if;
  signal.origin.description = path;
  const auto n = static_cast<Eigen::Index>(bytes.size() / width);
  signal.samples.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (format == SampleFormat::I8) {
      signal.samples[i] = static_cast<std::int8_t>(bytes[static_cast<std::size_t>(i)]);
    } else {
      const auto k = static_cast<std::size_t>(2 * i);
      const auto u = static_cast<std::uint16_t>(bytes[k] | (bytes[k + 1] << 8));
      signal.samples[i] = static_cast<std::int16_t>(u);
    }
  }
  return signal;
}

}  // namespace bdsacq
