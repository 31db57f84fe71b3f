#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rsdn/error.hpp"
#include "rsdn/spectrum.hpp"
#include "rsdn/synth.hpp"
#include "rsdn/textio.hpp"

namespace rsdn {

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::io_failure, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_text_file(const std::string& path,
                            const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorKind::io_failure, "cannot open '" + path + "' for writing");
  out << contents;
  if (!out) raise(ErrorKind::io_failure, "short write to '" + path + "'");
}

// Dataset file: one JSON object per line. The first line is a header, each
// following line one pair. nlohmann::json keeps object keys sorted and prints
// shortest round-trip reals, so output bytes are a pure function of the data.
inline void write_dataset(const Dataset& d, const std::string& path) {
  validate_dataset(d);
  std::ostringstream out;
  nlohmann::json header{
      {"format_version", 1},
      {"length", d.pairs.empty() ? 0 : d.pairs.front().clean.length()},
      {"split", split_name(d.split)},
      {"generator_config_digest", d.generator_config_digest},
  };
  out << header.dump() << "\n";
  for (const auto& p : d.pairs) {
    nlohmann::json rec{
        {"id", p.id},
        {"target_snr_db", p.target_snr_db},
        {"realized_snr_db", p.realized_snr_db},
        {"seed", p.seed},
        {"clean", p.clean.intensities},
        {"noisy", p.noisy.intensities},
    };
    out << rec.dump() << "\n";
  }
  write_text_file(path, out.str());
}

inline Dataset read_dataset(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  size_t lineno = 0;

  auto parse_line = [&](const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      raise(ErrorKind::parse_failure,
            "line " + std::to_string(lineno) + ": not a JSON object");
    return j;
  };
  auto need = [&](const nlohmann::json& j, const char* key) {
    if (!j.contains(key))
      raise(ErrorKind::parse_failure,
            "line " + std::to_string(lineno) + ": missing key '" + key + "'");
    return j.at(key);
  };

  if (!std::getline(in, line))
    raise(ErrorKind::parse_failure, "empty dataset file '" + path + "'");
  ++lineno;
  const auto header = parse_line(line);
  if (need(header, "format_version").get<int>() != 1)
    raise(ErrorKind::parse_failure, "unsupported dataset format_version");

  Dataset d;
  d.split = split_from_name(need(header, "split").get<std::string>());
  d.generator_config_digest =
      need(header, "generator_config_digest").get<std::string>();
  const auto declared_length = need(header, "length").get<size_t>();

  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto j = parse_line(line);
    SpectrumPair p;
    p.id = need(j, "id").get<std::string>();
    p.target_snr_db = need(j, "target_snr_db").get<double>();
    p.realized_snr_db = need(j, "realized_snr_db").get<double>();
    p.seed = need(j, "seed").get<uint64_t>();
    p.clean.intensities = need(j, "clean").get<std::vector<double>>();
    p.noisy.intensities = need(j, "noisy").get<std::vector<double>>();
    if (p.clean.length() != p.noisy.length() ||
        p.clean.length() != declared_length)
      raise(ErrorKind::length_mismatch,
            "line " + std::to_string(lineno) + ": record lengths " +
                std::to_string(p.clean.length()) + "/" +
                std::to_string(p.noisy.length()) +
                " do not match declared length " +
                std::to_string(declared_length));
    d.pairs.push_back(std::move(p));
  }
  validate_dataset(d);
  return d;
}

// Two-column CSV: `index,intensity`, or `wavenumber,intensity` when the axis
// is set. One optional leading '#' comment line.
inline void write_spectrum_csv(const Spectrum& s, const std::string& path) {
  validate_spectrum(s);
  std::ostringstream out;
  out << (s.has_axis ? "# wavenumber,intensity\n" : "# index,intensity\n");
  for (size_t i = 0; i < s.length(); ++i) {
    const double x = s.has_axis
                         ? s.wavenumber_start +
                               s.wavenumber_step * static_cast<double>(i)
                         : static_cast<double>(i);
    out << format_double(x) << "," << format_double(s[i]) << "\n";
  }
  write_text_file(path, out.str());
}

inline Spectrum read_spectrum_csv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  size_t lineno = 0;
  std::vector<double> xs;
  std::vector<double> ys;
  while (std::getline(in, line)) {
    ++lineno;
    const auto stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const auto parts = split_on(stripped, ',');
    if (parts.size() != 2)
      raise(ErrorKind::parse_failure,
            "line " + std::to_string(lineno) + ": expected two columns");
    try {
      xs.push_back(parse_double(trim(parts[0])));
      ys.push_back(parse_double(trim(parts[1])));
    } catch (const Error&) {
      raise(ErrorKind::parse_failure,
            "line " + std::to_string(lineno) + ": bad number");
    }
  }
  if (ys.empty()) raise(ErrorKind::empty_input, "no samples in '" + path + "'");
  Spectrum s = make_spectrum(std::move(ys));
  if (xs.size() >= 2 && (xs[0] != 0.0 || xs[1] - xs[0] != 1.0)) {
    s.has_axis = true;
    s.wavenumber_start = xs[0];
    s.wavenumber_step = xs[1] - xs[0];
  }
  return s;
}

inline GeneratorConfig read_config_file(const std::string& path) {
  return parse_config_text(read_text_file(path));
}

inline void write_config_file(const GeneratorConfig& cfg,
                              const std::string& path) {
  write_text_file(path, config_text(cfg));
}

}  // namespace rsdn
