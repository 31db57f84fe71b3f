#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "rsdn/error.hpp"
#include "rsdn/io.hpp"
#include "rsdn/network.hpp"
#include "rsdn/textio.hpp"
#include "rsdn/train.hpp"

namespace rsdn {

// Checkpoint container format:
//   bytes 0..3   magic "RSDN"
//   bytes 4..7   u32 format version (little-endian)
//   bytes 8..15  u64 text header length
//   [header]     key: value lines (config, hyper, counts, means, history)
//   [body]       f64 little-endian payload:
//                  parameters in Network::params() order,
//                  Adam first moments, Adam second moments (same order),
//                  u64 Adam step count,
//                  batchnorm running stats in Network::state() order.
constexpr uint32_t kCheckpointVersion = 1;
inline const char kCheckpointMagic[4] = {'R', 'S', 'D', 'N'};

namespace detail {

inline void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

inline void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::string& out, double d) {
  uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u64(out, bits);
}

struct ByteReader {
  const std::string& buf;
  size_t pos = 0;

  void need(size_t n) const {
    if (pos + n > buf.size())
      raise(ErrorKind::parse_failure, "checkpoint truncated");
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= uint32_t(uint8_t(buf[pos + i])) << (8 * i);
    pos += 4;
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= uint64_t(uint8_t(buf[pos + i])) << (8 * i);
    pos += 8;
    return v;
  }
  double f64() {
    uint64_t bits = u64();
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
  }
};

inline std::string join_doubles(const std::vector<double>& xs) {
  std::string out;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) out.push_back(',');
    out += format_double(xs[i]);
  }
  return out;
}

inline std::vector<double> split_doubles(const std::string& text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  size_t start = 0;
  while (true) {
    size_t comma = text.find(',', start);
    const std::string piece =
        comma == std::string::npos ? text.substr(start)
                                   : text.substr(start, comma - start);
    out.push_back(parse_double(trim(piece)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace detail

struct TrainedModel {
  std::unique_ptr<Network> net;
  TrainHyper hyper;
  AdamState adam;
  std::vector<double> history;  // per-epoch mean training loss
};

inline std::string checkpoint_header(Network& net, const TrainHyper& hyper,
                                     const AdamState& adam,
                                     const std::vector<double>& history,
                                     size_t state_count) {
  const NetworkConfig& cfg = net.config();
  std::string h;
  h += std::string("topology: ") + topology_name(cfg.topology) + "\n";
  h += "branch_depth: " + std::to_string(cfg.branch_depth) + "\n";
  h += "filters_per_layer: " + std::to_string(cfg.filters_per_layer) + "\n";
  h += "kernel_len: " + std::to_string(cfg.kernel_len) + "\n";
  h += "input_len: " + std::to_string(cfg.input_len) + "\n";
  h += "learning_rate: " + format_double(hyper.learning_rate) + "\n";
  h += "beta1: " + format_double(hyper.beta1) + "\n";
  h += "beta2: " + format_double(hyper.beta2) + "\n";
  h += "eps: " + format_double(hyper.eps) + "\n";
  h += "epochs: " + std::to_string(hyper.epochs) + "\n";
  h += "batch_size: " + std::to_string(hyper.batch_size) + "\n";
  h += "seed: " + std::to_string(hyper.seed) + "\n";
  h += "param_count: " + std::to_string(net.param_count()) + "\n";
  h += "state_count: " + std::to_string(state_count) + "\n";
  h += "history_count: " + std::to_string(history.size()) + "\n";
  h += "means: " + detail::join_doubles(cfg.zero_center_means) + "\n";
  h += "history: " + detail::join_doubles(history) + "\n";
  (void)adam;
  return h;
}

inline void save_checkpoint(const std::string& path, Network& net,
                            const TrainHyper& hyper, const AdamState& adam,
                            const std::vector<double>& history) {
  auto params = net.params();
  auto state = net.state();
  size_t state_count = 0;
  for (auto* s : state) state_count += s->size();
  if (adam.m.size() != params.size() || adam.v.size() != params.size())
    raise(ErrorKind::count_mismatch, "adam state does not match network");

  const std::string header =
      checkpoint_header(net, hyper, adam, history, state_count);
  std::string out;
  out.append(kCheckpointMagic, 4);
  detail::put_u32(out, kCheckpointVersion);
  detail::put_u64(out, header.size());
  out += header;
  for (auto* p : params)
    for (double v : p->value) detail::put_f64(out, v);
  for (const auto& m : adam.m)
    for (double v : m) detail::put_f64(out, v);
  for (const auto& m : adam.v)
    for (double v : m) detail::put_f64(out, v);
  detail::put_u64(out, adam.step);
  for (auto* s : state)
    for (double v : *s) detail::put_f64(out, v);
  write_text_file(path, out);
}

inline TrainedModel load_checkpoint(const std::string& path) {
  if (!std::filesystem::exists(path))
    raise(ErrorKind::missing_checkpoint, "checkpoint '" + path + "' not found");
  const std::string buf = read_text_file(path);
  detail::ByteReader rd{buf};
  rd.need(4);
  if (std::memcmp(buf.data(), kCheckpointMagic, 4) != 0)
    raise(ErrorKind::bad_magic, "not a checkpoint file: '" + path + "'");
  rd.pos = 4;
  const uint32_t version = rd.u32();
  if (version != kCheckpointVersion)
    raise(ErrorKind::version_mismatch,
          "checkpoint version " + std::to_string(version) + ", expected " +
              std::to_string(kCheckpointVersion));
  const uint64_t header_len = rd.u64();
  rd.need(header_len);
  const std::string header = buf.substr(rd.pos, header_len);
  rd.pos += header_len;

  std::map<std::string, std::string> kv;
  size_t start = 0;
  while (start < header.size()) {
    size_t eol = header.find('\n', start);
    if (eol == std::string::npos) eol = header.size();
    const std::string line = header.substr(start, eol - start);
    start = eol + 1;
    if (trim(line).empty()) continue;
    const size_t colon = line.find(':');
    if (colon == std::string::npos)
      raise(ErrorKind::parse_failure, "malformed checkpoint header line");
    kv[std::string(trim(line.substr(0, colon)))] =
        std::string(trim(line.substr(colon + 1)));
  }
  auto field = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end())
      raise(ErrorKind::parse_failure,
            std::string("checkpoint header missing '") + key + "'");
    return it->second;
  };

  NetworkConfig cfg;
  cfg.topology = topology_from_name(field("topology"));
  cfg.branch_depth = parse_u64(field("branch_depth"));
  cfg.filters_per_layer = parse_u64(field("filters_per_layer"));
  cfg.kernel_len = parse_u64(field("kernel_len"));
  cfg.input_len = parse_u64(field("input_len"));
  cfg.zero_center_means = detail::split_doubles(field("means"));

  TrainedModel model;
  model.hyper.learning_rate = parse_double(field("learning_rate"));
  model.hyper.beta1 = parse_double(field("beta1"));
  model.hyper.beta2 = parse_double(field("beta2"));
  model.hyper.eps = parse_double(field("eps"));
  model.hyper.epochs = parse_u64(field("epochs"));
  model.hyper.batch_size = parse_u64(field("batch_size"));
  model.hyper.seed = parse_u64(field("seed"));
  model.history = detail::split_doubles(field("history"));
  if (model.history.size() != parse_u64(field("history_count")))
    raise(ErrorKind::count_mismatch, "history length disagrees with header");

  model.net = std::make_unique<Network>(cfg);
  auto params = model.net->params();
  size_t param_count = 0;
  for (auto* p : params) param_count += p->value.size();
  if (param_count != parse_u64(field("param_count")))
    raise(ErrorKind::count_mismatch,
          "parameter count disagrees with rebuilt network");
  auto state = model.net->state();
  size_t state_count = 0;
  for (auto* s : state) state_count += s->size();
  if (state_count != parse_u64(field("state_count")))
    raise(ErrorKind::count_mismatch,
          "running-stat count disagrees with rebuilt network");

  auto read_block = [&](std::vector<double>& dst, size_t n) {
    dst.resize(n);
    for (size_t i = 0; i < n; ++i) {
      dst[i] = rd.f64();
      if (!std::isfinite(dst[i]))
        raise(ErrorKind::parse_failure, "non-finite value in checkpoint");
    }
  };
  for (auto* p : params) read_block(p->value, p->value.size());
  model.adam.m.resize(params.size());
  model.adam.v.resize(params.size());
  for (size_t i = 0; i < params.size(); ++i)
    read_block(model.adam.m[i], params[i]->value.size());
  for (size_t i = 0; i < params.size(); ++i)
    read_block(model.adam.v[i], params[i]->value.size());
  model.adam.step = rd.u64();
  for (auto* s : state) read_block(*s, s->size());
  if (rd.pos != buf.size())
    raise(ErrorKind::parse_failure, "trailing bytes in checkpoint");
  return model;
}

}  // namespace rsdn
