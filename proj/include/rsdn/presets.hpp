#pragma once

#include <string>

#include "rsdn/error.hpp"
#include "rsdn/network.hpp"
#include "rsdn/train.hpp"

namespace rsdn {

struct Preset {
  NetworkConfig net;
  TrainHyper hyper;
};

// Small network that trains on a laptop CPU in minutes; the default
// everywhere. Learning rate and batch size were tuned for this depth on the
// 500-pair synthetic suite; all other fields are fixed by the preset.
inline Preset desk_preset(size_t input_len = 2051) {
  Preset p;
  p.net.topology = Topology::parallel;
  p.net.branch_depth = 3;
  p.net.filters_per_layer = 16;
  p.net.kernel_len = 15;
  p.net.input_len = input_len;
  p.hyper.learning_rate = 5e-4;
  p.hyper.epochs = 50;
  p.hyper.batch_size = 5;
  return p;
}

// Full-size configuration; expect hours on CPU.
inline Preset paper_preset(size_t input_len = 2051) {
  Preset p;
  p.net.topology = Topology::parallel;
  p.net.branch_depth = 7;
  p.net.filters_per_layer = 100;
  p.net.kernel_len = 100;
  p.net.input_len = input_len;
  p.hyper.learning_rate = 1e-4;
  p.hyper.epochs = 600;
  p.hyper.batch_size = 50;
  return p;
}

inline Preset preset_by_name(const std::string& name, size_t input_len) {
  if (name == "desk") return desk_preset(input_len);
  if (name == "paper") return paper_preset(input_len);
  raise(ErrorKind::invalid_config, "unknown preset '" + name + "'");
}

}  // namespace rsdn
