#pragma once

#include <string>
#include <vector>

#include "chemception/net.hpp"

namespace chemception {

struct CheckpointData {
  NetSpec spec;
  TrainMeta meta;
  std::vector<float> params;
};

// Versioned little-endian binary: magic, format version, NetSpec, training
// metadata, then the float32 parameter vector. Round-trips bit-exactly.
void save_checkpoint(const CheckpointData& ckpt, const std::string& path);
CheckpointData load_checkpoint(const std::string& path);

template <typename T>
CheckpointData make_checkpoint(const Network<T>& net) {
  CheckpointData out;
  out.spec = net.spec;
  out.meta = net.meta;
  auto flat = net.flatten_params();
  out.params.assign(flat.begin(), flat.end());
  return out;
}

template <typename T>
void apply_checkpoint(Network<T>& net, const CheckpointData& ckpt) {
  if (!(ckpt.spec == net.spec))
    throw VersionMismatch("checkpoint spec does not match the network spec");
  std::vector<T> flat(ckpt.params.begin(), ckpt.params.end());
  net.load_flat_params(flat);
  net.meta = ckpt.meta;
}

template <typename T>
void save_checkpoint(const Network<T>& net, const std::string& path) {
  save_checkpoint(make_checkpoint(net), path);
}

template <typename T>
void load_checkpoint(Network<T>& net, const std::string& path) {
  apply_checkpoint(net, load_checkpoint(path));
}

}  // namespace chemception
