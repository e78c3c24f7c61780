#include "chemception/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "chemception/errors.hpp"

namespace chemception {

namespace {

constexpr char kMagic[8] = {'C', 'C', 'N', 'N', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

template <typename V>
void put(std::ofstream& out, V v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(V));
}

template <typename V>
V get(std::ifstream& in, const std::string& path) {
  V v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(V));
  if (in.gcount() != sizeof(V)) throw IoError("truncated checkpoint '" + path + "'");
  return v;
}

}  // namespace

void save_checkpoint(const CheckpointData& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(kMagic, sizeof(kMagic));
  put(out, kVersion);
  put(out, static_cast<std::int32_t>(ckpt.spec.tier));
  put(out, static_cast<std::int32_t>(ckpt.spec.filters));
  put(out, static_cast<std::uint8_t>(ckpt.spec.head == Head::Classification ? 0 : 1));
  put(out, ckpt.spec.residual_scale);
  put(out, ckpt.meta.stage);
  put(out, ckpt.meta.epoch);
  put(out, ckpt.meta.best_val_loss);
  put(out, static_cast<std::uint64_t>(ckpt.params.size()));
  out.write(reinterpret_cast<const char*>(ckpt.params.data()),
            static_cast<std::streamsize>(ckpt.params.size() * sizeof(float)));
  if (!out) throw IoError("short write to '" + path + "'");
}

CheckpointData load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path + "'");
  char magic[8];
  in.read(magic, sizeof(magic));
  if (in.gcount() != sizeof(magic) || std::memcmp(magic, kMagic, 8) != 0)
    throw VersionMismatch("'" + path + "' is not a checkpoint file");
  auto version = get<std::uint32_t>(in, path);
  if (version != kVersion)
    throw VersionMismatch("unsupported checkpoint version " +
                          std::to_string(version));
  CheckpointData ckpt;
  ckpt.spec.tier = get<std::int32_t>(in, path);
  ckpt.spec.filters = get<std::int32_t>(in, path);
  ckpt.spec.head =
      get<std::uint8_t>(in, path) == 0 ? Head::Classification : Head::Regression;
  ckpt.spec.residual_scale = get<double>(in, path);
  ckpt.meta.stage = get<std::uint32_t>(in, path);
  ckpt.meta.epoch = get<std::uint32_t>(in, path);
  ckpt.meta.best_val_loss = get<double>(in, path);
  auto count = get<std::uint64_t>(in, path);
  validate(ckpt.spec);
  if (count != static_cast<std::uint64_t>(analytic_param_count(ckpt.spec)))
    throw VersionMismatch("checkpoint parameter count " + std::to_string(count) +
                          " does not match its own spec");
  ckpt.params.resize(count);
  in.read(reinterpret_cast<char*>(ckpt.params.data()),
          static_cast<std::streamsize>(count * sizeof(float)));
  if (in.gcount() != static_cast<std::streamsize>(count * sizeof(float)))
    throw IoError("truncated checkpoint '" + path + "'");
  return ckpt;
}

}  // namespace chemception
