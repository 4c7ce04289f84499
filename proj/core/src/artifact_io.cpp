#include "vpgnn/artifact_io.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace vpgnn {
namespace {

constexpr char kMagic[4] = {'V', 'P', 'G', 'T'};
constexpr std::uint32_t kVersion = 1;

void store_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    buf += static_cast<char>((v >> (8 * i)) & 0xFF);
  }
}

void store_dense(std::string& buf, const Dense& m) {
  for (double v : m.values) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof(bits));
    for (int i = 0; i < 8; ++i) {
      buf += static_cast<char>((bits >> (8 * i)) & 0xFF);
    }
  }
}

std::uint32_t read_u32(const std::string& data, std::size_t& pos,
                       const std::string& path) {
  if (pos + 4 > data.size()) {
    throw std::runtime_error(path + ": truncated artifact file");
  }
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data[pos++]))
         << (8 * i);
  }
  return v;
}

Dense read_dense(const std::string& data, std::size_t& pos, std::size_t rows,
                 std::size_t cols, const std::string& path) {
  if (pos + 8 * rows * cols > data.size()) {
    throw std::runtime_error(path + ": truncated artifact file");
  }
  Dense m(rows, cols);
  for (double& v : m.values) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(data[pos++]))
              << (8 * i);
    }
    std::memcpy(&v, &bits, sizeof(v));
  }
  return m;
}

}  // namespace

void save_tuned_artifact(const TunedArtifact& artifact, const std::string& path) {
  const bool is_head = artifact.mode == TuneMode::kNoPrompt;
  if (is_head && !artifact.head.has_value()) {
    throw std::invalid_argument("save_tuned_artifact: no-prompt artifact needs a head");
  }
  if (!is_head && !artifact.prompt.has_value()) {
    throw std::invalid_argument("save_tuned_artifact: prompt artifact needs Z");
  }
  std::string buf;
  buf.append(kMagic, 4);
  store_u32(buf, kVersion);
  store_u32(buf, static_cast<std::uint32_t>(artifact.mode));
  store_u32(buf, static_cast<std::uint32_t>(artifact.params.feature_dim()));
  store_u32(buf, static_cast<std::uint32_t>(artifact.params.hidden_dim()));
  store_dense(buf, artifact.params.w1);
  store_dense(buf, artifact.params.w2);
  store_dense(buf, artifact.params.w_r);
  if (is_head) {
    store_dense(buf, *artifact.head);
  } else {
    store_dense(buf, artifact.prompt->z);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

TunedArtifact load_tuned_artifact(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (data.size() < 4 || std::memcmp(data.data(), kMagic, 4) != 0) {
    throw std::runtime_error(path + ": not a tuned artifact file");
  }
  std::size_t pos = 4;
  const std::uint32_t version = read_u32(data, pos, path);
  if (version != kVersion) {
    throw std::runtime_error(path + ": unsupported artifact version");
  }
  const std::uint32_t mode_raw = read_u32(data, pos, path);
  if (mode_raw > static_cast<std::uint32_t>(TuneMode::kNoConstraint)) {
    throw std::runtime_error(path + ": bad mode tag");
  }
  TunedArtifact artifact;
  artifact.mode = static_cast<TuneMode>(mode_raw);
  const std::size_t f = read_u32(data, pos, path);
  const std::size_t d = read_u32(data, pos, path);
  if (f == 0 || d == 0) {
    throw std::runtime_error(path + ": invalid shape header");
  }
  artifact.params.w1 = read_dense(data, pos, f, d, path);
  artifact.params.w2 = read_dense(data, pos, d, d, path);
  artifact.params.w_r = read_dense(data, pos, d, d, path);
  if (artifact.mode == TuneMode::kNoPrompt) {
    artifact.head = read_dense(data, pos, d, kNumClasses, path);
  } else {
    artifact.prompt = PromptMatrix{read_dense(data, pos, kNumClasses, d, path)};
  }
  if (pos != data.size()) {
    throw std::runtime_error(path + ": trailing bytes after artifact payload");
  }
  return artifact;
}

}  // namespace vpgnn
