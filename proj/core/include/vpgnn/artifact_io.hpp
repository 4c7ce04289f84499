#pragma once

#include <optional>
#include <string>

#include "vpgnn/prompt.hpp"

namespace vpgnn {

// Fine-tuned artifact: the encoder/readout weights after tuning plus either
// the prompt matrix (prompt modes) or the classification head (no-prompt).
struct TunedArtifact {
  TuneMode mode = TuneMode::kVpgnnFull;
  ModelParams params;
  std::optional<PromptMatrix> prompt;
  std::optional<Dense> head;
};

// Little-endian binary, mirroring the model format:
//   magic "VPGT" | u32 version | u32 mode | u32 f | u32 d |
//   W1 | W2 | W_r | tail
// where tail is Z (2*d doubles) for prompt modes or the d*2 head for
// no-prompt mode.
void save_tuned_artifact(const TunedArtifact& artifact, const std::string& path);
TunedArtifact load_tuned_artifact(const std::string& path);

}  // namespace vpgnn
