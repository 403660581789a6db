#ifndef EBGAN_CHECKPOINT_HPP
#define EBGAN_CHECKPOINT_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <torch/torch.h>

#include "ebgan/bundle.hpp"

namespace ebgan {

// Single-file training snapshot: a JSON header (step, architecture
// fingerprint, full config) followed by one serialized blob per network and
// optimizer. Writes go to a temp file that is renamed into place, so a
// crash never leaves a truncated checkpoint under the final name.
struct CheckpointData {
  long step = 0;
  std::uint64_t fingerprint = 0;
  RunConfig config;
  std::map<std::string, std::string> sections;  // name -> serialized bytes
};

std::string serialize_module(const torch::nn::Module& module);
std::string serialize_optimizer(const torch::optim::Optimizer& optimizer);

// Network sections are written from the bundle ("encoder", "g_encoder",
// "g_decoder", "discriminator", and "classifier" when present); callers add
// optimizer sections through `extra_sections`.
void write_checkpoint(const std::filesystem::path& path, const ModelBundle& bundle,
                      long step,
                      const std::map<std::string, std::string>& extra_sections = {});

CheckpointData read_checkpoint(const std::filesystem::path& path);

void load_module(const CheckpointData& data, const std::string& name,
                 torch::nn::Module& module);
void load_optimizer(const CheckpointData& data, const std::string& name,
                    torch::optim::Optimizer& optimizer);

// Builds networks from the stored config and loads their weights.
ModelBundle restore_bundle(const CheckpointData& data);
ModelBundle load_bundle(const std::filesystem::path& path);

// Refuses (with a field-by-field diff) when `ours` would build different
// network shapes than the checkpoint was trained with.
void require_matching_architecture(const RunConfig& ours, const CheckpointData& data);

}  // namespace ebgan

#endif
