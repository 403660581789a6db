#ifndef EBGAN_CONFIG_HPP
#define EBGAN_CONFIG_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ebgan/losses.hpp"
#include "ebgan/types.hpp"

namespace ebgan {

struct SyntheticSpec {
  std::uint64_t seed = 11;
  long count = 4000;
};

struct CelebaSpec {
  std::string image_dir;
  std::string attr_file;
  std::string partition_file;  // empty: contiguous split by counts
  bool horizontal_flip = false;
};

struct DatasetConfig {
  std::string source = "synthetic";  // "synthetic" | "celeba"
  long resolution = 64;
  std::vector<std::string> attributes{"mustache", "eyeglasses"};
  SyntheticSpec synthetic;
  CelebaSpec celeba;
  std::array<long, 3> split{3600, 200, 200};  // train/val/test counts
  std::vector<std::string> region_rotation{"mouth", "eyes", "components", "face"};
  bool prefetch = true;
  bool include_val_in_train = true;
};

struct EncoderConfig {
  long depth = 4;
  long base_width = 8;
  long max_width = 64;
  long out_channels = 32;
};

struct ModelConfig {
  EncoderConfig encoder;            // exemplar encoder (RGB + mask input)
  long block_channels = 16;         // channels per attribute block
  EncoderConfig generator_encoder;  // source-context encoder
  bool generator_mask_plane = false;
  long decoder_base_width = 64;
  long decoder_min_width = 8;
  long adversary_base_width = 8;
  long adversary_max_width = 64;
  long adversary_stages = 6;
};

struct OptimConfig {
  double learning_rate = 1e-4;
  long batch_size = 32;
  long total_steps = 2000;
  double beta1 = 0.5;
  double beta2 = 0.999;
  long checkpoint_every = 500;
};

struct RunConfig {
  Variant variant = Variant::kAttEbgan;
  std::uint64_t seed = 7;
  std::string output_dir = "runs/out";
  DatasetConfig dataset;
  ModelConfig model;
  OptimConfig optim;
  LossWeights weights;
  bool deterministic = true;
  bool literal_adv_g = false;

  long n_attributes() const { return static_cast<long>(dataset.attributes.size()); }
  void validate() const;
};

RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json run_config_to_json(const RunConfig& config);
RunConfig load_run_config(const std::filesystem::path& path);

// Canonical serialization of every field that determines parameter shapes;
// two configs with equal fingerprints build interchangeable networks.
std::string architecture_json(const RunConfig& config);
std::uint64_t architecture_fingerprint(const RunConfig& config);

// Human-readable summary of which architecture fields differ (empty when the
// fingerprints agree).
std::string architecture_diff(const RunConfig& ours, const RunConfig& theirs);

}  // namespace ebgan

#endif
