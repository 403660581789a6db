#include "ebgan/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "ebgan/data.hpp"
#include "ebgan/errors.hpp"

namespace ebgan {
namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& section,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) {
    throw ConfigError("config section '" + section + "' must be an object");
  }
  const std::set<std::string> known(allowed.begin(), allowed.end());
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) {
      throw ConfigError("unknown key '" + item.key() + "' in config section '" +
                        section + "'");
    }
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

EncoderConfig encoder_from_json(const json& j, const std::string& section,
                                EncoderConfig defaults) {
  check_keys(j, section, {"depth", "base_width", "max_width", "out_channels"});
  EncoderConfig cfg = defaults;
  cfg.depth = get_or<long>(j, "depth", cfg.depth);
  cfg.base_width = get_or<long>(j, "base_width", cfg.base_width);
  cfg.max_width = get_or<long>(j, "max_width", cfg.max_width);
  cfg.out_channels = get_or<long>(j, "out_channels", cfg.out_channels);
  return cfg;
}

json encoder_to_json(const EncoderConfig& cfg) {
  return json{{"depth", cfg.depth},
              {"base_width", cfg.base_width},
              {"max_width", cfg.max_width},
              {"out_channels", cfg.out_channels}};
}

DatasetConfig dataset_from_json(const json& j) {
  check_keys(j, "dataset",
             {"source", "resolution", "attributes", "synthetic", "celeba",
              "split", "region_rotation", "prefetch", "include_val_in_train"});
  DatasetConfig cfg;
  cfg.source = get_or<std::string>(j, "source", cfg.source);
  cfg.resolution = get_or<long>(j, "resolution", cfg.resolution);
  cfg.attributes = get_or<std::vector<std::string>>(j, "attributes", cfg.attributes);
  if (j.contains("synthetic")) {
    const json& s = j.at("synthetic");
    check_keys(s, "dataset.synthetic", {"seed", "count"});
    cfg.synthetic.seed = get_or<std::uint64_t>(s, "seed", cfg.synthetic.seed);
    cfg.synthetic.count = get_or<long>(s, "count", cfg.synthetic.count);
  }
  if (j.contains("celeba")) {
    const json& c = j.at("celeba");
    check_keys(c, "dataset.celeba",
               {"image_dir", "attr_file", "partition_file", "horizontal_flip"});
    cfg.celeba.image_dir = get_or<std::string>(c, "image_dir", "");
    cfg.celeba.attr_file = get_or<std::string>(c, "attr_file", "");
    cfg.celeba.partition_file = get_or<std::string>(c, "partition_file", "");
    cfg.celeba.horizontal_flip = get_or<bool>(c, "horizontal_flip", false);
  }
  if (j.contains("split")) {
    const auto counts = j.at("split").get<std::vector<long>>();
    if (counts.size() != 3) {
      throw ConfigError("dataset.split must list exactly train/val/test counts");
    }
    cfg.split = {counts[0], counts[1], counts[2]};
  }
  cfg.region_rotation = get_or<std::vector<std::string>>(j, "region_rotation",
                                                         cfg.region_rotation);
  cfg.prefetch = get_or<bool>(j, "prefetch", cfg.prefetch);
  cfg.include_val_in_train =
      get_or<bool>(j, "include_val_in_train", cfg.include_val_in_train);
  return cfg;
}

ModelConfig model_from_json(const json& j) {
  check_keys(j, "model",
             {"encoder", "block_channels", "generator_encoder",
              "generator_mask_plane", "decoder_base_width", "decoder_min_width",
              "adversary_base_width", "adversary_max_width", "adversary_stages"});
  ModelConfig cfg;
  if (j.contains("encoder")) {
    cfg.encoder = encoder_from_json(j.at("encoder"), "model.encoder", cfg.encoder);
  }
  cfg.block_channels = get_or<long>(j, "block_channels", cfg.block_channels);
  if (j.contains("generator_encoder")) {
    cfg.generator_encoder = encoder_from_json(
        j.at("generator_encoder"), "model.generator_encoder", cfg.generator_encoder);
  }
  cfg.generator_mask_plane =
      get_or<bool>(j, "generator_mask_plane", cfg.generator_mask_plane);
  cfg.decoder_base_width = get_or<long>(j, "decoder_base_width", cfg.decoder_base_width);
  cfg.decoder_min_width = get_or<long>(j, "decoder_min_width", cfg.decoder_min_width);
  cfg.adversary_base_width =
      get_or<long>(j, "adversary_base_width", cfg.adversary_base_width);
  cfg.adversary_max_width =
      get_or<long>(j, "adversary_max_width", cfg.adversary_max_width);
  cfg.adversary_stages = get_or<long>(j, "adversary_stages", cfg.adversary_stages);
  return cfg;
}

OptimConfig optim_from_json(const json& j) {
  check_keys(j, "optim",
             {"learning_rate", "batch_size", "total_steps", "beta1", "beta2",
              "checkpoint_every"});
  OptimConfig cfg;
  cfg.learning_rate = get_or<double>(j, "learning_rate", cfg.learning_rate);
  cfg.batch_size = get_or<long>(j, "batch_size", cfg.batch_size);
  cfg.total_steps = get_or<long>(j, "total_steps", cfg.total_steps);
  cfg.beta1 = get_or<double>(j, "beta1", cfg.beta1);
  cfg.beta2 = get_or<double>(j, "beta2", cfg.beta2);
  cfg.checkpoint_every = get_or<long>(j, "checkpoint_every", cfg.checkpoint_every);
  return cfg;
}

LossWeights weights_from_json(const json& j) {
  check_keys(j, "loss_weights", {"rec", "cyc", "cls"});
  LossWeights w;
  w.lambda_rec = get_or<double>(j, "rec", w.lambda_rec);
  w.lambda_cyc = get_or<double>(j, "cyc", w.lambda_cyc);
  w.lambda_g = get_or<double>(j, "cls", w.lambda_g);
  return w;
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 1099511628211ull;
  }
  return hash;
}

json architecture_fields(const RunConfig& c) {
  // nlohmann keeps object keys sorted, so dump() is canonical.
  return json{
      {"variant", to_string(c.variant)},
      {"resolution", c.dataset.resolution},
      {"n_attributes", c.n_attributes()},
      {"encoder", encoder_to_json(c.model.encoder)},
      {"block_channels", c.model.block_channels},
      {"generator_encoder", encoder_to_json(c.model.generator_encoder)},
      {"generator_mask_plane", c.model.generator_mask_plane},
      {"decoder_base_width", c.model.decoder_base_width},
      {"decoder_min_width", c.model.decoder_min_width},
      {"adversary_base_width", c.model.adversary_base_width},
      {"adversary_max_width", c.model.adversary_max_width},
      {"adversary_stages", c.model.adversary_stages},
  };
}

void flatten(const json& j, const std::string& prefix,
             std::map<std::string, std::string>& out) {
  if (j.is_object()) {
    for (const auto& item : j.items()) {
      flatten(item.value(), prefix.empty() ? item.key() : prefix + "." + item.key(),
              out);
    }
  } else {
    out[prefix] = j.dump();
  }
}

}  // namespace

void RunConfig::validate() const {
  const long n = n_attributes();
  const long res = dataset.resolution;
  if (dataset.source != "synthetic" && dataset.source != "celeba") {
    throw ConfigError("dataset.source must be 'synthetic' or 'celeba'");
  }
  if (n < 1) throw ConfigError("dataset.attributes must name at least one attribute");
  if (dataset.source == "synthetic" && n > kMaxSyntheticAttributes) {
    throw ConfigError("synthetic dataset supports at most " +
                      std::to_string(kMaxSyntheticAttributes) + " attributes");
  }
  if (res < 32) throw ConfigError("dataset.resolution must be at least 32");
  for (const auto* enc : {&model.encoder, &model.generator_encoder}) {
    if (enc->depth < 1 || enc->base_width < 1 || enc->max_width < enc->base_width ||
        enc->out_channels < 1) {
      throw ConfigError("encoder widths/depth must be positive and max >= base");
    }
    if (res % (1L << enc->depth) != 0 || (res >> enc->depth) < 4) {
      throw ConfigError("resolution must be divisible by 2^depth with a code grid "
                        "of at least 4x4");
    }
  }
  if (model.encoder.depth != model.generator_encoder.depth) {
    throw ConfigError("encoder and generator_encoder depths must match so their "
                      "code grids align");
  }
  if (model.block_channels < 1) throw ConfigError("block_channels must be positive");
  if (variant == Variant::kAttEbgan &&
      model.encoder.out_channels != n * model.block_channels) {
    throw ConfigError("encoder out_channels must equal n_attributes * block_channels");
  }
  if (model.decoder_base_width < model.decoder_min_width || model.decoder_min_width < 1) {
    throw ConfigError("decoder widths must be positive and base >= min");
  }
  if (model.adversary_stages < 1 ||
      model.adversary_base_width < 1 ||
      model.adversary_max_width < model.adversary_base_width) {
    throw ConfigError("adversary widths/stages must be positive and max >= base");
  }
  if (res % (1L << model.adversary_stages) != 0) {
    throw ConfigError("resolution must be divisible by 2^adversary_stages");
  }
  if (optim.learning_rate <= 0) throw ConfigError("learning_rate must be positive");
  if (optim.batch_size < 2) {
    throw ConfigError("batch_size must be at least 2 so exemplars can be deranged");
  }
  if (optim.total_steps < 1) throw ConfigError("total_steps must be positive");
  if (optim.beta1 < 0 || optim.beta1 >= 1 || optim.beta2 < 0 || optim.beta2 >= 1) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (optim.checkpoint_every < 1) throw ConfigError("checkpoint_every must be positive");
  weights.validate();
  if (dataset.split[0] < 1 || dataset.split[1] < 0 || dataset.split[2] < 0) {
    throw ConfigError("split counts must be non-negative with a non-empty train set");
  }
  if (dataset.source == "synthetic" &&
      dataset.split[0] + dataset.split[1] + dataset.split[2] > dataset.synthetic.count) {
    throw ConfigError("split counts exceed the synthetic dataset size");
  }
  if (dataset.region_rotation.empty()) {
    throw ConfigError("region_rotation must name at least one region");
  }
  const auto presets = default_region_presets(res);
  for (const auto& name : dataset.region_rotation) {
    if (!presets.count(name)) {
      throw ConfigError("region_rotation names unknown preset '" + name + "'");
    }
  }
  if (dataset.source == "celeba") {
    if (dataset.celeba.image_dir.empty() || dataset.celeba.attr_file.empty()) {
      throw ConfigError("celeba dataset requires image_dir and attr_file");
    }
  }
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

RunConfig run_config_from_json(const json& j) {
  check_keys(j, "<root>",
             {"variant", "seed", "output_dir", "dataset", "model", "optim",
              "loss_weights", "deterministic", "literal_adv_g"});
  RunConfig cfg;
  if (j.contains("variant")) {
    cfg.variant = variant_from_string(j.at("variant").get<std::string>());
  }
  cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);
  cfg.output_dir = get_or<std::string>(j, "output_dir", cfg.output_dir);
  if (j.contains("dataset")) cfg.dataset = dataset_from_json(j.at("dataset"));
  if (j.contains("model")) cfg.model = model_from_json(j.at("model"));
  if (j.contains("optim")) cfg.optim = optim_from_json(j.at("optim"));
  if (j.contains("loss_weights")) cfg.weights = weights_from_json(j.at("loss_weights"));
  cfg.deterministic = get_or<bool>(j, "deterministic", cfg.deterministic);
  cfg.literal_adv_g = get_or<bool>(j, "literal_adv_g", cfg.literal_adv_g);
  return cfg;
}

json run_config_to_json(const RunConfig& c) {
  return json{
      {"variant", to_string(c.variant)},
      {"seed", c.seed},
      {"output_dir", c.output_dir},
      {"dataset",
       {{"source", c.dataset.source},
        {"resolution", c.dataset.resolution},
        {"attributes", c.dataset.attributes},
        {"synthetic", {{"seed", c.dataset.synthetic.seed}, {"count", c.dataset.synthetic.count}}},
        {"celeba",
         {{"image_dir", c.dataset.celeba.image_dir},
          {"attr_file", c.dataset.celeba.attr_file},
          {"partition_file", c.dataset.celeba.partition_file},
          {"horizontal_flip", c.dataset.celeba.horizontal_flip}}},
        {"split", {c.dataset.split[0], c.dataset.split[1], c.dataset.split[2]}},
        {"region_rotation", c.dataset.region_rotation},
        {"prefetch", c.dataset.prefetch},
        {"include_val_in_train", c.dataset.include_val_in_train}}},
      {"model",
       {{"encoder", encoder_to_json(c.model.encoder)},
        {"block_channels", c.model.block_channels},
        {"generator_encoder", encoder_to_json(c.model.generator_encoder)},
        {"generator_mask_plane", c.model.generator_mask_plane},
        {"decoder_base_width", c.model.decoder_base_width},
        {"decoder_min_width", c.model.decoder_min_width},
        {"adversary_base_width", c.model.adversary_base_width},
        {"adversary_max_width", c.model.adversary_max_width},
        {"adversary_stages", c.model.adversary_stages}}},
      {"optim",
       {{"learning_rate", c.optim.learning_rate},
        {"batch_size", c.optim.batch_size},
        {"total_steps", c.optim.total_steps},
        {"beta1", c.optim.beta1},
        {"beta2", c.optim.beta2},
        {"checkpoint_every", c.optim.checkpoint_every}}},
      {"loss_weights",
       {{"rec", c.weights.lambda_rec}, {"cyc", c.weights.lambda_cyc}, {"cls", c.weights.lambda_g}}},
      {"deterministic", c.deterministic},
      {"literal_adv_g", c.literal_adv_g},
  };
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError("config is not valid JSON: " + std::string(e.what()));
  }
  RunConfig cfg = run_config_from_json(j);
  cfg.validate();
  return cfg;
}

std::string architecture_json(const RunConfig& config) {
  return architecture_fields(config).dump();
}

std::uint64_t architecture_fingerprint(const RunConfig& config) {
  return fnv1a64(architecture_json(config));
}

std::string architecture_diff(const RunConfig& ours, const RunConfig& theirs) {
  std::map<std::string, std::string> a, b;
  flatten(architecture_fields(ours), "", a);
  flatten(architecture_fields(theirs), "", b);
  std::ostringstream out;
  for (const auto& [key, value] : a) {
    const auto it = b.find(key);
    if (it != b.end() && it->second != value) {
      out << "  " << key << ": " << value << " vs " << it->second << "\n";
    }
  }
  return out.str();
}

}  // namespace ebgan
