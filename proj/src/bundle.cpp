#include "ebgan/bundle.hpp"

#include <torch/torch.h>

namespace ebgan {
namespace {

EncoderSpec encoder_spec(const EncoderConfig& cfg, long in_channels) {
  EncoderSpec spec;
  spec.in_channels = in_channels;
  spec.base_width = cfg.base_width;
  spec.max_width = cfg.max_width;
  spec.depth = cfg.depth;
  spec.out_channels = cfg.out_channels;
  return spec;
}

void append_parameters(const torch::nn::Module& module, const std::string& net,
                       std::vector<ParameterInfo>& out) {
  for (const auto& item : module.named_parameters()) {
    ParameterInfo info;
    info.name = net + "." + item.key();
    const auto sizes = item.value().sizes();
    info.shape.assign(sizes.begin(), sizes.end());
    out.push_back(std::move(info));
  }
}

}  // namespace

void ModelBundle::train(bool on) {
  encoder->train(on);
  g_encoder->train(on);
  g_decoder->train(on);
  discriminator->train(on);
  if (has_classifier()) classifier->train(on);
}

ModelBundle build_bundle(const RunConfig& config) {
  config.validate();
  torch::manual_seed(config.seed);

  ModelBundle bundle;
  bundle.config = config;

  bundle.encoder = ExemplarEncoder(encoder_spec(config.model.encoder, 4));
  bundle.g_encoder = GeneratorEncoder(encoder_spec(
      config.model.generator_encoder, config.model.generator_mask_plane ? 4 : 3));

  DecoderSpec dec;
  dec.in_channels =
      config.model.generator_encoder.out_channels + config.model.encoder.out_channels;
  dec.base_width = config.model.decoder_base_width;
  dec.depth = config.model.generator_encoder.depth;
  dec.min_width = config.model.decoder_min_width;
  bundle.g_decoder = GeneratorDecoder(dec);

  AdversarySpec adv;
  adv.resolution = config.dataset.resolution;
  adv.base_width = config.model.adversary_base_width;
  adv.max_width = config.model.adversary_max_width;
  adv.stages = config.model.adversary_stages;
  adv.heads = 1;
  bundle.discriminator = Discriminator(adv);

  if (config.variant == Variant::kAttEbgan) {
    AdversarySpec cls = adv;
    cls.heads = config.n_attributes();
    bundle.classifier = AttributeClassifier(cls);
  }
  return bundle;
}

std::vector<ParameterInfo> parameter_inventory(const ModelBundle& bundle) {
  std::vector<ParameterInfo> out;
  append_parameters(*bundle.encoder, "encoder", out);
  append_parameters(*bundle.g_encoder, "g_encoder", out);
  append_parameters(*bundle.g_decoder, "g_decoder", out);
  append_parameters(*bundle.discriminator, "discriminator", out);
  if (bundle.has_classifier()) append_parameters(*bundle.classifier, "classifier", out);
  return out;
}

}  // namespace ebgan
