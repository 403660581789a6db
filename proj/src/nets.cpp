#include "ebgan/nets.hpp"

#include <algorithm>

#include "ebgan/errors.hpp"

namespace ebgan {

torch::Tensor PixelNormImpl::forward(const torch::Tensor& x) {
  return x * torch::rsqrt(x.pow(2).mean(1, /*keepdim=*/true) + 1e-8);
}

DownsamplerImpl::DownsamplerImpl(const EncoderSpec& spec) : spec_(spec) {
  if (spec_.depth < 1 || spec_.base_width < 1 || spec_.out_channels < 1) {
    throw ConfigError("encoder needs depth, base_width, out_channels >= 1");
  }
  long in = spec_.in_channels;
  long width = spec_.base_width;
  for (long stage = 0; stage < spec_.depth; ++stage) {
    trunk_->push_back(torch::nn::Conv2d(
        torch::nn::Conv2dOptions(in, width, 3).stride(2).padding(1)));
    trunk_->push_back(PixelNorm());
    trunk_->push_back(torch::nn::LeakyReLU(torch::nn::LeakyReLUOptions().negative_slope(0.2)));
    geometry_.push_back({3, 2, 1});
    in = width;
    width = std::min(width * 2, spec_.max_width);
  }
  trunk_->push_back(torch::nn::Conv2d(
      torch::nn::Conv2dOptions(in, spec_.out_channels, 3).stride(1).padding(1)));
  trunk_->push_back(PixelNorm());
  geometry_.push_back({3, 1, 1});
  register_module("trunk", trunk_);
  init_conv_weights(*this);
}

torch::Tensor DownsamplerImpl::forward(const torch::Tensor& x) {
  if (x.dim() != 4 || x.size(1) != spec_.in_channels) {
    throw ValidationError("encoder expects (B," + std::to_string(spec_.in_channels) +
                          ",H,W) input");
  }
  return trunk_->forward(x);
}

ExemplarEncoderImpl::ExemplarEncoderImpl(const EncoderSpec& spec) : net_(spec) {
  if (spec.in_channels != 4) {
    throw ConfigError("exemplar encoder input is RGB plus mask (4 channels)");
  }
  register_module("net", net_);
}

torch::Tensor ExemplarEncoderImpl::forward(const torch::Tensor& images,
                                           const torch::Tensor& mask) {
  if (images.dim() != 4 || images.size(1) != 3) {
    throw ValidationError("encode expects images (B,3,H,W)");
  }
  if (mask.dim() != 2 || mask.size(0) != images.size(2) || mask.size(1) != images.size(3)) {
    throw ValidationError("encode expects a (H,W) mask matching the images");
  }
  auto plane = mask.to(images.dtype())
                   .unsqueeze(0)
                   .unsqueeze(0)
                   .expand({images.size(0), 1, mask.size(0), mask.size(1)});
  return net_->forward(torch::cat({images, plane}, 1));
}

GeneratorEncoderImpl::GeneratorEncoderImpl(const EncoderSpec& spec) : net_(spec) {
  if (spec.in_channels != 3 && spec.in_channels != 4) {
    throw ConfigError("generator encoder input is RGB, optionally plus mask");
  }
  register_module("net", net_);
}

torch::Tensor GeneratorEncoderImpl::forward(const torch::Tensor& corrupted) {
  if (net_->spec().in_channels != 3) {
    throw ValidationError("this generator encoder was configured with a mask plane");
  }
  return net_->forward(corrupted);
}

torch::Tensor GeneratorEncoderImpl::forward(const torch::Tensor& corrupted,
                                            const torch::Tensor& mask) {
  if (net_->spec().in_channels != 4) {
    throw ValidationError("this generator encoder was configured without a mask plane");
  }
  auto plane = mask.to(corrupted.dtype())
                   .unsqueeze(0)
                   .unsqueeze(0)
                   .expand({corrupted.size(0), 1, mask.size(0), mask.size(1)});
  return net_->forward(torch::cat({corrupted, plane}, 1));
}

GeneratorDecoderImpl::GeneratorDecoderImpl(const DecoderSpec& spec) : spec_(spec) {
  if (spec_.depth < 1 || spec_.in_channels < 1) {
    throw ConfigError("decoder needs depth and in_channels >= 1");
  }
  long in = spec_.in_channels;
  long width = spec_.base_width;
  trunk_->push_back(torch::nn::Conv2d(torch::nn::Conv2dOptions(in, width, 3).padding(1)));
  trunk_->push_back(PixelNorm());
  trunk_->push_back(torch::nn::LeakyReLU(torch::nn::LeakyReLUOptions().negative_slope(0.2)));
  in = width;
  for (long stage = 0; stage < spec_.depth; ++stage) {
    width = std::max(in / 2, spec_.min_width);
    trunk_->push_back(torch::nn::Upsample(
        torch::nn::UpsampleOptions().scale_factor(std::vector<double>{2, 2}).mode(torch::kNearest)));
    trunk_->push_back(torch::nn::Conv2d(torch::nn::Conv2dOptions(in, width, 3).padding(1)));
    trunk_->push_back(PixelNorm());
    trunk_->push_back(torch::nn::LeakyReLU(torch::nn::LeakyReLUOptions().negative_slope(0.2)));
    in = width;
  }
  trunk_->push_back(torch::nn::Conv2d(torch::nn::Conv2dOptions(in, 3, 3).padding(1)));
  trunk_->push_back(torch::nn::Tanh());
  register_module("trunk", trunk_);
  init_conv_weights(*this);
}

torch::Tensor GeneratorDecoderImpl::forward(const torch::Tensor& code) {
  if (code.dim() != 4 || code.size(1) != spec_.in_channels) {
    throw ValidationError("decoder expects (B," + std::to_string(spec_.in_channels) +
                          ",h,w) codes");
  }
  return trunk_->forward(code);
}

ConvProbeImpl::ConvProbeImpl(const AdversarySpec& spec) : spec_(spec) {
  const long factor = 1L << spec_.stages;
  if (spec_.resolution % factor != 0) {
    throw ConfigError("resolution " + std::to_string(spec_.resolution) +
                      " is not divisible by 2^" + std::to_string(spec_.stages));
  }
  if (spec_.heads < 1) {
    throw ConfigError("probe needs at least one output head");
  }
  long in = 3;
  long width = spec_.base_width;
  for (long stage = 0; stage < spec_.stages; ++stage) {
    trunk_->push_back(torch::nn::Conv2d(
        torch::nn::Conv2dOptions(in, width, 4).stride(2).padding(1)));
    trunk_->push_back(torch::nn::LeakyReLU(torch::nn::LeakyReLUOptions().negative_slope(0.2)));
    in = width;
    width = std::min(width * 2, spec_.max_width);
  }
  register_module("trunk", trunk_);
  const long grid = spec_.resolution / factor;
  head_ = torch::nn::Linear(in * grid * grid, spec_.heads);
  register_module("head", head_);
  init_conv_weights(*this);
  torch::NoGradGuard no_grad;
  head_->weight.zero_();
  head_->bias.zero_();
}

torch::Tensor ConvProbeImpl::forward(const torch::Tensor& images) {
  if (images.dim() != 4 || images.size(1) != 3 || images.size(2) != spec_.resolution ||
      images.size(3) != spec_.resolution) {
    throw ValidationError("probe expects (B,3," + std::to_string(spec_.resolution) + "," +
                          std::to_string(spec_.resolution) + ") images");
  }
  auto features = trunk_->forward(images).flatten(1);
  return torch::sigmoid(head_->forward(features));
}

torch::Tensor encode(ExemplarEncoder& encoder, const torch::Tensor& images,
                     const torch::Tensor& mask) {
  return encoder->forward(images, mask);
}

torch::Tensor g_encode(GeneratorEncoder& encoder, const torch::Tensor& corrupted) {
  return encoder->forward(corrupted);
}

torch::Tensor g_decode(GeneratorDecoder& decoder, const torch::Tensor& z_source,
                       const torch::Tensor& z_cond) {
  if (z_source.dim() != 4 || z_cond.dim() != 4 ||
      z_source.size(0) != z_cond.size(0) || z_source.size(2) != z_cond.size(2) ||
      z_source.size(3) != z_cond.size(3)) {
    throw ValidationError("decoder inputs must share batch and spatial shape");
  }
  return decoder->forward(torch::cat({z_source, z_cond}, 1));
}

torch::Tensor discriminate(Discriminator& discriminator, const torch::Tensor& images) {
  if (discriminator->spec().heads != 1) {
    throw ValidationError("discriminator must have a single head");
  }
  return discriminator->forward(images).squeeze(1);
}

torch::Tensor classify(AttributeClassifier& classifier, const torch::Tensor& images) {
  return classifier->forward(images);
}

void init_conv_weights(torch::nn::Module& module) {
  torch::NoGradGuard no_grad;
  for (auto& child : module.modules(/*include_self=*/false)) {
    if (auto* conv = child->as<torch::nn::Conv2d>()) {
      conv->weight.normal_(0.0, 0.02);
      if (conv->options.bias()) conv->bias.zero_();
    }
  }
}

}  // namespace ebgan
