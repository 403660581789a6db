#ifndef EBGAN_NETS_HPP
#define EBGAN_NETS_HPP

#include <array>
#include <vector>

#include <torch/torch.h>

namespace ebgan {

// Channel-wise feature normalization at every spatial location. Unlike
// batch/instance norms it mixes nothing across positions or batch entries,
// which keeps every output strictly local to its receptive field.
class PixelNormImpl : public torch::nn::Module {
 public:
  torch::Tensor forward(const torch::Tensor& x);
};
TORCH_MODULE(PixelNorm);

struct EncoderSpec {
  long in_channels = 4;  // RGB plus the mask plane
  long base_width = 32;
  long max_width = 256;
  long depth = 4;
  long out_channels = 64;
};

// Shared downsampling topology of the exemplar and generator encoders:
// `depth` stride-2 3x3 stages with doubling widths, then a stride-1 3x3
// projection to out_channels, pixel-normalized.
class DownsamplerImpl : public torch::nn::Module {
 public:
  explicit DownsamplerImpl(const EncoderSpec& spec);

  torch::Tensor forward(const torch::Tensor& x);

  // (kernel, stride, padding) of every convolution, in forward order.
  std::vector<std::array<long, 3>> stage_geometry() const { return geometry_; }
  const EncoderSpec& spec() const { return spec_; }

 private:
  EncoderSpec spec_;
  torch::nn::Sequential trunk_;
  std::vector<std::array<long, 3>> geometry_;
};
TORCH_MODULE(Downsampler);

// Exemplar encoder: code = E(image, mask). The mask is appended as a fourth
// input plane so the encoder knows which region it is describing.
class ExemplarEncoderImpl : public torch::nn::Module {
 public:
  explicit ExemplarEncoderImpl(const EncoderSpec& spec);

  torch::Tensor forward(const torch::Tensor& images, const torch::Tensor& mask);

  std::vector<std::array<long, 3>> stage_geometry() const {
    return net_->stage_geometry();
  }
  const EncoderSpec& spec() const { return net_->spec(); }

 private:
  Downsampler net_;
};
TORCH_MODULE(ExemplarEncoder);

// Source-context encoder: code = G_enc(corrupted). The hole is marked by its
// zeros; a mask plane is optional (spec.in_channels 4) and off by default.
class GeneratorEncoderImpl : public torch::nn::Module {
 public:
  explicit GeneratorEncoderImpl(const EncoderSpec& spec);

  torch::Tensor forward(const torch::Tensor& corrupted);
  torch::Tensor forward(const torch::Tensor& corrupted, const torch::Tensor& mask);

  const EncoderSpec& spec() const { return net_->spec(); }

 private:
  Downsampler net_;
};
TORCH_MODULE(GeneratorEncoder);

struct DecoderSpec {
  long in_channels = 128;  // concatenated source + conditioning code
  long base_width = 128;   // width at the deepest stage, halved per stage
  long depth = 4;
  long min_width = 8;
};

// Decoder: nearest-neighbor x2 upsampling plus 3x3 convolutions per stage,
// tanh head, so the output is a full-resolution image in [-1,1].
class GeneratorDecoderImpl : public torch::nn::Module {
 public:
  explicit GeneratorDecoderImpl(const DecoderSpec& spec);

  torch::Tensor forward(const torch::Tensor& code);

  const DecoderSpec& spec() const { return spec_; }

 private:
  DecoderSpec spec_;
  torch::nn::Sequential trunk_;
};
TORCH_MODULE(GeneratorDecoder);

struct AdversarySpec {
  long resolution = 128;  // must be divisible by 2^stages
  long base_width = 64;
  long max_width = 512;
  long stages = 6;
  long heads = 1;  // 1 for the discriminator, n for the classifier
};

// Six stride-2 convolutions, a fully connected head, sigmoid outputs. The
// head starts at exactly zero so an untrained network answers 0.5.
class ConvProbeImpl : public torch::nn::Module {
 public:
  explicit ConvProbeImpl(const AdversarySpec& spec);

  // (B,heads) probabilities in (0,1).
  torch::Tensor forward(const torch::Tensor& images);

  const AdversarySpec& spec() const { return spec_; }

 private:
  AdversarySpec spec_;
  torch::nn::Sequential trunk_;
  torch::nn::Linear head_{nullptr};
};
TORCH_MODULE(ConvProbe);

// The discriminator is a one-head probe over composed/real images; the
// attribute classifier is the same topology with an n-way head.
using Discriminator = ConvProbe;
using AttributeClassifier = ConvProbe;

// Z = E(images, mask): the exemplar code.
torch::Tensor encode(ExemplarEncoder& encoder, const torch::Tensor& images,
                     const torch::Tensor& mask);

// Z_A = G_enc(corrupted): the source-context code.
torch::Tensor g_encode(GeneratorEncoder& encoder, const torch::Tensor& corrupted);

// A_b = G_dec(cat(Z_A, Z_cond)): source code first, conditioning second.
torch::Tensor g_decode(GeneratorDecoder& decoder, const torch::Tensor& z_source,
                       const torch::Tensor& z_cond);

// Real/fake probability per batch element, shape (B,).
torch::Tensor discriminate(Discriminator& discriminator, const torch::Tensor& images);

// Per-attribute presence probabilities, shape (B,n).
torch::Tensor classify(AttributeClassifier& classifier, const torch::Tensor& images);

// DCGAN-style init for every convolution: weights ~ N(0, 0.02), zero biases.
// Linear heads are zeroed separately by ConvProbeImpl.
void init_conv_weights(torch::nn::Module& module);

}  // namespace ebgan

#endif
