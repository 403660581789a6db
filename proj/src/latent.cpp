#include "ebgan/latent.hpp"

#include "ebgan/errors.hpp"

namespace ebgan {

namespace {

void check_partition(const LatentCode& code) {
  if (code.n_attributes < 1 || code.block_channels < 1) {
    throw ConfigError("code has no attribute-block layout");
  }
  if (code.channels() != code.n_attributes * code.block_channels) {
    throw ConfigError("code channels " + std::to_string(code.channels()) +
                      " != n * block_channels = " +
                      std::to_string(code.n_attributes) + " * " +
                      std::to_string(code.block_channels));
  }
}

}  // namespace

std::vector<torch::Tensor> partition_blocks(const LatentCode& code) {
  check_partition(code);
  const long channel_dim = code.data.dim() - 3;
  std::vector<torch::Tensor> blocks;
  blocks.reserve(static_cast<std::size_t>(code.n_attributes));
  for (long i = 0; i < code.n_attributes; ++i) {
    blocks.push_back(code.data.narrow(channel_dim, i * code.block_channels,
                                      code.block_channels));
  }
  return blocks;
}

LatentCode filter_by_labels(const LatentCode& code, const AttributeVector& labels) {
  check_partition(code);
  labels.validate();
  if (labels.size() != code.n_attributes) {
    throw ValidationError("label count " + std::to_string(labels.size()) +
                          " != code attribute count " +
                          std::to_string(code.n_attributes));
  }
  auto label_tensor = labels.to_tensor().to(code.data.dtype());
  if (code.data.dim() == 4) label_tensor = label_tensor.unsqueeze(0);
  return LatentCode{filter_by_labels(code.data.dim() == 4
                                         ? code.data
                                         : code.data.unsqueeze(0),
                                     label_tensor.dim() == 2 ? label_tensor
                                                             : label_tensor.unsqueeze(0),
                                     code.block_channels)
                        .reshape(code.data.sizes()),
                    code.n_attributes, code.block_channels};
}

torch::Tensor filter_by_labels(const torch::Tensor& code, const torch::Tensor& labels,
                               long block_channels) {
  if (code.dim() != 4 || labels.dim() != 2) {
    throw ValidationError("batched filter expects code (B,C,h,w) and labels (B,n)");
  }
  if (code.size(0) != labels.size(0)) {
    throw ValidationError("code and label batch sizes differ");
  }
  if (code.size(1) != labels.size(1) * block_channels) {
    throw ValidationError("code channels " + std::to_string(code.size(1)) +
                          " != n * block_channels = " + std::to_string(labels.size(1)) +
                          " * " + std::to_string(block_channels));
  }
  auto binary = (labels == 0) | (labels == 1);
  if (!binary.all().item<bool>()) {
    throw ValidationError("labels must be binary 0/1");
  }
  auto scale = labels.to(code.dtype())
                   .repeat_interleave(block_channels, 1)
                   .unsqueeze(-1)
                   .unsqueeze(-1);
  return code * scale;
}

}  // namespace ebgan
