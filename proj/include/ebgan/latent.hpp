#ifndef EBGAN_LATENT_HPP
#define EBGAN_LATENT_HPP

#include <vector>

#include <torch/torch.h>

#include "ebgan/types.hpp"

namespace ebgan {

// Exemplar code with its attribute-block layout. `data` is (C,h,w) or
// batched (B,C,h,w); the attribute-conditioned variant requires
// C = n_attributes * block_channels, the unconditional variant treats C as
// opaque (n_attributes 0 marks an unpartitioned code).
struct LatentCode {
  torch::Tensor data;
  long n_attributes = 0;
  long block_channels = 0;

  long channels() const { return data.size(data.dim() - 3); }
};

// Splits the code into n contiguous channel blocks of block_channels each;
// views, so concatenating them along the channel dim reproduces the code.
std::vector<torch::Tensor> partition_blocks(const LatentCode& code);

// Zeroes every block whose binary label is 0 (block i scaled by y_i).
LatentCode filter_by_labels(const LatentCode& code, const AttributeVector& labels);

// Batched form: code (B,C,h,w) with per-element labels (B,n).
torch::Tensor filter_by_labels(const torch::Tensor& code, const torch::Tensor& labels,
                               long block_channels);

}  // namespace ebgan

#endif
