#ifndef EBGAN_DATA_HPP
#define EBGAN_DATA_HPP

#include <array>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "ebgan/types.hpp"

namespace ebgan {

// Parses an attribute annotation file: an optional leading count line, a
// header line of attribute names, then rows of "id v1 ... vk" with v in
// {+1,-1}. Returns id -> labels restricted to `configured_names`, in that
// order (+1 -> 1, -1 -> 0).
std::map<std::string, AttributeVector> parse_attribute_file(
    const std::filesystem::path& path, const std::vector<std::string>& configured_names);

// Contiguous partition of `ids` in input order: first `train`, next `val`,
// next `test`.
SplitSpec make_split(const std::vector<std::string>& ids, std::array<long, 3> counts);

// Alternative split source: a partition file of rows "id k" with
// k in {0,1,2} = train/val/test.
SplitSpec split_from_partition_file(const std::filesystem::path& path);

// (H,W) float mask, 1 where the region covers the pixel, 0 elsewhere.
torch::Tensor generate_mask(const RegionSpec& region, long height, long width);

// Uniform random permutation of 0..batch_size-1; for batch_size >= 2 it is
// resampled until it has no fixed point, so every exemplar differs from its
// source. batch_size 1 yields the identity.
std::vector<long> shuffle_exemplars(long batch_size, std::mt19937_64& rng);

// How many synthetic attributes have a canonical feature defined.
inline constexpr long kMaxSyntheticAttributes = 5;

// Canonical editing/oracle region for synthetic attribute `attribute_index`
// at the given resolution. Regions of distinct attributes are disjoint.
RegionSpec synthetic_attribute_region(long attribute_index, long resolution);

// Renders a procedural face. Each attribute toggles one visible feature
// inside its canonical region; the rng drives only style (tones, jitter),
// never geometry, so identical (seed, attributes) yields identical pixels
// and flipping one attribute changes pixels only inside its region.
Sample synthesize_face(std::mt19937_64& rng, const AttributeVector& attributes,
                       long resolution);

// Stacks samples into a batch, pairing every source with a distinct
// exemplar drawn by shuffle_exemplars, and broadcasting one mask.
Batch assemble_batch(const std::vector<Sample>& samples, const RegionSpec& region,
                     std::mt19937_64& rng);

// Region presets (mouth, eyes, components, face) scaled to a resolution.
std::map<std::string, RegionSpec> default_region_presets(long resolution);

// Deterministic per-step engine; every batch is a pure function of
// (seed, step), which is what makes resumes reproduce batch sequences.
std::mt19937_64 step_rng(std::uint64_t seed, std::uint64_t step);

class Dataset {
 public:
  virtual ~Dataset() = default;
  virtual long size() const = 0;
  virtual Sample get(long index) const = 0;
  virtual const std::vector<std::string>& ids() const = 0;
};

class SyntheticFaceDataset : public Dataset {
 public:
  SyntheticFaceDataset(std::uint64_t seed, long count,
                       std::vector<std::string> attribute_names, long resolution);

  long size() const override { return count_; }
  Sample get(long index) const override;
  const std::vector<std::string>& ids() const override { return ids_; }
  long resolution() const { return resolution_; }

 private:
  std::uint64_t seed_;
  long count_;
  std::vector<std::string> attribute_names_;
  long resolution_;
  std::vector<std::string> ids_;
};

class CelebaDataset : public Dataset {
 public:
  CelebaDataset(std::filesystem::path image_dir,
                const std::filesystem::path& attr_file,
                std::vector<std::string> attribute_names, long resolution,
                bool horizontal_flip = false);

  long size() const override { return static_cast<long>(ids_.size()); }
  Sample get(long index) const override;
  const std::vector<std::string>& ids() const override { return ids_; }

 private:
  std::filesystem::path image_dir_;
  std::vector<std::string> ids_;
  std::map<std::string, AttributeVector> labels_;
  long resolution_;
  bool horizontal_flip_;
};

// Draws training batches by step index: indices sampled uniformly with
// replacement from the train subset, region preset rotated per batch.
// With prefetch enabled the next batch is assembled on a worker thread;
// delivery order and batch contents are unchanged.
class BatchStream {
 public:
  BatchStream(const Dataset& dataset, std::vector<long> train_indices,
              long batch_size, std::uint64_t seed,
              std::vector<std::pair<std::string, RegionSpec>> region_rotation,
              bool prefetch = false);
  ~BatchStream();

  Batch batch_for_step(long step) const;  // pure function of (seed, step)
  Batch next();                           // batch_for_step(step_++), prefetching ahead
  void seek(long step);                   // next() will produce `step`
  long step() const { return step_; }
  const std::string& region_name_for_step(long step) const;

 private:
  const Dataset& dataset_;
  std::vector<long> train_indices_;
  long batch_size_;
  std::uint64_t seed_;
  std::vector<std::pair<std::string, RegionSpec>> rotation_;
  bool prefetch_;
  long step_ = 0;
  std::future<Batch> pending_;
};

}  // namespace ebgan

#endif
