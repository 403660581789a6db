#include "ebgan/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "ebgan/errors.hpp"
#include "ebgan/image_io.hpp"

namespace ebgan {

namespace {

std::vector<std::string> split_tokens(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

// Face geometry in resolution fractions. Rows/cols are half-open intervals.
// Attribute regions are pairwise disjoint, disjoint from the unconditional
// parts (except the eyes, which sit inside the eyeglasses region and are
// overdrawn by it), and lie inside the face ellipse at any resolution >= 32.
struct FracRect {
  double r0, r1, c0, c1;
};

constexpr FracRect kMustacheRegion{0.62, 0.72, 0.38, 0.62};
constexpr FracRect kGlassesRegion{0.34, 0.46, 0.25, 0.75};
constexpr FracRect kBrowsRegion{0.26, 0.33, 0.30, 0.70};
constexpr FracRect kCheekLeft{0.50, 0.60, 0.22, 0.32};
constexpr FracRect kCheekRight{0.50, 0.60, 0.68, 0.78};
constexpr FracRect kForeheadRegion{0.16, 0.23, 0.44, 0.56};

constexpr FracRect kEyeLeft{0.36, 0.42, 0.30, 0.38};
constexpr FracRect kEyeRight{0.36, 0.42, 0.62, 0.70};
constexpr FracRect kNose{0.48, 0.60, 0.47, 0.53};
constexpr FracRect kMouth{0.74, 0.80, 0.42, 0.58};

constexpr double kFaceCenterRow = 0.52, kFaceCenterCol = 0.50;
constexpr double kFaceRadiusRow = 0.38, kFaceRadiusCol = 0.30;

Rect to_rect(const FracRect& f, long res) {
  return Rect{std::lround(f.r0 * res), std::lround(f.r1 * res),
              std::lround(f.c0 * res), std::lround(f.c1 * res)};
}

struct Rgb {
  double r, g, b;
};

void paint(torch::TensorAccessor<float, 3> acc, const Rect& rect, const Rgb& color) {
  for (long r = rect.row0; r < rect.row1; ++r) {
    for (long c = rect.col0; c < rect.col1; ++c) {
      acc[0][r][c] = static_cast<float>(color.r);
      acc[1][r][c] = static_cast<float>(color.g);
      acc[2][r][c] = static_cast<float>(color.b);
    }
  }
}

}  // namespace

std::map<std::string, AttributeVector> parse_attribute_file(
    const std::filesystem::path& path, const std::vector<std::string>& configured_names) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open attribute file: " + path.string());
  }
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    auto toks = split_tokens(line);
    if (toks.empty()) continue;
    // CelebA prefixes the header with a count line; accept it either way.
    if (header.empty() && toks.size() == 1 &&
        toks[0].find_first_not_of("0123456789") == std::string::npos) {
      continue;
    }
    header = std::move(toks);
    break;
  }
  if (header.empty()) {
    throw ParseError("attribute file has no header: " + path.string());
  }
  std::vector<std::size_t> columns;
  for (const auto& name : configured_names) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw ConfigError("attribute not in file header: " + name);
    }
    columns.push_back(static_cast<std::size_t>(it - header.begin()));
  }

  std::map<std::string, AttributeVector> out;
  while (std::getline(in, line)) {
    auto toks = split_tokens(line);
    if (toks.empty()) continue;
    if (toks.size() != header.size() + 1) {
      throw ParseError("attribute row arity mismatch at id '" + toks[0] + "': expected " +
                       std::to_string(header.size()) + " values, got " +
                       std::to_string(toks.size() - 1));
    }
    AttributeVector attrs;
    attrs.names = configured_names;
    for (std::size_t col : columns) {
      const std::string& v = toks[col + 1];
      if (v == "1" || v == "+1") {
        attrs.values.push_back(1);
      } else if (v == "-1") {
        attrs.values.push_back(0);
      } else {
        throw ParseError("attribute value '" + v + "' at id '" + toks[0] +
                         "' is not +1/-1");
      }
    }
    out[toks[0]] = std::move(attrs);
  }
  return out;
}

SplitSpec make_split(const std::vector<std::string>& ids, std::array<long, 3> counts) {
  const long total = counts[0] + counts[1] + counts[2];
  if (counts[0] < 0 || counts[1] < 0 || counts[2] < 0 ||
      total > static_cast<long>(ids.size())) {
    throw ConfigError("split counts " + std::to_string(counts[0]) + "/" +
                      std::to_string(counts[1]) + "/" + std::to_string(counts[2]) +
                      " do not fit dataset of size " + std::to_string(ids.size()));
  }
  SplitSpec split;
  auto it = ids.begin();
  split.train_ids.assign(it, it + counts[0]);
  it += counts[0];
  split.val_ids.assign(it, it + counts[1]);
  it += counts[1];
  split.test_ids.assign(it, it + counts[2]);
  return split;
}

SplitSpec split_from_partition_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open partition file: " + path.string());
  }
  SplitSpec split;
  std::string line;
  while (std::getline(in, line)) {
    auto toks = split_tokens(line);
    if (toks.empty()) continue;
    if (toks.size() != 2) {
      throw ParseError("partition row needs 'id k': " + line);
    }
    if (toks[1] == "0") {
      split.train_ids.push_back(toks[0]);
    } else if (toks[1] == "1") {
      split.val_ids.push_back(toks[0]);
    } else if (toks[1] == "2") {
      split.test_ids.push_back(toks[0]);
    } else {
      throw ParseError("partition index '" + toks[1] + "' at id '" + toks[0] +
                       "' is not 0/1/2");
    }
  }
  return split;
}

torch::Tensor generate_mask(const RegionSpec& region, long height, long width) {
  for (const auto& r : region.rectangles) {
    if (r.row0 < 0 || r.row0 > r.row1 || r.row1 > height || r.col0 < 0 ||
        r.col0 > r.col1 || r.col1 > width) {
      throw ValidationError("mask rectangle out of bounds for " + std::to_string(height) +
                            "x" + std::to_string(width));
    }
  }
  if (region.kind == RegionSpec::Kind::kFull) {
    return torch::ones({height, width}, torch::kFloat32);
  }
  auto mask = torch::zeros({height, width}, torch::kFloat32);
  for (const auto& r : region.rectangles) {
    if (r.row0 < r.row1 && r.col0 < r.col1) {
      mask.index_put_({torch::indexing::Slice(r.row0, r.row1),
                       torch::indexing::Slice(r.col0, r.col1)},
                      1.0f);
    }
  }
  return mask;
}

std::vector<long> shuffle_exemplars(long batch_size, std::mt19937_64& rng) {
  if (batch_size < 1) {
    throw ValidationError("batch size must be >= 1");
  }
  std::vector<long> perm(static_cast<std::size_t>(batch_size));
  std::iota(perm.begin(), perm.end(), 0L);
  if (batch_size == 1) return perm;
  auto has_fixed_point = [&perm] {
    for (std::size_t i = 0; i < perm.size(); ++i) {
      if (perm[i] == static_cast<long>(i)) return true;
    }
    return false;
  };
  do {
    std::shuffle(perm.begin(), perm.end(), rng);
  } while (has_fixed_point());
  return perm;
}

RegionSpec synthetic_attribute_region(long attribute_index, long resolution) {
  switch (attribute_index) {
    case 0:
      return RegionSpec::rectangle(to_rect(kMustacheRegion, resolution));
    case 1:
      return RegionSpec::rectangle(to_rect(kGlassesRegion, resolution));
    case 2:
      return RegionSpec::rectangle(to_rect(kBrowsRegion, resolution));
    case 3:
      return RegionSpec::union_of(
          {to_rect(kCheekLeft, resolution), to_rect(kCheekRight, resolution)});
    case 4:
      return RegionSpec::rectangle(to_rect(kForeheadRegion, resolution));
    default:
      throw ConfigError("synthetic attribute index out of range: " +
                        std::to_string(attribute_index));
  }
}

Sample synthesize_face(std::mt19937_64& rng, const AttributeVector& attributes,
                       long resolution) {
  if (resolution < 32) {
    throw ConfigError("synthetic resolution must be >= 32, got " +
                      std::to_string(resolution));
  }
  attributes.validate();
  if (attributes.size() > kMaxSyntheticAttributes) {
    throw ConfigError("synthetic faces support at most " +
                      std::to_string(kMaxSyntheticAttributes) + " attributes");
  }

  // Style draws happen unconditionally in a fixed order, so the pixels are a
  // pure function of (rng state, attributes) and flipping one label can only
  // change its own feature.
  auto draw = [&rng](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  const double bg = draw(-0.85, -0.75);
  const double skin = draw(0.25, 0.45);
  const double eye = draw(-0.95, -0.80);
  const double nose_shift = draw(-0.15, -0.05);
  const double mouth = draw(-0.55, -0.35);
  const double mustache = draw(-0.90, -0.70);
  const double glasses = draw(-0.95, -0.75);
  const double brows = draw(-0.90, -0.70);
  const double cheek = draw(0.0, 1.0);
  const double forehead = draw(-0.90, -0.70);

  auto image = torch::empty({3, resolution, resolution}, torch::kFloat32);
  auto acc = image.accessor<float, 3>();

  const Rgb skin_color{skin + 0.15, skin, skin - 0.10};
  const double cy = kFaceCenterRow * resolution, cx = kFaceCenterCol * resolution;
  const double ry = kFaceRadiusRow * resolution, rx = kFaceRadiusCol * resolution;
  for (long r = 0; r < resolution; ++r) {
    for (long c = 0; c < resolution; ++c) {
      const double dy = (r + 0.5 - cy) / ry;
      const double dx = (c + 0.5 - cx) / rx;
      const Rgb& color = dy * dy + dx * dx <= 1.0 ? skin_color : Rgb{bg, bg, bg};
      acc[0][r][c] = static_cast<float>(color.r);
      acc[1][r][c] = static_cast<float>(color.g);
      acc[2][r][c] = static_cast<float>(color.b);
    }
  }

  paint(acc, to_rect(kNose, resolution),
        {skin_color.r + nose_shift, skin_color.g + nose_shift, skin_color.b + nose_shift});
  paint(acc, to_rect(kEyeLeft, resolution), {eye, eye, eye});
  paint(acc, to_rect(kEyeRight, resolution), {eye, eye, eye});
  paint(acc, to_rect(kMouth, resolution), {mouth + 0.35, mouth - 0.10, mouth - 0.10});

  const Rgb cheek_color{0.85, -0.20 + 0.10 * cheek, -0.20 + 0.10 * cheek};
  const std::array<std::pair<FracRect, Rgb>, 6> features{{
      {kMustacheRegion, {mustache, mustache, mustache}},
      {kGlassesRegion, {glasses, glasses, glasses}},
      {kBrowsRegion, {brows, brows, brows}},
      {kCheekLeft, cheek_color},
      {kCheekRight, cheek_color},
      {kForeheadRegion, {forehead, forehead, forehead}},
  }};
  auto feature_on = [&attributes](long i) {
    return i < attributes.size() && attributes.values[static_cast<std::size_t>(i)] == 1;
  };
  for (long i = 0; i < kMaxSyntheticAttributes; ++i) {
    if (!feature_on(i)) continue;
    const std::size_t first = i <= 3 ? static_cast<std::size_t>(i) : 5;
    paint(acc, to_rect(features[first].first, resolution), features[first].second);
    if (i == 3) paint(acc, to_rect(features[4].first, resolution), features[4].second);
  }

  return Sample{image, attributes, ""};
}

Batch assemble_batch(const std::vector<Sample>& samples, const RegionSpec& region,
                     std::mt19937_64& rng) {
  if (samples.empty()) {
    throw ValidationError("cannot assemble an empty batch");
  }
  const auto shape = samples.front().image.sizes().vec();
  std::vector<torch::Tensor> images, labels;
  images.reserve(samples.size());
  labels.reserve(samples.size());
  for (const auto& s : samples) {
    if (s.image.sizes().vec() != shape) {
      throw ValidationError("mixed image shapes in batch");
    }
    images.push_back(s.image);
    labels.push_back(s.attributes.to_tensor());
  }
  Batch batch;
  batch.sources = torch::stack(images);
  batch.source_labels = torch::stack(labels);
  batch.exemplar_perm = shuffle_exemplars(static_cast<long>(samples.size()), rng);
  std::vector<torch::Tensor> ex_images, ex_labels;
  ex_images.reserve(samples.size());
  ex_labels.reserve(samples.size());
  for (long j : batch.exemplar_perm) {
    ex_images.push_back(images[static_cast<std::size_t>(j)]);
    ex_labels.push_back(labels[static_cast<std::size_t>(j)]);
  }
  batch.exemplars = torch::stack(ex_images);
  batch.exemplar_labels = torch::stack(ex_labels);
  batch.mask = generate_mask(region, shape[1], shape[2]);
  return batch;
}

std::map<std::string, RegionSpec> default_region_presets(long resolution) {
  auto rect = [resolution](const FracRect& f) {
    return RegionSpec::rectangle(to_rect(f, resolution));
  };
  std::map<std::string, RegionSpec> presets;
  presets["mouth"] = rect({0.60, 0.82, 0.30, 0.70});
  presets["eyes"] = rect({0.24, 0.48, 0.20, 0.80});
  presets["components"] = RegionSpec::union_of({
      to_rect({0.24, 0.48, 0.20, 0.80}, resolution),
      to_rect({0.60, 0.82, 0.30, 0.70}, resolution),
      to_rect({0.48, 0.62, 0.18, 0.36}, resolution),
      to_rect({0.48, 0.62, 0.64, 0.82}, resolution),
  });
  presets["face"] = rect({0.12, 0.92, 0.16, 0.84});
  return presets;
}

std::mt19937_64 step_rng(std::uint64_t seed, std::uint64_t step) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32)};
  return std::mt19937_64(seq);
}

SyntheticFaceDataset::SyntheticFaceDataset(std::uint64_t seed, long count,
                                           std::vector<std::string> attribute_names,
                                           long resolution)
    : seed_(seed),
      count_(count),
      attribute_names_(std::move(attribute_names)),
      resolution_(resolution) {
  if (count_ < 1) {
    throw ConfigError("synthetic dataset needs count >= 1");
  }
  if (attribute_names_.empty() ||
      static_cast<long>(attribute_names_.size()) > kMaxSyntheticAttributes) {
    throw ConfigError("synthetic dataset needs 1.." +
                      std::to_string(kMaxSyntheticAttributes) + " attributes");
  }
  ids_.reserve(static_cast<std::size_t>(count_));
  for (long i = 0; i < count_; ++i) {
    ids_.push_back("syn" + std::to_string(i));
  }
}

Sample SyntheticFaceDataset::get(long index) const {
  if (index < 0 || index >= count_) {
    throw ValidationError("synthetic index out of range: " + std::to_string(index));
  }
  auto rng = step_rng(seed_, static_cast<std::uint64_t>(index));
  AttributeVector attrs;
  attrs.names = attribute_names_;
  attrs.values.reserve(attribute_names_.size());
  for (std::size_t i = 0; i < attribute_names_.size(); ++i) {
    attrs.values.push_back(static_cast<int>(rng() & 1));
  }
  Sample s = synthesize_face(rng, attrs, resolution_);
  s.id = ids_[static_cast<std::size_t>(index)];
  return s;
}

CelebaDataset::CelebaDataset(std::filesystem::path image_dir,
                             const std::filesystem::path& attr_file,
                             std::vector<std::string> attribute_names, long resolution,
                             bool horizontal_flip)
    : image_dir_(std::move(image_dir)),
      labels_(parse_attribute_file(attr_file, attribute_names)),
      resolution_(resolution),
      horizontal_flip_(horizontal_flip) {
  ids_.reserve(labels_.size());
  for (const auto& [id, _] : labels_) {
    ids_.push_back(id);
  }
}

Sample CelebaDataset::get(long index) const {
  if (index < 0 || index >= size()) {
    throw ValidationError("dataset index out of range: " + std::to_string(index));
  }
  const std::string& id = ids_[static_cast<std::size_t>(index)];
  auto image = load_image(image_dir_ / id, resolution_);
  if (horizontal_flip_) {
    // Deterministic per-id flip keeps get() a pure function of the index.
    std::uint64_t h = 1469598103934665603ull;
    for (char ch : id) h = (h ^ static_cast<unsigned char>(ch)) * 1099511628211ull;
    if (h & 1) image = image.flip({2}).contiguous();
  }
  return Sample{image, labels_.at(id), id};
}

BatchStream::BatchStream(const Dataset& dataset, std::vector<long> train_indices,
                         long batch_size, std::uint64_t seed,
                         std::vector<std::pair<std::string, RegionSpec>> region_rotation,
                         bool prefetch)
    : dataset_(dataset),
      train_indices_(std::move(train_indices)),
      batch_size_(batch_size),
      seed_(seed),
      rotation_(std::move(region_rotation)),
      prefetch_(prefetch) {
  if (train_indices_.empty()) {
    throw ConfigError("batch stream needs a nonempty training subset");
  }
  if (batch_size_ < 1) {
    throw ConfigError("batch size must be >= 1");
  }
  if (rotation_.empty()) {
    throw ConfigError("batch stream needs at least one region preset");
  }
}

BatchStream::~BatchStream() {
  if (pending_.valid()) pending_.wait();
}

Batch BatchStream::batch_for_step(long step) const {
  auto rng = step_rng(seed_, static_cast<std::uint64_t>(step));
  std::uniform_int_distribution<std::size_t> pick(0, train_indices_.size() - 1);
  std::vector<Sample> samples;
  samples.reserve(static_cast<std::size_t>(batch_size_));
  for (long i = 0; i < batch_size_; ++i) {
    samples.push_back(dataset_.get(train_indices_[pick(rng)]));
  }
  return assemble_batch(samples, rotation_[static_cast<std::size_t>(step) % rotation_.size()].second,
                        rng);
}

Batch BatchStream::next() {
  Batch batch = pending_.valid() ? pending_.get() : batch_for_step(step_);
  if (prefetch_) {
    pending_ = std::async(std::launch::async,
                          [this, s = step_ + 1] { return batch_for_step(s); });
  }
  ++step_;
  return batch;
}

void BatchStream::seek(long step) {
  if (pending_.valid()) pending_.wait();
  pending_ = {};
  step_ = step;
}

const std::string& BatchStream::region_name_for_step(long step) const {
  return rotation_[static_cast<std::size_t>(step) % rotation_.size()].first;
}

}  // namespace ebgan
