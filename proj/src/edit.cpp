#include "ebgan/edit.hpp"

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>

#include "ebgan/checkpoint.hpp"
#include "ebgan/data.hpp"
#include "ebgan/errors.hpp"
#include "ebgan/image_io.hpp"
#include "ebgan/latent.hpp"
#include "ebgan/masking.hpp"

namespace ebgan {
namespace {

long parse_long_strict(const std::string& token) {
  std::size_t used = 0;
  long value = 0;
  try {
    value = std::stol(token, &used);
  } catch (const std::exception&) {
    throw UsageError("bad region coordinate: '" + token + "'");
  }
  if (used != token.size()) {
    throw UsageError("bad region coordinate: '" + token + "'");
  }
  return value;
}

std::vector<std::string> split_on(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

// 5x7 glyphs, one bitmask row per scanline, for the grid column headers.
const std::map<char, std::array<std::uint8_t, 7>>& glyphs() {
  static const std::map<char, std::array<std::uint8_t, 7>> table = {
      {'A', {0b01110, 0b10001, 0b10001, 0b11111, 0b10001, 0b10001, 0b10001}},
      {'C', {0b01111, 0b10000, 0b10000, 0b10000, 0b10000, 0b10000, 0b01111}},
      {'E', {0b11111, 0b10000, 0b10000, 0b11110, 0b10000, 0b10000, 0b11111}},
      {'L', {0b10000, 0b10000, 0b10000, 0b10000, 0b10000, 0b10000, 0b11111}},
      {'M', {0b10001, 0b11011, 0b10101, 0b10101, 0b10001, 0b10001, 0b10001}},
      {'O', {0b01110, 0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01110}},
      {'P', {0b11110, 0b10001, 0b10001, 0b11110, 0b10000, 0b10000, 0b10000}},
      {'R', {0b11110, 0b10001, 0b10001, 0b11110, 0b10100, 0b10010, 0b10001}},
      {'S', {0b01111, 0b10000, 0b10000, 0b01110, 0b00001, 0b00001, 0b11110}},
      {'T', {0b11111, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100}},
      {'U', {0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01110}},
      {'X', {0b10001, 0b10001, 0b01010, 0b00100, 0b01010, 0b10001, 0b10001}},
  };
  return table;
}

// Draws black text onto a float canvas, clipping to the canvas bounds.
void draw_text(torch::Tensor& canvas, const std::string& text, long top, long left) {
  auto acc = canvas.accessor<float, 3>();
  const long height = canvas.size(1);
  const long width = canvas.size(2);
  long x = left;
  for (char ch : text) {
    const auto it = glyphs().find(ch);
    if (it != glyphs().end()) {
      for (long gr = 0; gr < 7; ++gr) {
        for (long gc = 0; gc < 5; ++gc) {
          if (!(it->second[gr] >> (4 - gc) & 1)) continue;
          const long r = top + gr;
          const long c = x + gc;
          if (r < 0 || r >= height || c < 0 || c >= width) continue;
          acc[0][r][c] = -1.0f;
          acc[1][r][c] = -1.0f;
          acc[2][r][c] = -1.0f;
        }
      }
    }
    x += 6;
  }
}

AttributeVector and_filter(const AttributeVector& labels, const std::vector<int>& filter) {
  if (static_cast<long>(filter.size()) != labels.size()) {
    throw UsageError("filter length does not match the attribute count");
  }
  AttributeVector out = labels;
  for (std::size_t i = 0; i < filter.size(); ++i) {
    if (filter[i] != 0 && filter[i] != 1) {
      throw UsageError("filter entries must be 0 or 1");
    }
    out.values[i] = labels.values[i] & filter[i];
  }
  return out;
}

}  // namespace

RegionSpec parse_region_arg(const std::string& text, long resolution) {
  if (text.empty()) throw UsageError("empty region argument");
  if (text == "full") return RegionSpec::full();
  const auto presets = default_region_presets(resolution);
  if (const auto it = presets.find(text); it != presets.end()) return it->second;
  if (text.find_first_of("0123456789") != 0) {
    throw UsageError("unknown region preset: '" + text + "'");
  }
  std::vector<Rect> rects;
  for (const auto& part : split_on(text, ';')) {
    const auto coords = split_on(part, ',');
    if (coords.size() != 4) {
      throw UsageError("region rectangles need exactly r0,r1,c0,c1: '" + part + "'");
    }
    rects.push_back(Rect{parse_long_strict(coords[0]), parse_long_strict(coords[1]),
                         parse_long_strict(coords[2]), parse_long_strict(coords[3])});
  }
  if (rects.size() == 1) return RegionSpec::rectangle(rects[0]);
  return RegionSpec::union_of(std::move(rects));
}

AttributeVector infer_labels(AttributeClassifier& classifier, const torch::Tensor& image,
                             const std::vector<std::string>& names) {
  torch::NoGradGuard no_grad;
  const auto probs = classify(classifier, image.unsqueeze(0)).squeeze(0);
  if (probs.size(0) != static_cast<long>(names.size())) {
    throw ValidationError("classifier head count does not match the attribute names");
  }
  AttributeVector labels;
  labels.names = names;
  const auto acc = probs.accessor<float, 1>();
  for (long i = 0; i < probs.size(0); ++i) {
    labels.values.push_back(acc[i] >= 0.5f ? 1 : 0);
  }
  return labels;
}

AttributeVector read_label_file(const std::filesystem::path& path,
                                const std::vector<std::string>& names) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open label file: " + path.string());
  AttributeVector labels;
  labels.names = names;
  std::string token;
  while (in >> token) {
    if (token == "0" || token == "1") {
      labels.values.push_back(token == "1" ? 1 : 0);
    } else {
      throw ParseError("label file entries must be 0 or 1, got '" + token + "'");
    }
  }
  if (labels.values.size() != names.size()) {
    throw ParseError("label file has " + std::to_string(labels.values.size()) +
                     " entries, expected " + std::to_string(names.size()));
  }
  return labels;
}

torch::Tensor edit_image(ModelBundle& bundle, const torch::Tensor& source,
                         const torch::Tensor& exemplar, const RegionSpec& region,
                         const AttributeVector* exemplar_labels,
                         const std::vector<int>* filter) {
  const bool att = bundle.config.variant == Variant::kAttEbgan;
  if (!att && (exemplar_labels != nullptr || filter != nullptr)) {
    throw UsageError("attribute labels and filters require the attribute-conditioned variant");
  }
  if (source.dim() != 3 || exemplar.dim() != 3) {
    throw ValidationError("edit_image expects (3,H,W) source and exemplar");
  }
  torch::NoGradGuard no_grad;
  bundle.eval();

  const auto mask = generate_mask(region, source.size(1), source.size(2));
  const auto src = source.unsqueeze(0);
  const auto corrupted = corrupt(src, mask);
  const auto z_a = bundle.config.model.generator_mask_plane
                       ? bundle.g_encoder->forward(corrupted, mask)
                       : bundle.g_encoder->forward(corrupted);
  auto z_b = encode(bundle.encoder, exemplar.unsqueeze(0), mask);
  if (att) {
    AttributeVector labels = exemplar_labels
                                 ? *exemplar_labels
                                 : infer_labels(bundle.classifier, exemplar,
                                                bundle.config.dataset.attributes);
    if (filter) labels = and_filter(labels, *filter);
    z_b = filter_by_labels(z_b, labels.to_tensor().unsqueeze(0),
                           bundle.config.model.block_channels);
  }
  const auto a_b = g_decode(bundle.g_decoder, z_a, z_b);
  return compose(a_b, corrupted, mask).squeeze(0);
}

EditResult run_edit(const EditRequest& request) {
  ModelBundle bundle = load_bundle(request.checkpoint);
  const bool att = bundle.config.variant == Variant::kAttEbgan;
  if (!att && (request.filter_labels.has_value() || request.labels.has_value())) {
    throw UsageError("attribute labels and filters require the attribute-conditioned variant");
  }

  const long resolution = bundle.config.dataset.resolution;
  const auto source = load_image(request.source, resolution);
  const auto exemplar = load_image(request.exemplar, resolution);
  const auto region = parse_region_arg(request.region, resolution);

  EditResult result;
  if (att) {
    const auto& names = bundle.config.dataset.attributes;
    if (request.labels) {
      result.exemplar_labels = read_label_file(*request.labels, names);
    } else if (const auto sidecar = request.exemplar.string() + ".labels";
               std::filesystem::exists(sidecar)) {
      result.exemplar_labels = read_label_file(sidecar, names);
    } else {
      result.exemplar_labels = infer_labels(bundle.classifier, exemplar, names);
    }
    result.image = edit_image(bundle, source, exemplar, region, &result.exemplar_labels,
                              request.filter_labels ? &*request.filter_labels : nullptr);
  } else {
    result.image = edit_image(bundle, source, exemplar, region);
  }
  if (!request.output.empty()) {
    save_image(result.image, request.output);
  }
  return result;
}

torch::Tensor make_grid(const std::vector<GridRow>& rows) {
  if (rows.empty()) throw UsageError("grid needs at least one source/exemplar/result row");
  if (rows.front().source.dim() != 3) {
    throw ValidationError("grid tiles must all be (3,H,W) with equal sizes");
  }
  const long h = rows.front().source.size(1);
  const long w = rows.front().source.size(2);
  for (const auto& row : rows) {
    for (const auto* t : {&row.source, &row.exemplar, &row.result}) {
      if (t->dim() != 3 || t->size(0) != 3 || t->size(1) != h || t->size(2) != w) {
        throw ValidationError("grid tiles must all be (3,H,W) with equal sizes");
      }
    }
  }
  constexpr long kGutter = 2;
  constexpr long kHeader = 11;  // 2px pad + 7px glyphs + 2px pad
  const long width = 3 * w + 4 * kGutter;
  const long height = kGutter + kHeader + static_cast<long>(rows.size()) * (h + kGutter);

  auto canvas = torch::ones({3, height, width}, torch::kFloat32);
  const std::array<std::string, 3> headers = {"SOURCE", "EXEMPLAR", "RESULT"};
  for (long col = 0; col < 3; ++col) {
    const long tile_left = kGutter + col * (w + kGutter);
    const long text_width = static_cast<long>(headers[col].size()) * 6 - 1;
    draw_text(canvas, headers[col], kGutter + 2, tile_left + (w - text_width) / 2);
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const long top = kGutter + kHeader + static_cast<long>(r) * (h + kGutter);
    const std::array<const torch::Tensor*, 3> tiles = {&rows[r].source, &rows[r].exemplar,
                                                       &rows[r].result};
    for (long col = 0; col < 3; ++col) {
      const long left = kGutter + col * (w + kGutter);
      canvas.narrow(1, top, h).narrow(2, left, w).copy_(*tiles[col]);
    }
  }
  return canvas;
}

void grid_from_manifest(const std::filesystem::path& manifest,
                        const std::filesystem::path& output) {
  std::ifstream in(manifest);
  if (!in) throw IoError("cannot open grid manifest: " + manifest.string());
  std::vector<GridRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string source, exemplar, result, extra;
    if (!(fields >> source >> exemplar >> result) || (fields >> extra)) {
      throw ParseError("grid manifest lines must hold exactly three paths: '" + line + "'");
    }
    rows.push_back(GridRow{load_image_native(source), load_image_native(exemplar),
                           load_image_native(result)});
  }
  save_image(make_grid(rows), output);
}

}  // namespace ebgan
