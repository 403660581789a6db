#include "ebgan/edit.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

#include <gtest/gtest.h>

#include "ebgan/checkpoint.hpp"
#include "ebgan/data.hpp"
#include "ebgan/errors.hpp"
#include "ebgan/image_io.hpp"
#include "ebgan/latent.hpp"
#include "ebgan/masking.hpp"

namespace fs = std::filesystem;
using namespace ebgan;

namespace {

fs::path make_temp_dir(const std::string& tag) {
  auto dir = fs::temp_directory_path() / ("ebgan_" + tag + "_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

RunConfig tiny_config(Variant variant) {
  RunConfig cfg;
  cfg.variant = variant;
  cfg.seed = 5;
  cfg.output_dir = (make_temp_dir("editcfg") / "out").string();
  cfg.dataset.source = "synthetic";
  cfg.dataset.resolution = 32;
  cfg.dataset.attributes = {"a", "b"};
  cfg.dataset.synthetic.count = 64;
  cfg.dataset.split = {48, 8, 8};
  cfg.model.encoder = {3, 4, 16, 8};
  cfg.model.block_channels = 4;
  cfg.model.generator_encoder = {3, 4, 16, 8};
  cfg.model.decoder_base_width = 16;
  cfg.model.decoder_min_width = 4;
  cfg.model.adversary_base_width = 4;
  cfg.model.adversary_max_width = 16;
  cfg.model.adversary_stages = 5;
  cfg.optim.batch_size = 4;
  return cfg;
}

Sample face(int which, int a0, int a1) {
  auto rng = step_rng(77, static_cast<std::uint64_t>(which));
  AttributeVector attrs;
  attrs.values = {a0, a1};
  attrs.names = {"a", "b"};
  return synthesize_face(rng, attrs, 32);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(EBGAN_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(ParseRegionArg, GrammarCoversPresetsFullAndRectangles) {
  EXPECT_EQ(parse_region_arg("full", 32).kind, RegionSpec::Kind::kFull);

  const auto presets = default_region_presets(32);
  const auto mouth = parse_region_arg("mouth", 32);
  EXPECT_EQ(mouth.rectangles, presets.at("mouth").rectangles);

  const auto rect = parse_region_arg("4,8,10,20", 32);
  ASSERT_EQ(rect.rectangles.size(), 1u);
  EXPECT_EQ(rect.rectangles[0], (Rect{4, 8, 10, 20}));

  const auto multi = parse_region_arg("1,2,3,4;5,6,7,8", 32);
  EXPECT_EQ(multi.kind, RegionSpec::Kind::kUnionOfRectangles);
  ASSERT_EQ(multi.rectangles.size(), 2u);
  EXPECT_EQ(multi.rectangles[1], (Rect{5, 6, 7, 8}));

  EXPECT_THROW(parse_region_arg("", 32), UsageError);
  EXPECT_THROW(parse_region_arg("moth", 32), UsageError);
  EXPECT_THROW(parse_region_arg("1,2,3", 32), UsageError);
  EXPECT_THROW(parse_region_arg("1,2,3,x", 32), UsageError);
  EXPECT_THROW(parse_region_arg("1,2,3,4;;", 32), UsageError);
}

TEST(InferLabels, ThresholdsAtHalfWithTiesUp) {
  // A zero-initialized head answers exactly 0.5 everywhere: every tie
  // resolves upward.
  ModelBundle bundle = build_bundle(tiny_config(Variant::kAttEbgan));
  const auto image = face(0, 0, 0).image;
  const auto labels = infer_labels(bundle.classifier, image, {"a", "b"});
  EXPECT_EQ(labels.values, (std::vector<int>{1, 1}));
  EXPECT_EQ(labels.names, (std::vector<std::string>{"a", "b"}));

  // Push one head's bias decisively negative and that attribute flips to 0.
  {
    torch::NoGradGuard no_grad;
    auto params = bundle.classifier->named_parameters();
    for (auto& item : params) {
      if (item.key().find("bias") != std::string::npos && item.value().dim() == 1 &&
          item.value().size(0) == 2) {
        item.value()[1] = -50.0;
      }
    }
  }
  const auto flipped = infer_labels(bundle.classifier, image, {"a", "b"});
  EXPECT_EQ(flipped.values, (std::vector<int>{1, 0}));
}

TEST(ReadLabelFile, ParsesAndRejects) {
  const auto dir = make_temp_dir("labels");
  const auto good = dir / "good.labels";
  std::ofstream(good) << "1 0\n";
  const auto labels = read_label_file(good, {"a", "b"});
  EXPECT_EQ(labels.values, (std::vector<int>{1, 0}));

  const auto short_file = dir / "short.labels";
  std::ofstream(short_file) << "1\n";
  EXPECT_THROW(read_label_file(short_file, {"a", "b"}), ParseError);

  const auto soft = dir / "soft.labels";
  std::ofstream(soft) << "1 0.5\n";
  EXPECT_THROW(read_label_file(soft, {"a", "b"}), ParseError);

  EXPECT_THROW(read_label_file(dir / "missing.labels", {"a", "b"}), IoError);
}

TEST(EditImage, MatchesTheManuallyChainedPipeline) {
  ModelBundle bundle = build_bundle(tiny_config(Variant::kAttEbgan));
  const auto source = face(1, 0, 1).image;
  const auto exemplar = face(2, 1, 0).image;
  const auto region = default_region_presets(32).at("mouth");
  AttributeVector labels;
  labels.values = {1, 0};
  labels.names = {"a", "b"};

  const auto via_edit = edit_image(bundle, source, exemplar, region, &labels);

  bundle.eval();
  torch::NoGradGuard no_grad;
  const auto mask = generate_mask(region, 32, 32);
  const auto corrupted = corrupt(source.unsqueeze(0), mask);
  const auto z_a = bundle.g_encoder->forward(corrupted);
  auto z_b = encode(bundle.encoder, exemplar.unsqueeze(0), mask);
  z_b = filter_by_labels(z_b, labels.to_tensor().unsqueeze(0), 4);
  const auto a_b = g_decode(bundle.g_decoder, z_a, z_b);
  const auto manual = compose(a_b, corrupted, mask).squeeze(0);

  EXPECT_TRUE(torch::equal(via_edit, manual));
}

TEST(EditImage, PreservesEveryOutOfHolePixel) {
  ModelBundle bundle = build_bundle(tiny_config(Variant::kAttEbgan));
  const auto source = face(3, 1, 1).image;
  const auto exemplar = face(4, 0, 0).image;
  const auto region = default_region_presets(32).at("eyes");
  const auto mask = generate_mask(region, 32, 32);

  const auto out = edit_image(bundle, source, exemplar, region);
  const auto keep = 1.0f - mask;
  EXPECT_TRUE(torch::equal(out * keep, source * keep));
}

TEST(EditImage, FilterSemantics) {
  ModelBundle bundle = build_bundle(tiny_config(Variant::kAttEbgan));
  const auto source = face(5, 0, 0).image;
  const auto exemplar = face(6, 1, 1).image;
  const auto region = default_region_presets(32).at("mouth");
  AttributeVector labels;
  labels.values = {1, 1};
  labels.names = {"a", "b"};

  // All-ones filter reproduces the unfiltered edit exactly.
  const std::vector<int> ones{1, 1};
  const auto unfiltered = edit_image(bundle, source, exemplar, region, &labels);
  const auto idly = edit_image(bundle, source, exemplar, region, &labels, &ones);
  EXPECT_TRUE(torch::equal(unfiltered, idly));

  // Zeroing one attribute equals conditioning on labels with that bit off.
  const std::vector<int> drop_a{0, 1};
  const auto filtered = edit_image(bundle, source, exemplar, region, &labels, &drop_a);
  AttributeVector downgraded = labels;
  downgraded.values = {0, 1};
  const auto direct = edit_image(bundle, source, exemplar, region, &downgraded);
  EXPECT_TRUE(torch::equal(filtered, direct));
  EXPECT_FALSE(torch::equal(filtered, unfiltered));

  const std::vector<int> wrong_len{1};
  EXPECT_THROW(edit_image(bundle, source, exemplar, region, &labels, &wrong_len),
               UsageError);
  const std::vector<int> soft{1, 2};
  EXPECT_THROW(edit_image(bundle, source, exemplar, region, &labels, &soft), UsageError);
}

TEST(EditImage, AllZeroFilterErasesTheExemplar) {
  ModelBundle bundle = build_bundle(tiny_config(Variant::kAttEbgan));
  const auto source = face(7, 0, 1).image;
  const auto region = default_region_presets(32).at("mouth");
  AttributeVector labels;
  labels.values = {1, 1};
  labels.names = {"a", "b"};
  const std::vector<int> zeros{0, 0};

  // With every attribute filtered away, the conditioning code is zero and
  // the exemplar cannot influence the output.
  torch::Tensor reference;
  for (int which = 0; which < 5; ++which) {
    const auto exemplar = face(20 + which, which % 2, (which / 2) % 2).image;
    const auto out = edit_image(bundle, source, exemplar, region, &labels, &zeros);
    if (which == 0) {
      reference = out;
    } else {
      EXPECT_TRUE(torch::equal(out, reference)) << "exemplar " << which;
    }
  }
}

TEST(EditImage, UnconditionalRejectsLabelsAndFilters) {
  ModelBundle bundle = build_bundle(tiny_config(Variant::kEbgan));
  const auto source = face(8, 0, 0).image;
  const auto exemplar = face(9, 1, 1).image;
  const auto region = default_region_presets(32).at("mouth");

  EXPECT_NO_THROW(edit_image(bundle, source, exemplar, region));
  AttributeVector labels;
  labels.values = {1, 0};
  labels.names = {"a", "b"};
  EXPECT_THROW(edit_image(bundle, source, exemplar, region, &labels), UsageError);
  const std::vector<int> filter{1, 0};
  EXPECT_THROW(edit_image(bundle, source, exemplar, region, nullptr, &filter), UsageError);
}

TEST(RunEdit, FileLevelPipelineHonorsLabelPrecedence) {
  const auto dir = make_temp_dir("runedit");
  const RunConfig cfg = tiny_config(Variant::kAttEbgan);
  ModelBundle bundle = build_bundle(cfg);
  const auto ckpt = dir / "model.ckpt";
  write_checkpoint(ckpt, bundle, 0);

  const auto src_png = dir / "source.png";
  const auto ex_png = dir / "exemplar.png";
  save_image(face(10, 0, 0).image, src_png);
  save_image(face(11, 1, 1).image, ex_png);
  std::ofstream(ex_png.string() + ".labels") << "1 1\n";

  EditRequest req;
  req.checkpoint = ckpt;
  req.source = src_png;
  req.exemplar = ex_png;
  req.region = "mouth";
  req.output = dir / "out.png";
  const EditResult via_sidecar = run_edit(req);
  EXPECT_EQ(via_sidecar.exemplar_labels.values, (std::vector<int>{1, 1}));
  ASSERT_TRUE(fs::exists(req.output));

  // The written file holds the quantized in-memory result, bit-exactly.
  const auto source = load_image(src_png, 32);
  const auto exemplar = load_image(ex_png, 32);
  const auto region = default_region_presets(32).at("mouth");
  AttributeVector ones;
  ones.values = {1, 1};
  ones.names = cfg.dataset.attributes;
  const auto expected = edit_image(bundle, source, exemplar, region, &ones);
  EXPECT_TRUE(torch::equal(load_image(req.output, 32), quantize_u8(expected)));

  // An explicit label file overrides the sidecar.
  const auto override_labels = dir / "override.labels";
  std::ofstream(override_labels) << "0 0\n";
  EditRequest req2 = req;
  req2.labels = override_labels;
  req2.output = dir / "out2.png";
  const EditResult via_file = run_edit(req2);
  EXPECT_EQ(via_file.exemplar_labels.values, (std::vector<int>{0, 0}));
  EXPECT_FALSE(torch::equal(via_file.image, via_sidecar.image));

  // Without a sidecar or file, the classifier infers (untrained: all ties
  // resolve to 1, matching the sidecar result).
  const auto ex2_png = dir / "exemplar2.png";
  save_image(face(11, 1, 1).image, ex2_png);
  EditRequest req3 = req;
  req3.exemplar = ex2_png;
  req3.output = dir / "out3.png";
  const EditResult inferred = run_edit(req3);
  EXPECT_EQ(inferred.exemplar_labels.values, (std::vector<int>{1, 1}));
  EXPECT_TRUE(torch::equal(inferred.image, via_sidecar.image));
}

TEST(RunEdit, UnconditionalCheckpointRejectsFilter) {
  const auto dir = make_temp_dir("runeditun");
  ModelBundle bundle = build_bundle(tiny_config(Variant::kEbgan));
  const auto ckpt = dir / "model.ckpt";
  write_checkpoint(ckpt, bundle, 0);
  save_image(face(12, 0, 0).image, dir / "s.png");
  save_image(face(13, 1, 1).image, dir / "e.png");

  EditRequest req;
  req.checkpoint = ckpt;
  req.source = dir / "s.png";
  req.exemplar = dir / "e.png";
  req.output = dir / "o.png";
  EXPECT_NO_THROW(run_edit(req));

  req.filter_labels = std::vector<int>{1, 0};
  EXPECT_THROW(run_edit(req), UsageError);
}

TEST(MakeGrid, TilesGuttersAndHeaders) {
  std::vector<GridRow> rows;
  for (int i = 0; i < 3; ++i) {
    rows.push_back(GridRow{quantize_u8(face(30 + i, 0, 0).image),
                           quantize_u8(face(33 + i, 1, 0).image),
                           quantize_u8(face(36 + i, 0, 1).image)});
  }
  const auto grid = make_grid(rows);
  // 3 columns of 32px tiles with 2px gutters, an 11px header band.
  ASSERT_EQ(grid.dim(), 3);
  EXPECT_EQ(grid.size(1), 2 + 11 + 3 * (32 + 2));
  EXPECT_EQ(grid.size(2), 3 * 32 + 4 * 2);

  // Tiles land at their computed offsets, bit-exact.
  const long top0 = 2 + 11;
  EXPECT_TRUE(torch::equal(grid.narrow(1, top0, 32).narrow(2, 2, 32), rows[0].source));
  EXPECT_TRUE(torch::equal(grid.narrow(1, top0, 32).narrow(2, 2 + 34, 32),
                           rows[0].exemplar));
  EXPECT_TRUE(torch::equal(grid.narrow(1, top0 + 2 * 34, 32).narrow(2, 2 + 2 * 34, 32),
                           rows[2].result));

  // Gutter corners stay white; the header band carries dark glyph pixels.
  EXPECT_EQ(grid[0][0][0].item<float>(), 1.0f);
  EXPECT_EQ(grid[1][2 + 11 + 32][1].item<float>(), 1.0f);
  EXPECT_LT(grid.narrow(1, 2, 11).min().item<float>(), 0.0f);

  // Degenerate grid: one triple, one row.
  const auto single = make_grid({rows[0]});
  EXPECT_EQ(single.size(1), 2 + 11 + 34);

  EXPECT_THROW(make_grid({}), UsageError);
  auto bad = rows;
  bad[1].exemplar = torch::zeros({3, 16, 16});
  EXPECT_THROW(make_grid(bad), ValidationError);
}

TEST(MakeGrid, WrittenFileRoundTripsTilePixels) {
  const auto dir = make_temp_dir("gridfile");
  const auto a = dir / "a.png";
  const auto b = dir / "b.png";
  const auto c = dir / "c.png";
  save_image(face(40, 1, 1).image, a);
  save_image(face(41, 0, 1).image, b);
  save_image(face(42, 1, 0).image, c);

  const auto manifest = dir / "rows.txt";
  std::ofstream(manifest) << a.string() << " " << b.string() << " " << c.string() << "\n";
  const auto out = dir / "grid.png";
  grid_from_manifest(manifest, out);

  const auto sheet = load_image_native(out);
  EXPECT_EQ(sheet.size(2), 3 * 32 + 4 * 2);
  // The decoded source tile equals the quantized source image bit-exactly.
  EXPECT_TRUE(torch::equal(sheet.narrow(1, 13, 32).narrow(2, 2, 32),
                           quantize_u8(face(40, 1, 1).image)));

  const auto bad_manifest = dir / "bad.txt";
  std::ofstream(bad_manifest) << a.string() << " " << b.string() << "\n";
  EXPECT_THROW(grid_from_manifest(bad_manifest, out), ParseError);

  const auto empty_manifest = dir / "empty.txt";
  std::ofstream(empty_manifest) << "";
  EXPECT_THROW(grid_from_manifest(empty_manifest, out), UsageError);
}

TEST(Cli, ExitCodesFollowTheErrorTaxonomy) {
  const auto dir = make_temp_dir("cli");

  // No subcommand / bad flags are usage errors.
  EXPECT_EQ(run_cli(""), 2);
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli("edit --ckpt x"), 2);

  // Missing inputs are I/O errors; malformed ones parse errors.
  EXPECT_EQ(run_cli("train --config " + (dir / "none.json").string()), 5);
  const auto broken = dir / "broken.json";
  std::ofstream(broken) << "{ nope";
  EXPECT_EQ(run_cli("train --config " + broken.string()), 4);

  // Structurally invalid configs are config errors.
  const auto invalid = dir / "invalid.json";
  std::ofstream(invalid)
      << R"({"optim": {"batch_size": 1}, "dataset": {"resolution": 32},)"
      << R"( "model": {"encoder": {"depth": 3, "base_width": 4, "max_width": 16,)"
      << R"( "out_channels": 8}, "block_channels": 4, "generator_encoder":)"
      << R"( {"depth": 3, "base_width": 4, "max_width": 16, "out_channels": 8},)"
      << R"( "decoder_base_width": 16, "decoder_min_width": 4,)"
      << R"( "adversary_base_width": 4, "adversary_max_width": 16, "adversary_stages": 5}})";
  EXPECT_EQ(run_cli("train --config " + invalid.string()), 3);

  // Editing with an unconditional checkpoint and a filter is a usage error;
  // an out-of-bounds region fails validation.
  ModelBundle uncond = build_bundle(tiny_config(Variant::kEbgan));
  const auto ckpt = dir / "uncond.ckpt";
  write_checkpoint(ckpt, uncond, 0);
  const auto s = dir / "s.png";
  const auto e = dir / "e.png";
  save_image(face(50, 0, 0).image, s);
  save_image(face(51, 1, 1).image, e);
  const std::string edit_base = "edit --ckpt " + ckpt.string() + " --source " + s.string() +
                                " --exemplar " + e.string() + " --out " +
                                (dir / "o.png").string();
  EXPECT_EQ(run_cli(edit_base + " --region mouth"), 0);
  EXPECT_EQ(run_cli(edit_base + " --region mouth --filter 1,0"), 2);
  EXPECT_EQ(run_cli(edit_base + " --region 0,200,0,50"), 6);
  EXPECT_EQ(run_cli(edit_base + " --region moth"), 2);

  // Grid: an empty manifest is a usage error.
  const auto empty_manifest = dir / "empty.txt";
  std::ofstream(empty_manifest) << "";
  EXPECT_EQ(run_cli("grid --manifest " + empty_manifest.string() + " --out " +
                    (dir / "g.png").string()),
            2);
}

TEST(Cli, SynthWritesATrainableDataset) {
  const auto dir = make_temp_dir("clisynth");
  const auto data_dir = dir / "faces";
  ASSERT_EQ(run_cli("synth --out " + data_dir.string() +
                    " --count 6 --seed 3 --resolution 32 --attributes a,b"),
            0);
  EXPECT_TRUE(fs::exists(data_dir / "syn_00000.png"));
  EXPECT_TRUE(fs::exists(data_dir / "syn_00005.png.labels"));

  // The emitted annotation table parses back with matching labels.
  const auto table = parse_attribute_file(data_dir / "attributes.txt", {"a", "b"});
  EXPECT_EQ(table.size(), 6u);
  const auto sidecar = read_label_file(data_dir / "syn_00000.png.labels", {"a", "b"});
  EXPECT_EQ(table.at("syn_00000.png").values, sidecar.values);
}
