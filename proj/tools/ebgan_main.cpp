#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ebgan/config.hpp"
#include "ebgan/data.hpp"
#include "ebgan/edit.hpp"
#include "ebgan/errors.hpp"
#include "ebgan/image_io.hpp"
#include "ebgan/train.hpp"

namespace {

// Exit codes, one per error category.
enum ExitCode {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kConfig = 3,
  kParse = 4,
  kIo = 5,
  kValidation = 6,
  kVariant = 7,
  kAborted = 8,
};

std::vector<int> parse_filter_arg(const std::string& text) {
  std::vector<int> out;
  std::string token;
  std::istringstream in(text);
  while (std::getline(in, token, ',')) {
    if (token == "0") {
      out.push_back(0);
    } else if (token == "1") {
      out.push_back(1);
    } else {
      throw ebgan::UsageError("filter entries must be 0 or 1, got '" + token + "'");
    }
  }
  if (out.empty()) throw ebgan::UsageError("empty filter argument");
  return out;
}

std::vector<std::string> parse_name_list(const std::string& text) {
  std::vector<std::string> out;
  std::string token;
  std::istringstream in(text);
  while (std::getline(in, token, ',')) {
    if (!token.empty()) out.push_back(token);
  }
  if (out.empty()) throw ebgan::UsageError("empty attribute name list");
  return out;
}

// Writes synthetic faces as PNGs plus per-image label sidecars and one
// annotation file in the attribute-table format the trainer can ingest.
void run_synth(const std::filesystem::path& out_dir, long count, std::uint64_t seed,
               long resolution, const std::vector<std::string>& names) {
  std::filesystem::create_directories(out_dir);
  ebgan::SyntheticFaceDataset dataset(seed, count, names, resolution);

  std::ofstream attrs(out_dir / "attributes.txt");
  if (!attrs) throw ebgan::IoError("cannot write attribute file");
  attrs << count << "\n";
  for (std::size_t i = 0; i < names.size(); ++i) {
    attrs << names[i] << (i + 1 < names.size() ? ' ' : '\n');
  }
  for (long i = 0; i < count; ++i) {
    const ebgan::Sample sample = dataset.get(i);
    char name[32];
    std::snprintf(name, sizeof name, "syn_%05ld.png", i);
    ebgan::save_image(sample.image, out_dir / name);

    std::ofstream sidecar(out_dir / (std::string(name) + ".labels"));
    attrs << name;
    for (std::size_t k = 0; k < sample.attributes.values.size(); ++k) {
      const int v = sample.attributes.values[k];
      sidecar << v << (k + 1 < sample.attributes.values.size() ? ' ' : '\n');
      attrs << ' ' << (v == 1 ? "1" : "-1");
    }
    attrs << "\n";
  }
  std::cout << "wrote " << count << " images to " << out_dir.string() << "\n";
}

int run(int argc, char** argv) {
  CLI::App app{"Exemplar-based face editing by region inpainting"};
  app.require_subcommand(1);

  auto* train_cmd = app.add_subcommand("train", "Train a model from a JSON config");
  std::string config_path, resume_path;
  train_cmd->add_option("--config", config_path, "run config JSON")->required();
  train_cmd->add_option("--resume", resume_path, "checkpoint to resume from");

  auto* edit_cmd = app.add_subcommand("edit", "Edit one image region by exemplar");
  ebgan::EditRequest request;
  std::string region_arg = "full", filter_arg, labels_arg;
  edit_cmd->add_option("--ckpt", request.checkpoint, "trained model")->required();
  edit_cmd->add_option("--source", request.source, "image to edit")->required();
  edit_cmd->add_option("--exemplar", request.exemplar, "exemplar image")->required();
  edit_cmd->add_option("--out", request.output, "output image path")->required();
  edit_cmd->add_option("--region", region_arg,
                       "preset name, 'full', or r0,r1,c0,c1[;...] rectangles");
  edit_cmd->add_option("--filter", filter_arg, "comma-separated 0/1 attribute gate");
  edit_cmd->add_option("--labels", labels_arg, "exemplar label file (overrides sidecar)");

  auto* grid_cmd = app.add_subcommand("grid", "Render a source/exemplar/result sheet");
  std::string manifest_path, grid_out;
  grid_cmd->add_option("--manifest", manifest_path, "one 'source exemplar result' line per row")
      ->required();
  grid_cmd->add_option("--out", grid_out, "output image path")->required();

  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic face dataset to disk");
  std::string synth_dir, synth_names = "mustache,eyeglasses,bushy_eyebrows,rosy_cheeks,bangs";
  long synth_count = 16, synth_resolution = 64;
  std::uint64_t synth_seed = 11;
  synth_cmd->add_option("--out", synth_dir, "output directory")->required();
  synth_cmd->add_option("--count", synth_count, "number of images");
  synth_cmd->add_option("--seed", synth_seed, "dataset seed");
  synth_cmd->add_option("--resolution", synth_resolution, "image side length");
  synth_cmd->add_option("--attributes", synth_names, "comma-separated attribute names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  if (app.got_subcommand(train_cmd)) {
    const ebgan::RunConfig config = ebgan::load_run_config(config_path);
    ebgan::Trainer trainer = resume_path.empty()
                                 ? ebgan::Trainer(config)
                                 : ebgan::Trainer(config, resume_path);
    trainer.run();
    std::cout << "finished at step " << trainer.step() << "; checkpoint: "
              << trainer.final_checkpoint_path().string() << "\n";
    return kOk;
  }
  if (app.got_subcommand(edit_cmd)) {
    request.region = region_arg;
    if (!filter_arg.empty()) request.filter_labels = parse_filter_arg(filter_arg);
    if (!labels_arg.empty()) request.labels = labels_arg;
    ebgan::run_edit(request);
    std::cout << "wrote " << request.output.string() << "\n";
    return kOk;
  }
  if (app.got_subcommand(grid_cmd)) {
    ebgan::grid_from_manifest(manifest_path, grid_out);
    std::cout << "wrote " << grid_out << "\n";
    return kOk;
  }
  if (app.got_subcommand(synth_cmd)) {
    run_synth(synth_dir, synth_count, synth_seed, synth_resolution,
              parse_name_list(synth_names));
    return kOk;
  }
  return kUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ebgan::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ebgan::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const ebgan::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kParse;
  } catch (const ebgan::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kIo;
  } catch (const ebgan::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kValidation;
  } catch (const ebgan::VariantViolation& e) {
    std::cerr << "variant violation: " << e.what() << "\n";
    return kVariant;
  } catch (const ebgan::TrainingAbort& e) {
    std::cerr << "training aborted: " << e.what() << "\n";
    return kAborted;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}
