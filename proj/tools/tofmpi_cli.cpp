// Command-line front end: gen, render, train, correct, eval, run, export-ply.
//
// Exit codes: 0 success, 1 user error (bad flags, missing files, invalid
// data), 2 internal error.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>

#include "CLI11.hpp"
#include "json.hpp"
#include "tofmpi/error.hpp"
#include "tofmpi/pipeline.hpp"
#include "tofmpi/raster_io.hpp"
#include "tofmpi/scene_io.hpp"

namespace {

using namespace tofmpi;
using nlohmann::json;

// Expands `--config file.json` into ordinary flags. Keys are long option
// names without dashes; a nested object under the subcommand's name is
// merged over the flat keys, so one file can serve several subcommands.
// Flat keys the subcommand does not know are ignored; flags already present
// on the command line are left alone.
std::vector<std::string> ExpandConfig(const CLI::App& app, std::vector<std::string> args) {
  std::string path;
  std::size_t sub = 0;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (sub == 0 && !args[i].starts_with("-")) sub = i;
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].starts_with("--config=")) path = args[i].substr(9);
  }
  if (path.empty() || sub == 0) return args;

  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, "config file is not valid JSON: " + std::string(e.what()));
  }
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "config file must hold a JSON object");
  const CLI::App* cmd = app.get_subcommand_no_throw(args[sub]);
  if (cmd == nullptr) return args;
  json merged = json::object();
  for (auto& [key, value] : j.items())
    if (!value.is_object() && cmd->get_option_no_throw("--" + key) != nullptr) merged[key] = value;
  if (j.contains(args[sub]) && j[args[sub]].is_object())
    for (auto& [key, value] : j[args[sub]].items()) merged[key] = value;

  auto given = [&](const std::string& flag) {
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.starts_with(flag + "=");
    });
  };
  std::vector<std::string> extra;
  for (auto& [key, value] : merged.items()) {
    const std::string flag = "--" + key;
    if (given(flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) extra.push_back(flag);
      continue;
    }
    extra.push_back(flag);
    extra.push_back(value.is_string() ? value.get<std::string>() : value.dump());
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(sub) + 1, extra.begin(), extra.end());
  return args;
}

CLI::App* AddCommand(CLI::App& app, const std::string& name, const std::string& help) {
  CLI::App* sub = app.add_subcommand(name, help);
  sub->add_option("--config", "JSON file supplying flag values; command-line flags win");
  return sub;
}

struct RenderFlags {
  double fm = 2.0e7;
  int bounce_samples = 64;
  bool no_multipath = false;
  double noise = 0.0;
  std::string normalization = "classic";
  unsigned threads = 0;

  void Register(CLI::App* sub) {
    sub->add_option("--fm", fm, "Modulation frequency in Hz")->capture_default_str();
    sub->add_option("--bounce-samples", bounce_samples, "Secondary-path samples per pixel")
        ->capture_default_str();
    sub->add_flag("--no-multipath", no_multipath, "Render direct returns only");
    sub->add_option("--noise", noise, "Additive depth noise standard deviation (m)");
    sub->add_option("--normalization", normalization, "Specular lobe normalization")
        ->check(CLI::IsMember({"classic", "bounded"}))
        ->capture_default_str();
    sub->add_option("--threads", threads, "Worker threads (0 = all cores)");
  }

  ToFConfig Config() const {
    ToFConfig cfg;
    cfg.modulation_frequency = fm;
    cfg.bounce_samples = bounce_samples;
    cfg.multipath_enabled = !no_multipath;
    cfg.noise_stddev = noise;
    cfg.normalization =
        normalization == "bounded" ? WardNormalization::kBoundedAlbedo : WardNormalization::kClassic;
    cfg.threads = threads;
    return cfg;
  }
};

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDivisionByZeroGroundTruth:
      return 2;
    default:
      return 1;
  }
}

int Run(int argc, char** argv) {
  CLI::App app{"Multipath correction for simulated time-of-flight depth images", "tofmpi"};
  app.require_subcommand(1);

  // gen
  std::string gen_out, gen_kind = "simple";
  int gen_count = 1000, gen_width = 200, gen_height = 200;
  std::uint64_t gen_seed = 0;
  double gen_fov_deg = 60.0;
  CLI::App* gen = AddCommand(app, "gen", "Sample corner-scene manifests");
  gen->add_option("out_dir", gen_out, "Output directory")->required();
  gen->add_option("--dataset", gen_kind, "Dataset kind")
      ->check(CLI::IsMember({"simple", "challenging2", "challenging3"}))
      ->capture_default_str();
  gen->add_option("--count", gen_count, "Number of scenes")->capture_default_str();
  gen->add_option("--seed", gen_seed, "Dataset seed")->capture_default_str();
  gen->add_option("--width", gen_width, "Image width in pixels")->capture_default_str();
  gen->add_option("--height", gen_height, "Image height in pixels")->capture_default_str();
  gen->add_option("--fov", gen_fov_deg, "Horizontal field of view in degrees")->capture_default_str();

  // render
  std::string render_scenes, render_out;
  RenderFlags render_flags;
  CLI::App* render = AddCommand(app, "render", "Render scene manifests into frame sets");
  render->add_option("scene_dir", render_scenes, "Directory of scene manifests")->required();
  render->add_option("out_dir", render_out, "Output directory for frame sets")->required();
  render_flags.Register(render);

  // train
  std::string train_frames, train_model, train_confidence = "literal";
  TrainOptions train_opt;
  bool train_no_bootstrap = false, train_38 = false;
  CLI::App* train = AddCommand(app, "train", "Train the correction forest");
  train->add_option("frames_dir", train_frames, "Directory of frame sets")->required();
  train->add_option("model_out", train_model, "Output .tforest path")->required();
  train->add_option("--trees", train_opt.forest.n_trees, "Number of trees")->capture_default_str();
  train->add_option("--max-depth", train_opt.forest.max_depth, "Maximum tree depth")
      ->capture_default_str();
  train->add_option("--min-split", train_opt.forest.min_samples_split,
                    "Minimum samples to split a node")
      ->capture_default_str();
  train->add_option("--max-features", train_opt.forest.max_features,
                    "Features tried per node (0 = all)");
  train->add_flag("--no-bootstrap", train_no_bootstrap, "Train every tree on all rows");
  train->add_option("--train-images", train_opt.train_images, "Images used for training")
      ->capture_default_str();
  train->add_option("--pixel-fraction", train_opt.pixel_fraction,
                    "Fraction of valid pixels drawn per image")
      ->capture_default_str();
  train->add_option("--seed", train_opt.forest.seed, "Split and forest seed")->capture_default_str();
  train->add_option("--confidence", train_confidence, "Confidence channel formula")
      ->check(CLI::IsMember({"literal", "amplitude-depth"}))
      ->capture_default_str();
  train->add_flag("--features38", train_38, "Drop the normalized y channel");
  train->add_option("--threads", train_opt.forest.threads, "Worker threads (0 = all cores)");

  // correct
  std::string correct_frames, correct_model, correct_out;
  bool correct_all = false;
  CLI::App* correct = AddCommand(app, "correct", "Apply a trained model to frame sets");
  correct->add_option("frames_dir", correct_frames, "Directory of frame sets")->required();
  correct->add_option("model", correct_model, "Trained .tforest model")->required();
  correct->add_option("out_dir", correct_out, "Output directory for corrected depth")->required();
  correct->add_flag("--all-images", correct_all,
                    "Correct every frame set, not only the held-out ones");

  // eval
  std::string eval_frames, eval_corrected, eval_report, eval_split, eval_model;
  int eval_bins = 100;
  CLI::App* eval = AddCommand(app, "eval", "Compare measured and corrected depth with ground truth");
  eval->add_option("frames_dir", eval_frames, "Directory of frame sets")->required();
  eval->add_option("corrected_dir", eval_corrected, "Directory of corrected depth")->required();
  eval->add_option("report_out", eval_report, "Output JSON report")->required();
  eval->add_option("--split", eval_split, "Split manifest; training images are refused");
  eval->add_option("--model", eval_model, "Model whose importances go into the report");
  eval->add_option("--bins", eval_bins, "Histogram bins over [0, 1]")->capture_default_str();

  // run
  std::string run_out, run_profile = "desk";
  std::uint64_t run_seed = 0;
  RenderFlags run_flags;
  std::string run_confidence = "literal";
  CLI::App* run = AddCommand(app, "run", "gen, render, train, correct and eval in one go");
  run->add_option("out_dir", run_out, "Working directory")->required();
  run->add_option("--profile", run_profile, "Size profile")
      ->check(CLI::IsMember({"desk", "full"}))
      ->capture_default_str();
  run->add_option("--seed", run_seed, "Seed for every stage")->capture_default_str();
  run->add_option("--confidence", run_confidence, "Confidence channel formula")
      ->check(CLI::IsMember({"literal", "amplitude-depth"}));
  run_flags.Register(run);

  // export-ply
  std::string ply_scene, ply_frames, ply_out, ply_corrected;
  CLI::App* ply = AddCommand(app, "export-ply", "Write measured/ground-truth/corrected points");
  ply->add_option("scene", ply_scene, "Scene manifest")->required();
  ply->add_option("frames", ply_frames, "Frame set (.tfim)")->required();
  ply->add_option("out", ply_out, "Output .ply")->required();
  ply->add_option("--corrected", ply_corrected, "Corrected depth raster");

  std::vector<std::string> args(argv, argv + argc);
  args = ExpandConfig(app, std::move(args));
  // CLI11 takes the vector in reverse order, without the program name.
  std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  std::ostream* log = &std::cerr;
  if (*gen) {
    GenOptions opt;
    opt.kind = ParseDatasetKind(gen_kind);
    opt.count = gen_count;
    opt.seed = gen_seed;
    opt.resolution = {gen_width, gen_height};
    opt.fov = gen_fov_deg * std::numbers::pi / 180.0;
    GenerateDataset(opt, gen_out);
    *log << "wrote " << gen_count << " " << gen_kind << " scenes to " << gen_out << '\n';
  } else if (*render) {
    RenderDataset(render_scenes, render_out, render_flags.Config(), log);
  } else if (*train) {
    train_opt.forest.bootstrap = !train_no_bootstrap;
    train_opt.features.confidence = train_confidence == "literal" ? ConfidenceMode::kLiteral
                                                                  : ConfidenceMode::kAmplitudeDepth;
    train_opt.features.include_norm_y = !train_38;
    const TrainSummary s = TrainModel(train_frames, train_model, train_opt, log);
    *log << "trained on " << s.train.size() << " images (" << s.rows << " rows), " << s.test.size()
         << " held out\n";
  } else if (*correct) {
    const auto done = CorrectDataset(correct_frames, correct_model, correct_out, correct_all, log);
    *log << "corrected " << done.size() << " frame sets\n";
  } else if (*eval) {
    EvalDatasetOptions opt;
    if (!eval_split.empty()) opt.split_manifest = eval_split;
    if (!eval_model.empty()) opt.model = eval_model;
    opt.bins = eval_bins;
    const EvalReport r = EvaluateDataset(eval_frames, eval_corrected, eval_report, opt);
    std::cout << "pixels " << r.n_pixels << "\nmean_rpe " << r.mean_rpe_before << " -> "
              << r.mean_rpe_after << "\nvar_rpe " << r.var_rpe_before << " -> " << r.var_rpe_after
              << '\n';
  } else if (*run) {
    RunOptions opt;
    opt.profile = GetProfile(run_profile);
    opt.seed = run_seed;
    opt.tof = run_flags.Config();
    opt.threads = run_flags.threads;
    opt.features.confidence = run_confidence == "amplitude-depth" ? ConfidenceMode::kAmplitudeDepth
                                                                  : ConfidenceMode::kLiteral;
    const EvalReport r = RunPipeline(opt, run_out, log);
    std::cout << "pixels " << r.n_pixels << "\nmean_rpe " << r.mean_rpe_before << " -> "
              << r.mean_rpe_after << "\nvar_rpe " << r.var_rpe_before << " -> " << r.var_rpe_after
              << '\n';
  } else if (*ply) {
    const auto scenes = ReadSceneManifest(ply_scene);
    if (scenes.size() != 1) {
      throw Error(ErrorCode::kInvalidArgument, "export-ply needs a single-scene manifest");
    }
    const FrameSet frames = ReadFrameSet(ply_frames);
    if (ply_corrected.empty()) {
      ExportPly(scenes[0], frames, nullptr, ply_out);
    } else {
      const Raster corrected = ReadRaster(ply_corrected);
      ExportPly(scenes[0], frames, &corrected, ply_out);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return Run(argc, argv);
  } catch (const tofmpi::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  }
}
