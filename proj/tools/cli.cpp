// Copyright 2026 The acfm Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "acfm/audio_io.hpp"
#include "acfm/cnn.hpp"
#include "acfm/dsp_frontend.hpp"
#include "acfm/error.hpp"
#include "acfm/metrics.hpp"
#include "acfm/spectrogram.hpp"
#include "acfm/stream_monitor.hpp"
#include "acfm/synth.hpp"
#include "acfm/trainer.hpp"

namespace acfm::cli {
namespace {

struct CheckFailed {
  std::string message;
};

void write_json_file(const nlohmann::ordered_json& j, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot create " + path);
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

// Test partition of a manifest, the same one train and finetune hold out.
SplitResult split_manifest(const std::string& manifest, std::uint64_t split_seed) {
  return stratified_split(load_manifest(manifest), 0.8, split_seed);
}

void log_history(const TrainHistory& h, std::ostream& err) {
  for (std::size_t e = 0; e < h.epochs.size(); ++e) {
    const EpochStats& s = h.epochs[e];
    err << "epoch " << e << ": train_loss=" << s.train_loss << " val_loss=" << s.val_loss
        << " val_acc=" << s.val_acc << '\n';
  }
  err << "best epoch: " << h.best_epoch << '\n';
}

struct TrainFlags {
  std::string manifest;
  std::string out;
  std::string history;
  std::uint64_t seed = 7;
  std::uint64_t split_seed = 42;
  std::size_t epochs = 30;
  std::size_t batch_size = 16;
  double lr = 1e-3;
  bool colored = false;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--manifest", f.manifest, "JSONL dataset manifest")->required();
  cmd->add_option("--out", f.out, "output model file")->required();
  cmd->add_option("--history", f.history, "write per-epoch history JSON here");
  cmd->add_option("--seed", f.seed, "initialization and shuffle seed")->capture_default_str();
  cmd->add_option("--split-seed", f.split_seed, "stratified split seed")->capture_default_str();
  cmd->add_option("--epochs", f.epochs, "maximum epochs")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--batch-size", f.batch_size, "minibatch size")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--lr", f.lr, "Adam learning rate")->capture_default_str();
}

TrainConfig to_config(const TrainFlags& f, bool colored) {
  TrainConfig cfg;
  cfg.epochs = f.epochs;
  cfg.batch_size = f.batch_size;
  cfg.lr = f.lr;
  cfg.seed = f.seed;
  cfg.colored = colored;
  return cfg;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"acfm: acoustic fault monitor for FDM printer extruders"};
  app.require_subcommand(1);

  // synth
  std::string synth_out;
  std::size_t synth_count = 256;
  std::uint64_t synth_seed = 42;
  auto* synth = app.add_subcommand("synth", "generate a synthetic labeled dataset");
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--count", synth_count, "number of clips")->capture_default_str();
  synth->add_option("--seed", synth_seed, "dataset seed")->capture_default_str();

  // spectrogram
  std::string spec_in;
  std::string spec_out;
  std::string spec_noise;
  bool spec_color = false;
  auto* spectrogram = app.add_subcommand("spectrogram", "render a WAV as a PGM/PPM spectrogram");
  spectrogram->add_option("--in", spec_in, "input WAV")->required();
  spectrogram->add_option("--out", spec_out, "output image (.pgm or .ppm)")->required();
  spectrogram->add_flag("--color", spec_color, "colored (PPM) instead of grayscale (PGM)");
  spectrogram->add_option("--noise-profile", spec_noise, "ambient WAV for spectral subtraction");

  // train
  TrainFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "train a classifier from scratch");
  add_train_flags(train_cmd, train_flags);
  train_cmd->add_flag("--color", train_flags.colored, "train on colored spectrograms");

  // finetune
  TrainFlags ft_flags;
  std::string ft_base;
  bool ft_freeze_conv = false;
  auto* finetune_cmd = app.add_subcommand("finetune", "retrain a saved model, optionally freezing conv layers");
  add_train_flags(finetune_cmd, ft_flags);
  finetune_cmd->add_option("--base", ft_base, "model to start from")->required();
  finetune_cmd->add_flag("--freeze-conv", ft_freeze_conv, "freeze all convolution layers");

  // eval
  std::string eval_manifest;
  std::string eval_model;
  std::string eval_report;
  std::uint64_t eval_split_seed = 42;
  bool eval_all = false;
  auto* eval = app.add_subcommand("eval", "score a model on the held-out split");
  eval->add_option("--manifest", eval_manifest, "JSONL dataset manifest")->required();
  eval->add_option("--model", eval_model, "model file")->required();
  eval->add_option("--report", eval_report, "output report JSON")->required();
  eval->add_option("--split-seed", eval_split_seed, "stratified split seed")->capture_default_str();
  eval->add_flag("--all", eval_all, "score every manifest entry instead of the test split");

  // classify
  std::string cls_model;
  std::string cls_wav;
  auto* classify = app.add_subcommand("classify", "class probabilities for one clip");
  classify->add_option("--model", cls_model, "model file")->required();
  classify->add_option("wav", cls_wav, "input WAV")->required();

  // monitor
  std::string mon_model;
  std::string mon_in;
  std::size_t mon_chunk = 4096;
  auto* monitor = app.add_subcommand("monitor", "stream a WAV through the real-time monitor");
  monitor->add_option("--model", mon_model, "model file")->required();
  monitor->add_option("--in", mon_in, "input WAV")->required();
  monitor->add_option("--chunk", mon_chunk, "samples per push")->capture_default_str()->check(CLI::PositiveNumber);

  // gradcheck
  std::uint64_t gc_seed = 1;
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of backpropagation");
  gradcheck->add_option("--seed", gc_seed, "initialization seed")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*synth) {
      if (synth_count < kNumClasses) throw Error(ErrorCode::kBadConfig, "--count must be >= 3");
      const auto manifest = synth_dataset(synth_count, synth_seed, synth_out);
      err << "wrote " << synth_count << " clips and " << manifest.string() << '\n';
    } else if (*spectrogram) {
      FeatureOptions options;
      options.colored = spec_color;
      if (!spec_noise.empty()) {
        options.noise_profile = estimate_noise_profile(standardize(read_wav(spec_noise)));
      }
      export_image(extract_features(read_wav(spec_in), options), spec_out);
    } else if (*train_cmd) {
      const SplitResult split = split_manifest(train_flags.manifest, train_flags.split_seed);
      const FeatureOptions options{train_flags.colored, std::nullopt, {}};
      err << "features: " << split.train.size() << " train / " << split.test.size() << " test\n";
      const FeatureSet train_set = build_features(split.train, options);
      const FeatureSet test_set = build_features(split.test, options);
      const TrainResult r = train(train_set, test_set, to_config(train_flags, train_flags.colored));
      log_history(r.history, err);
      save_model(r.model, train_flags.out);
      if (!train_flags.history.empty()) write_json_file(r.history.to_json(), train_flags.history);
    } else if (*finetune_cmd) {
      const Model base = load_model(ft_base);
      const bool colored = base.arch.input.channels == 3;
      const SplitResult split = split_manifest(ft_flags.manifest, ft_flags.split_seed);
      const FeatureOptions options{colored, std::nullopt, {}};
      const FeatureSet train_set = build_features(split.train, options);
      const FeatureSet test_set = build_features(split.test, options);
      const FreezeMask mask =
          ft_freeze_conv ? conv_freeze_mask(base.arch) : FreezeMask(base.params.size(), false);
      const TrainResult r = finetune(base, mask, train_set, test_set, to_config(ft_flags, colored));
      log_history(r.history, err);
      save_model(r.model, ft_flags.out);
      if (!ft_flags.history.empty()) write_json_file(r.history.to_json(), ft_flags.history);
    } else if (*eval) {
      const Model model = load_model(eval_model);
      const std::vector<LabeledExample> examples =
          eval_all ? load_manifest(eval_manifest) : split_manifest(eval_manifest, eval_split_seed).test;
      const FeatureOptions options{model.arch.input.channels == 3, std::nullopt, {}};
      const FeatureSet data = build_features(examples, options);
      const Evaluation ev = evaluate(model, data);
      const MetricsReport report = metrics_from_confusion(confusion(data.labels, ev.predictions));
      write_json_file(report.to_json(), eval_report);
      err << "accuracy " << report.accuracy << " on " << data.labels.size() << " examples; fault F1 "
          << report.binary_fault.f1 << '\n';
    } else if (*classify) {
      const Model model = load_model(cls_model);
      const FeatureOptions options{model.arch.input.channels == 3, std::nullopt, {}};
      const ClassProbabilities p = predict(model, extract_features(read_wav(cls_wav), options));
      nlohmann::ordered_json j;
      for (ClassLabel label : kAllLabels) j[std::string(label_name(label))] = p.p[label_index(label)];
      j["predicted"] = std::string(label_name(p.argmax()));
      out << j.dump() << '\n';
    } else if (*monitor) {
      auto model = std::make_shared<const Model>(load_model(mon_model));
      StreamMonitor m(model);
      const auto verdicts = run_file(m, mon_in, out, mon_chunk);
      std::size_t alarms = 0;
      for (const StreamVerdict& v : verdicts) alarms += v.state == AlarmState::kAlarm ? 1 : 0;
      err << verdicts.size() << " verdicts, " << alarms << " in alarm\n";
    } else if (*gradcheck) {
      const double worst = grad_check(gc_seed);
      out << "max relative error: " << worst << '\n';
      if (!(worst < 1e-4)) throw CheckFailed{"gradient check failed (threshold 1e-4)"};
    }
  } catch (const CheckFailed& e) {
    err << "error: " << e.message << '\n';
    return kExitCheckFailed;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace acfm::cli
