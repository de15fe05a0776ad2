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

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gtest/gtest.h"
#include "acfm/cnn.hpp"
#include "acfm/synth.hpp"
#include "cli.hpp"
#include "test_util.hpp"

namespace acfm {
namespace {

using testing::TempDir;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string file_contents(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"bogus"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"gradcheck", "--frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"eval", "--model", "m.bin"}).code, cli::kExitUsage);
  const Result help = run({"train", "--help"});
  EXPECT_EQ(help.code, cli::kExitOk);
  EXPECT_NE(help.out.find("--manifest"), std::string::npos);
}

TEST(Cli, GradcheckPasses) {
  const Result r = run({"gradcheck", "--seed", "2"});
  EXPECT_EQ(r.code, cli::kExitOk) << r.err;
  const auto pos = r.out.find(": ");
  ASSERT_NE(pos, std::string::npos);
  EXPECT_LT(std::stod(r.out.substr(pos + 2)), 1e-4);
}

TEST(Cli, ClassifyZeroModelIsUniform) {
  TempDir dir("cli");
  Model m = init_model(Architecture::canonical(3), 1);
  for (auto& l : m.params) {
    std::fill(l.weight.data.begin(), l.weight.data.end(), 0.0f);
    std::fill(l.bias.data.begin(), l.bias.data.end(), 0.0f);
  }
  save_model(m, dir / "zero.bin");
  write_wav(synth_clip(ClassLabel::kExtruderNormal, 1), dir / "c.wav");
  const Result r = run({"classify", "--model", (dir / "zero.bin").string(), (dir / "c.wav").string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  for (const char* k : {"ambient", "extruder_normal", "extruder_fault"}) {
    EXPECT_NEAR(j[k].get<double>(), 1.0 / 3.0, 1e-4) << k;
  }
  EXPECT_TRUE(j.contains("predicted"));
}

TEST(Cli, DataErrorsExitTwo) {
  TempDir dir("cli");
  const Result r = run({"classify", "--model", (dir / "none.bin").string(), (dir / "none.wav").string()});
  EXPECT_EQ(r.code, cli::kExitData);
  EXPECT_TRUE(r.out.empty());
  EXPECT_NE(r.err.find("error"), std::string::npos);
}

TEST(Cli, PipelineEndToEndSmall) {
  TempDir dir("cli");
  const std::string data = (dir / "data").string();
  const std::string manifest = data + "/manifest.jsonl";
  ASSERT_EQ(run({"synth", "--out", data, "--count", "15", "--seed", "3"}).code, cli::kExitOk);

  const Result spec = run({"spectrogram", "--in", data + "/clip_0000_ambient.wav", "--out",
                           (dir / "s.ppm").string(), "--color", "--noise-profile",
                           data + "/clip_0003_ambient.wav"});
  ASSERT_EQ(spec.code, cli::kExitOk) << spec.err;
  EXPECT_EQ(file_contents(dir / "s.ppm").size(), 13u + 64 * 64 * 3);

  const std::vector<std::string> train_args = {"train", "--manifest", manifest, "--epochs", "2", "--color",
                                               "--history", (dir / "h.json").string(), "--out"};
  auto with_out = [&](std::vector<std::string> a, const std::string& out) {
    a.push_back(out);
    return a;
  };
  const Result t1 = run(with_out(train_args, (dir / "m1.bin").string()));
  ASSERT_EQ(t1.code, cli::kExitOk) << t1.err;
  EXPECT_TRUE(t1.out.empty());
  ASSERT_EQ(run(with_out(train_args, (dir / "m2.bin").string())).code, cli::kExitOk);
  EXPECT_EQ(file_contents(dir / "m1.bin"), file_contents(dir / "m2.bin"));
  EXPECT_EQ(nlohmann::json::parse(file_contents(dir / "h.json"))["epochs"].size(), 2u);

  const Result ft = run({"finetune", "--base", (dir / "m1.bin").string(), "--freeze-conv", "--manifest",
                         manifest, "--epochs", "1", "--out", (dir / "ft.bin").string()});
  ASSERT_EQ(ft.code, cli::kExitOk) << ft.err;
  const Model base = load_model(dir / "m1.bin");
  const Model tuned = load_model(dir / "ft.bin");
  EXPECT_EQ(base.params[0].weight.data, tuned.params[0].weight.data);

  const Result ev = run({"eval", "--manifest", manifest, "--model", (dir / "m1.bin").string(), "--report",
                         (dir / "r.json").string()});
  ASSERT_EQ(ev.code, cli::kExitOk) << ev.err;
  const auto report = nlohmann::json::parse(file_contents(dir / "r.json"));
  EXPECT_TRUE(report.contains("binary_fault"));
  std::size_t total = 0;
  for (const auto& row : report["confusion"]) {
    for (const auto& c : row) total += c.get<std::size_t>();
  }
  EXPECT_EQ(total, 3u);  // round(0.8 * 5) = 4 of 5 per class go to train

  // A 40000-sample stream gives one verdict at 33280.
  AudioClip longer = synth_clip(SynthParams{ClassLabel::kExtruderFault, 2, 40000});
  write_wav(longer, dir / "long.wav");
  const Result mon = run({"monitor", "--model", (dir / "m1.bin").string(), "--in", (dir / "long.wav").string(),
                          "--chunk", "777"});
  ASSERT_EQ(mon.code, cli::kExitOk) << mon.err;
  const auto verdict = nlohmann::json::parse(mon.out);
  EXPECT_DOUBLE_EQ(verdict["t_end"].get<double>(), 2.08);
}

}  // namespace
}  // namespace acfm
