// Copyright 2026 planetnerf contributors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "planetnerf/field.hpp"
#include "planetnerf/solar.hpp"

using namespace planetnerf;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kWork = fs::temp_directory_path() / "pnf_cli";

int run(const std::string& args) {
  const std::string cmd = std::string(PLANETNERF_BIN) + " " + args + " > " +
                          (kWork / "stdout.txt").string() + " 2> " +
                          (kWork / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string last_stdout() {
  std::ifstream f(kWork / "stdout.txt");
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string file_bytes(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(f)), {});
}

struct Fixture {
  Fixture() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
  }
};

const std::string kTinyNet =
    " --width 10 --depth 2 --skip-layer -1 --ns 6 --rays-per-batch 24 --batches-per-epoch 2"
    " --sun-hidden 5 --uncertainty-hidden 5";

}  // namespace

TEST_CASE("cli end to end") {
  Fixture fx;
  const std::string data = (kWork / "bundle").string();

  // --- synth ---
  REQUIRE(run("synth --out " + data + " --views 12 --grid 12 --seed 7 --test-months 7") == 0);
  CHECK(fs::exists(data + "/images"));
  CHECK(fs::exists(data + "/metadata"));
  CHECK(fs::exists(data + "/dsm.tif"));
  CHECK(fs::exists(data + "/bounds.json"));
  CHECK(fs::exists(data + "/split.json"));
  CHECK(fs::exists(data + "/oracle_manifest.json"));

  // Determinism: regenerating yields bit-identical files.
  const std::string data2 = (kWork / "bundle2").string();
  REQUIRE(run("synth --out " + data2 + " --views 12 --grid 12 --seed 7 --test-months 7") == 0);
  for (const auto& entry : fs::recursive_directory_iterator(data)) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), data);
    CHECK(file_bytes(entry.path()) == file_bytes(data2 / rel));
  }

  CHECK(run("synth --out " + (kWork / "bad").string() + " --grid 0") == 2);

  // --- train ---
  const std::string run_pn = (kWork / "run_pn").string();
  REQUIRE(run("train --data " + data + " --out " + run_pn +
              " --variant pn --epochs 3 --seed 1" + kTinyNet) == 0);
  CHECK(fs::exists(run_pn + "/checkpoint.ckpt"));
  {
    std::ifstream log(run_pn + "/metrics.jsonl");
    int lines = 0;
    std::string line;
    while (std::getline(log, line))
      if (!line.empty()) {
        const json j = json::parse(line);
        CHECK(j.contains("epoch"));
        CHECK(j.contains("loss"));
        CHECK(j.contains("psnr_train"));
        CHECK(j.contains("wall_seconds"));
        ++lines;
      }
    CHECK(lines == 3);
  }

  const std::string run_sn = (kWork / "run_sn").string();
  REQUIRE(run("train --data " + data + " --out " + run_sn +
              " --variant sn --epochs 1 --seed 1" + kTinyNet) == 0);
  {
    const Checkpoint sn = load_checkpoint(run_sn + "/checkpoint.ckpt");
    CHECK_FALSE(sn.params.config.use_month_embedding);
    CHECK(sn.params.month_embedding.size() == 0);
    CHECK(sn.params.season.empty());
  }

  CHECK(run("train --data " + data + " --out " + (kWork / "bad_run").string() +
            " --epochs 0" + kTinyNet) == 2);

  // --- render ---
  const std::string renders = (kWork / "renders").string();
  REQUIRE(run("render --checkpoint " + run_pn + "/checkpoint.ckpt --data " + data +
              " --out " + renders + " --month 2 --sun-date 2019-02-01T17:00:00Z") == 0);
  REQUIRE(run("render --checkpoint " + run_pn + "/checkpoint.ckpt --data " + data +
              " --out " + renders + " --month 2 --sun-date 2019-02-28T17:00:00Z") == 0);
  std::vector<fs::path> pngs;
  for (const auto& e : fs::directory_iterator(renders))
    if (e.path().extension() == ".png") pngs.push_back(e.path());
  REQUIRE(pngs.size() == 2);
  CHECK(file_bytes(pngs[0]) != file_bytes(pngs[1]));

  CHECK(run("render --checkpoint " + run_pn + "/checkpoint.ckpt --data " + data +
            " --out " + renders + " --month 13 --sun-date 2019-02-01T17:00:00Z") == 2);
  REQUIRE(run("render --checkpoint " + run_pn + "/checkpoint.ckpt --data " + data +
              " --out " + renders + " --month 2 --sun-from-metadata --image-id SYN_000_m01") ==
          0);

  // --- sweep ---
  const std::string sweep_dir = (kWork / "sweep").string();
  REQUIRE(run("sweep --checkpoint " + run_pn + "/checkpoint.ckpt --data " + data +
              " --out " + sweep_dir + " --months 3,9 --days 1,15,30") == 0);
  {
    std::ifstream mf(sweep_dir + "/sweep_manifest.json");
    REQUIRE(mf.good());
    const json manifest = json::parse(mf);
    CHECK(manifest.at("renders").size() == 6);
    CHECK(manifest.at("psnr_matrix").size() == 6);
    CHECK(manifest.at("psnr_matrix")[0].size() == 6);
    // Directions must match the ephemeris exactly.
    for (const auto& r : manifest.at("renders")) {
      DateTimeUtc t;
      t.year = 2019;
      t.month = r.at("month");
      t.day = r.at("day");
      t.hour = 17;
      const Eigen::Vector3d expect = sun_direction({t, 41.26, -95.93});
      CHECK(std::abs(double(r.at("enu")[0]) - expect.x()) < 1e-12);
      CHECK(std::abs(double(r.at("enu")[1]) - expect.y()) < 1e-12);
      CHECK(std::abs(double(r.at("enu")[2]) - expect.z()) < 1e-12);
    }
  }
  const std::string sweep_one = (kWork / "sweep_one").string();
  REQUIRE(run("sweep --checkpoint " + run_pn + "/checkpoint.ckpt --data " + data +
              " --out " + sweep_one + " --months 3 --days 15") == 0);
  {
    std::ifstream mf(sweep_one + "/sweep_manifest.json");
    CHECK(json::parse(mf).at("renders").size() == 1);
  }

  // --- eval ---
  const std::string eval_dir = (kWork / "eval").string();
  REQUIRE(run("eval --checkpoints " + run_pn + "/checkpoint.ckpt," + run_pn +
              "/checkpoint.ckpt --labels a,b --data " + data + " --out " + eval_dir) == 0);
  CHECK(fs::exists(eval_dir + "/report_a.json"));
  CHECK(fs::exists(eval_dir + "/report_b.json"));
  CHECK(fs::exists(eval_dir + "/report_table.txt"));
  {
    // Identical checkpoints score identically.
    json a = json::parse(std::ifstream(eval_dir + "/report_a.json"));
    json b = json::parse(std::ifstream(eval_dir + "/report_b.json"));
    a.erase("variant");
    b.erase("variant");
    CHECK(a == b);
  }
  CHECK(run("eval --checkpoints " + run_pn + "/checkpoint.ckpt --data " +
            (kWork / "missing").string() + " --out " + eval_dir) == 2);

  // --- sun-sweep ---
  REQUIRE(run("sun-sweep --months 3 --days 1,15,30 --hour 17 --lat 41.26 --lon -95.93") == 0);
  {
    const json arr = json::parse(last_stdout());
    REQUIRE(arr.size() == 3);
    for (const auto& e : arr) {
      CHECK(e.contains("date"));
      CHECK(e.contains("azimuth_deg"));
      CHECK(e.contains("elevation_deg"));
      CHECK(e.at("enu").size() == 3);
    }
  }

  // --- help documents the flags ---
  CHECK(run("--help") == 0);
  CHECK(last_stdout().find("synth") != std::string::npos);
  CHECK(run("train --help") == 0);
  const std::string train_help = last_stdout();
  for (const char* flag : {"--data", "--variant", "--epochs", "--seed", "--lambda-s"})
    CHECK(train_help.find(flag) != std::string::npos);
}
