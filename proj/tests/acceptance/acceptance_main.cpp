// Copyright 2026 The mammodp Authors
//
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

#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <string>

#include "acceptance/criteria.hpp"

namespace {

using mammodp::acceptance::Checker;
using mammodp::acceptance::Context;

struct Criterion {
  int id;
  const char* name;
  std::function<void(const Context&, Checker&)> run;
};

void Usage() {
  std::cerr << "usage: mammodp_acceptance [--work-dir DIR] [--only N[,N...]]\n";
}

}  // namespace

int main(int argc, char** argv) {
  namespace acc = mammodp::acceptance;
  Context ctx;
  ctx.work_dir = std::filesystem::temp_directory_path() / "mammodp_acceptance";
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--work-dir" && i + 1 < argc) {
      ctx.work_dir = argv[++i];
    } else if (arg == "--only" && i + 1 < argc) {
      std::string list = argv[++i];
      for (std::size_t pos = 0; pos < list.size();) {
        const std::size_t end = list.find(',', pos);
        only.insert(std::stoi(list.substr(pos, end - pos)));
        pos = end == std::string::npos ? list.size() : end + 1;
      }
    } else {
      Usage();
      return 2;
    }
  }
  std::filesystem::remove_all(ctx.work_dir);
  std::filesystem::create_directories(ctx.work_dir);

  const Criterion criteria[] = {
      {1, "accountant matches the high-precision RDP oracle", acc::CheckAccountant},
      {2, "noise calibration round trip", acc::CheckCalibration},
      {3, "clipping and noise", acc::CheckClippingAndNoise},
      {4, "Frechet distance", acc::CheckFrechet},
      {5, "curve metrics", acc::CheckCurves},
      {6, "GAN mechanics", acc::CheckGanMechanics},
      {7, "DP training harness", acc::CheckDpHarness},
      {8, "regime grid", acc::CheckRegimeGrid},
      {9, "synthesis report", acc::CheckSynthesisReport},
      {10, "ingestion geometry", acc::CheckIngestGeometry},
  };
  int failed = 0;
  for (const auto& criterion : criteria) {
    if (!only.empty() && !only.count(criterion.id)) continue;
    Checker checker;
    const auto t0 = std::chrono::steady_clock::now();
    std::string error;
    try {
      criterion.run(ctx, checker);
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool ok = error.empty() && checker.passed();
    failed += !ok;
    std::printf("criterion %2d: %s  %s (%s%s) [%.1fs]\n", criterion.id, ok ? "PASS" : "FAIL", criterion.name,
                checker.Summary().c_str(), error.empty() ? "" : ("; exception: " + error).c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
