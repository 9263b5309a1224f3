// Copyright (c) 2026 cfesched contributors
// SPDX-License-Identifier: Apache-2.0
//
// Shared fixtures for the test binaries.

#pragma once

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "cfe/model.hpp"

namespace cfe::test {

// Small heterogeneous testbed: 2 edge, 1 fog, 1 cloud. Exhaustive search
// over 4^T placements stays cheap, which the independent oracles rely on.
inline Infrastructure tiny_infra() {
  std::vector<Node> nodes = {
      {1, Layer::edge, 1000.0, 1024.0},
      {2, Layer::edge, 1200.0, 1024.0},
      {3, Layer::fog, 2500.0, 2048.0},
      {4, Layer::cloud, 5000.0, 4096.0},
  };
  return Infrastructure(std::move(nodes),
                        {Layer::edge, Layer::fog, 0.010, 100.0},
                        {Layer::fog, Layer::cloud, 0.020, 50.0});
}

inline Workflow chain(std::vector<Task> tasks, Level level = Level::L1,
                      std::string id = "wf-test") {
  Workflow wf;
  wf.id = std::move(id);
  wf.level = level;
  wf.tasks = std::move(tasks);
  return wf;
}

// Fresh per-test scratch directory under the system temp root.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    base_ = (std::filesystem::temp_directory_path() /
             ("cfe_" + tag + "_" + std::to_string(counter_++)))
                .string();
    std::filesystem::remove_all(base_);
    std::filesystem::create_directories(base_);
  }
  ~TempDir() { std::filesystem::remove_all(base_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::string& path() const { return base_; }
  std::string file(const std::string& name) const { return base_ + "/" + name; }

 private:
  static inline int counter_ = 0;
  std::string base_;
};

inline std::string slurp(const std::string& path) {
  std::string out;
  if (FILE* f = std::fopen(path.c_str(), "rb")) {
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof(buf), f)) > 0) out.append(buf, n);
    std::fclose(f);
  }
  return out;
}

inline void spit(const std::string& path, const std::string& text) {
  FILE* f = std::fopen(path.c_str(), "wb");
  if (f != nullptr) {
    std::fwrite(text.data(), 1, text.size(), f);
    std::fclose(f);
  }
}

}  // namespace cfe::test
