// Copyright 2026 The hcnas Authors.
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


// Writes DOT exports of random graphs plus an index of their node and edge
// counts, for an external grammar check.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "hcnas/graph/dot.hpp"
#include "support/helpers.hpp"

int main(int argc, char** argv) {
  if (argc != 3) {
    std::fprintf(stderr, "usage: dot_samples <out-dir> <count>\n");
    return 2;
  }
  const std::filesystem::path dir(argv[1]);
  std::filesystem::create_directories(dir);
  const int count = std::stoi(argv[2]);
  hcnas::Rng rng(20260101);
  std::ofstream index(dir / "index.txt");
  for (int i = 0; i < count; ++i) {
    const auto g = hcnas::testing::random_graph(rng, hcnas::uniform_index(rng, 8));
    const std::string name = "g" + std::to_string(i) + ".dot";
    std::ofstream(dir / name) << hcnas::graph::to_dot(g);
    index << name << ' ' << g.topology().node_count() << ' ' << g.topology().edge_count() << '\n';
  }
  return 0;
}
