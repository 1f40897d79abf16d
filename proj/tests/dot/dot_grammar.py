# Copyright 2026 The hcnas Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Parses DOT exports with pydot and checks node and edge counts."""

import pathlib
import sys

SKIP = 77

try:
    import pydot
except ImportError:
    print("pydot not installed; skipping")
    sys.exit(SKIP)


def main(directory):
    root = pathlib.Path(directory)
    failures = 0
    checked = 0
    for line in (root / "index.txt").read_text().splitlines():
        name, nodes, edges = line.split()
        graphs = pydot.graph_from_dot_file(str(root / name))
        if not graphs or len(graphs) != 1:
            print(f"{name}: did not parse as a single graph")
            failures += 1
            continue
        g = graphs[0]
        got_nodes = [n for n in g.get_nodes() if n.get_name() not in ("node", "edge", "graph")]
        got_edges = g.get_edges()
        if len(got_nodes) != int(nodes) or len(got_edges) != int(edges):
            print(f"{name}: {len(got_nodes)} nodes / {len(got_edges)} edges, expected {nodes} / {edges}")
            failures += 1
        checked += 1
    print(f"checked {checked} files, {failures} failures")
    return 1 if failures or checked == 0 else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1]))
