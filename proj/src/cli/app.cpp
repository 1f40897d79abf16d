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

#include "hcnas/cli/app.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>

#include "CLI11.hpp"
#include "hcnas/cli/config.hpp"
#include "hcnas/errors.hpp"
#include "hcnas/graph/dot.hpp"
#include "hcnas/graph/serialize.hpp"
#include "hcnas/graph/shapes.hpp"
#include "json.hpp"

namespace hcnas::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Problems with input files or datasets (exit 3).
class DataError : public Error {
 public:
  using Error::Error;
};

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + tmp.string());
    f << text;
    if (!f.flush()) throw Error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

template <typename F>
auto as_data(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const DataError&) {
    throw;
  } catch (const Error& e) {
    throw DataError(e.what());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(e.what());
  }
}

graph::Graph read_graph(const std::string& path, json* attachments = nullptr) {
  if (!fs::exists(path)) throw DataError("no such graph file: " + path);
  return as_data([&] { return graph::load_graph(path, attachments); });
}

json read_json(const std::string& path) {
  if (!fs::exists(path)) throw DataError("no such file: " + path);
  return as_data([&] { return json::parse(data::read_file(path)); });
}

json history_json(const std::vector<search::StepRecord>& history) {
  json h = json::array();
  for (const auto& s : history) {
    h.push_back({{"step", s.step},
                 {"child_scores", s.child_scores},
                 {"best_accuracy", s.best_accuracy},
                 {"selected_child", s.selected_child}});
  }
  return h;
}

json image_shape_json(const graph::ImageShape& s) { return json::array({s.channels, s.height, s.width}); }

// Options shared by commands that resolve a RunConfig.
struct ConfigArgs {
  std::string config_path;
  std::vector<std::string> sets;

  RunConfig resolve(const GetEnv& getenv_fn) const {
    RunConfig cfg;
    if (!config_path.empty()) {
      if (!fs::exists(config_path)) throw ConfigError("no such config file: " + config_path);
      cfg = parse_config(data::read_file(config_path));
    }
    apply_env_overrides(cfg, getenv_fn);
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
  }
};

void add_config_args(CLI::App* cmd, ConfigArgs& a) {
  cmd->add_option("--config", a.config_path, "key = value config file");
  cmd->add_option("--set", a.sets, "override one config key (key=value); repeatable");
}

data::Dataset load_data(const DatasetConfig& d) {
  if (d.kind != "synthetic" && !d.data_dir.empty() && !fs::is_directory(d.data_dir)) {
    throw DataError("no such data directory: " + d.data_dir);
  }
  return as_data([&] { return load_dataset(d); });
}

void check_compatible(const graph::Graph& g, const data::Dataset& d) {
  if (!(g.input_shape() == d.image_shape()) || g.num_classes() != d.num_classes) {
    throw DataError("graph expects input " + graph::to_string(g.input_shape()) + " with " +
                    std::to_string(g.num_classes()) + " classes; dataset '" + d.name + "' has " +
                    graph::to_string(d.image_shape()) + " with " + std::to_string(d.num_classes));
  }
}

// ------------------------------------------------------------------ search

struct SearchArgs {
  ConfigArgs config;
  std::string out_dir;
  std::size_t jobs = 0;
  bool quiet = false;
};

int cmd_search(const SearchArgs& a, std::ostream& out, std::ostream& err, const GetEnv& getenv_fn) {
  RunConfig cfg = a.config.resolve(getenv_fn);
  if (a.jobs != 0) cfg.search.jobs = a.jobs;
  cfg.search.validate();
  const data::Dataset data = load_data(cfg.dataset);

  const fs::path dir(a.out_dir);
  fs::create_directories(dir / kCheckpointDir);
  fs::create_directories(dir / kChildrenDir);

  json keys = json::object();
  for (const auto& k : config_keys()) keys[k] = get_config_value(cfg, k);
  const json manifest = {
      {"manifest_version", kManifestVersion},
      {"config_text", to_config_text(cfg)},
      {"config", keys},
      {"dataset",
       {{"name", data.name},
        {"digest_sha256", data.digest},
        {"num_classes", data.num_classes},
        {"image_shape", image_shape_json(data.image_shape())},
        {"train_size", data.train.size()},
        {"test_size", data.test.size()},
        {"normalization", {{"mean", data.mean}, {"stddev", data.stddev}}}}},
      {"format_versions", {{"graph", graph::kFormatVersion}, {"metrics_csv", search::kMetricsCsvVersion}}},
      {"started_at", utc_now()},
      {"outputs",
       {{"metrics", kMetricsFile},
        {"checkpoints", kCheckpointDir},
        {"children", kChildrenDir},
        {"best_graph", kBestGraphFile},
        {"best_dot", kBestDotFile},
        {"summary", kSummaryFile}}},
  };
  write_text(dir / kManifestFile, manifest.dump(2) + "\n");

  std::ofstream metrics(dir / kMetricsFile, std::ios::trunc);
  if (!metrics) throw Error("cannot write " + (dir / kMetricsFile).string());
  metrics << search::metrics_csv_header() << '\n' << std::flush;

  std::vector<search::StepRecord> history;
  auto save_checkpoint = [&](std::size_t step, const search::Candidate& c) {
    const json att = {{"step", step},
                      {"val_accuracy", c.val_accuracy},
                      {"val_loss", c.val_loss},
                      {"epochs_trained", c.epochs_trained},
                      {"history", history_json(history)},
                      {"morph_log", morph::to_json(c.morph_log)}};
    graph::save_graph((dir / checkpoint_name(step)).string(), c.graph, att);
  };

  std::mutex log_mu;
  search::SearchHooks hooks;
  hooks.on_candidate = [&](const search::CandidateRecord& r) {
    metrics << search::metrics_csv_row(r) << '\n' << std::flush;
  };
  hooks.on_seed = [&](const search::Candidate& seed) { save_checkpoint(0, seed); };
  hooks.on_step = [&](const search::StepRecord& s, const search::Candidate& incumbent) {
    history.push_back(s);
    save_checkpoint(s.step, incumbent);
  };
  const morph::MorphOptions mopts = cfg.search.morph_options();
  const bool save_children = cfg.save_children;
  hooks.on_child_morphed = [&dir, mopts, save_children](std::size_t step, std::size_t i, const search::Candidate&,
                                                        const search::Candidate& child) {
    const std::string stem = child_stem(step, i);
    const json j = {{"step", step},
                    {"child", i},
                    {"parent", checkpoint_name(step - 1)},
                    {"options",
                     {{"aging_spread", mopts.aging.spread},
                      {"aging_cutoff", mopts.aging.cutoff},
                      {"aging_numerator", mopts.aging.numerator},
                      {"strict_fc_cap", mopts.strict_fc_cap}}},
                    {"log", morph::to_json(child.morph_log)}};
    write_text(dir / (stem + ".morphlog.json"), j.dump(1) + "\n");
    if (save_children) graph::save_graph((dir / (stem + ".graph")).string(), child.graph);
  };
  if (!a.quiet) {
    hooks.log = [&](const std::string& s) {
      std::lock_guard lock(log_mu);
      err << s << '\n' << std::flush;
    };
  }

  search::SearchResult result = search::hill_climb(cfg.search, data, hooks);
  const search::EvalResult test = search::evaluate(result.best.graph, data.test);

  const json best_att = {{"val_accuracy", result.best.val_accuracy},
                         {"val_loss", result.best.val_loss},
                         {"test_accuracy", test.accuracy},
                         {"test_loss", test.loss},
                         {"seed_accuracy", result.seed_accuracy},
                         {"epochs_trained", result.best.epochs_trained},
                         {"history", history_json(result.history)},
                         {"morph_log", morph::to_json(result.best.morph_log)}};
  graph::save_graph((dir / kBestGraphFile).string(), result.best.graph, best_att);
  write_text(dir / kBestDotFile, graph::to_dot(result.best.graph));
  const json summary = {{"finished_at", utc_now()},
                        {"total_seconds", result.total_seconds},
                        {"seed_accuracy", result.seed_accuracy},
                        {"val_accuracy", result.best.val_accuracy},
                        {"test_accuracy", test.accuracy},
                        {"test_loss", test.loss},
                        {"node_count", result.best.graph.topology().node_count()},
                        {"parameter_count", result.best.graph.parameter_count()},
                        {"history", history_json(result.history)}};
  write_text(dir / kSummaryFile, summary.dump(2) + "\n");

  char line[160];
  std::snprintf(line, sizeof line, "seed_val_accuracy %.6f\nval_accuracy %.6f\ntest_accuracy %.6f\n",
                result.seed_accuracy, result.best.val_accuracy, test.accuracy);
  out << line << "best_graph " << (dir / kBestGraphFile).string() << '\n';
  return kExitOk;
}

// -------------------------------------------------------------------- eval

struct EvalArgs {
  ConfigArgs config;
  std::string graph_path;
  std::string dataset;
  std::string data_dir;
  std::string split = "test";
};

int cmd_eval(const EvalArgs& a, std::ostream& out, const GetEnv& getenv_fn) {
  RunConfig cfg = a.config.resolve(getenv_fn);
  if (!a.dataset.empty()) set_config_value(cfg, "dataset", a.dataset);
  if (!a.data_dir.empty()) cfg.dataset.data_dir = a.data_dir;
  graph::Graph g = read_graph(a.graph_path);
  const data::Dataset data = load_data(cfg.dataset);
  check_compatible(g, data);
  const data::Split& split = a.split == "train" ? data.train : data.test;
  const search::EvalResult r = search::evaluate(g, split);
  char line[128];
  std::snprintf(line, sizeof line, "accuracy %.6f\nloss %.6f\nsamples %zu\n", r.accuracy, r.loss, split.size());
  out << line;
  return kExitOk;
}

// --------------------------------------------------------- export / inspect

int cmd_export_dot(const std::string& graph_path, const std::string& out_path, std::ostream& out) {
  const graph::Graph g = read_graph(graph_path);
  const std::string dot = graph::to_dot(g);
  if (out_path.empty()) {
    out << dot;
  } else {
    write_text(out_path, dot);
  }
  return kExitOk;
}

int cmd_inspect(const std::string& graph_path, std::ostream& out) {
  json att;
  const graph::Graph g = read_graph(graph_path, &att);
  const graph::ShapeMap shapes = graph::infer_shapes(g);
  out << "input " << graph::to_string(g.input_shape()) << "  classes " << g.num_classes() << "  fc_width "
      << g.fc_width() << '\n';
  char row[256];
  std::snprintf(row, sizeof row, "%-12s %-8s %-20s %-24s %-14s %10s %6s\n", "node", "kind", "hyper", "parents",
                "output", "params", "alpha");
  out << row;
  for (graph::NodeId id : g.topo_order()) {
    std::string parents;
    for (graph::NodeId p : g.parents(id)) parents += (parents.empty() ? "" : ",") + g.display_name(p);
    if (parents.empty()) parents = "-";
    const std::size_t params = g.parameter_count(id);
    const std::string hyper = graph::describe_spec(g.spec(id));
    char alpha[16] = "-";
    if (g.aging().alpha.contains(id)) std::snprintf(alpha, sizeof alpha, "%.4f", g.aging().multiplier(id));
    std::snprintf(row, sizeof row, "%-12s %-8s %-20s %-24s %-14s %10zu %6s\n", g.display_name(id).c_str(),
                  graph::kind_label(g.spec(id)).c_str(), hyper.empty() ? "-" : hyper.c_str(), parents.c_str(),
                  graph::to_string(shapes.at(id)).c_str(), params, alpha);
    out << row;
  }
  out << "nodes " << g.topology().node_count() << "  edges " << g.topology().edge_count() << '\n';
  out << "parameters " << g.parameter_count() << '\n';
  out << "frozen " << g.aging().frozen.size() << '\n';
  if (att.is_object()) {
    for (const char* k : {"step", "val_accuracy", "test_accuracy"}) {
      if (att.contains(k)) out << k << ' ' << att[k].dump() << '\n';
    }
  }
  return kExitOk;
}

// ------------------------------------------------------------------ replay

struct ReplayArgs {
  std::string graph_path;
  std::string log_path;
  std::string out_path;
  std::string expect_path;
};

int cmd_replay(const ReplayArgs& a, std::ostream& out, std::ostream& err) {
  const graph::Graph parent = read_graph(a.graph_path);
  const json doc = read_json(a.log_path);
  morph::MorphOptions opts;
  const morph::MorphLog log = as_data([&] {
    // Either a bare morph log or the wrapper written by `search`.
    if (!doc.contains("log")) return morph::morph_log_from_json(doc);
    if (doc.contains("options")) {
      const json& o = doc.at("options");
      opts.aging.spread = o.at("aging_spread").get<double>();
      opts.aging.cutoff = o.at("aging_cutoff").get<std::size_t>();
      opts.aging.numerator = o.at("aging_numerator").get<double>();
      opts.strict_fc_cap = o.at("strict_fc_cap").get<bool>();
    }
    return morph::morph_log_from_json(doc.at("log"));
  });
  opts.init = log.init;
  const graph::Graph child = as_data([&] { return morph::replay(parent, log, opts); });
  out << "replayed " << log.entries.size() << " morphisms: " << morph::kinds_summary(log) << '\n';
  out << "nodes " << child.topology().node_count() << "  parameters " << child.parameter_count() << '\n';
  if (!a.out_path.empty()) graph::save_graph(a.out_path, child);
  if (!a.expect_path.empty()) {
    const graph::Graph expected = read_graph(a.expect_path);
    const bool same = child == expected;
    out << "graph-equal " << (same ? "yes" : "no") << '\n';
    if (!same) {
      err << "hcnas: replayed child differs from " << a.expect_path << '\n';
      return kExitRuntime;
    }
  }
  return kExitOk;
}

}  // namespace

std::string checkpoint_name(std::size_t step) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s/step_%03zu.graph", kCheckpointDir, step);
  return buf;
}

std::string child_stem(std::size_t step, std::size_t child) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s/step_%03zu_child_%02zu", kChildrenDir, step, child);
  return buf;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const GetEnv& getenv_fn) {
  CLI::App app{"Hill-climbing architecture search with network morphisms", "hcnas"};
  app.require_subcommand(1);

  SearchArgs search_args;
  auto* search_cmd = app.add_subcommand("search", "run a hill-climbing search");
  add_config_args(search_cmd, search_args.config);
  search_cmd->add_option("--out", search_args.out_dir, "output directory")->required();
  search_cmd->add_option("--jobs", search_args.jobs, "concurrent neighbor trainings (overrides config)")
      ->check(CLI::PositiveNumber);
  search_cmd->add_flag("--quiet", search_args.quiet, "no progress log");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "score a graph on a dataset split");
  add_config_args(eval_cmd, eval_args.config);
  eval_cmd->add_option("--graph", eval_args.graph_path, "graph checkpoint")->required();
  eval_cmd->add_option("--dataset", eval_args.dataset, "synthetic, mnist or cifar10");
  eval_cmd->add_option("--data-dir", eval_args.data_dir, "dataset directory");
  eval_cmd->add_option("--split", eval_args.split, "test or train")->check(CLI::IsMember({"test", "train"}));

  std::string dot_graph, dot_out;
  auto* dot_cmd = app.add_subcommand("export-dot", "write a graph as Graphviz DOT");
  dot_cmd->add_option("--graph", dot_graph, "graph checkpoint")->required();
  dot_cmd->add_option("--out", dot_out, "output file (default stdout)");

  std::string inspect_graph;
  auto* inspect_cmd = app.add_subcommand("inspect", "print nodes, shapes and parameter count");
  inspect_cmd->add_option("--graph", inspect_graph, "graph checkpoint")->required();

  ReplayArgs replay_args;
  auto* replay_cmd = app.add_subcommand("replay", "re-apply a morph log to a parent graph");
  replay_cmd->add_option("--graph", replay_args.graph_path, "parent graph checkpoint")->required();
  replay_cmd->add_option("--log", replay_args.log_path, "morph log JSON")->required();
  replay_cmd->add_option("--out", replay_args.out_path, "write the child here");
  replay_cmd->add_option("--expect", replay_args.expect_path, "compare against this graph");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*search_cmd) return cmd_search(search_args, out, err, getenv_fn);
    if (*eval_cmd) return cmd_eval(eval_args, out, getenv_fn);
    if (*dot_cmd) return cmd_export_dot(dot_graph, dot_out, out);
    if (*inspect_cmd) return cmd_inspect(inspect_graph, out);
    if (*replay_cmd) return cmd_replay(replay_args, out, err);
  } catch (const ConfigError& e) {
    err << "hcnas: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    err << "hcnas: data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "hcnas: error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}

}  // namespace hcnas::cli
