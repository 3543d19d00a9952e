// Copyright 2026 The Authors.
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

#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "json.hpp"

#include "gdpnet/graph.hpp"

namespace gdpnet {

enum class GraphFormat { kEdgeList, kJson };

/// Input locations. For kJson only `graph` is used; for kEdgeList `graph` is
/// the edge file and `features`/`labels`/`splits` are optional companions.
struct GraphSources {
  std::filesystem::path graph;
  std::filesystem::path features;
  std::filesystem::path labels;
  std::filesystem::path splits;
  std::uint64_t split_seed = 0;
};

struct LoadedGraph {
  Graph graph;
  // original_ids[dense id] = id as written in the input.
  std::vector<std::string> original_ids;
};

namespace detail {

inline std::ifstream open_input(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw ValidationError("cannot open input file '" + p.string() + "'");
  return in;
}

inline std::ofstream open_output(const std::filesystem::path& p) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot open output file '" + p.string() + "'");
  return out;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view tok, const std::filesystem::path& file,
               std::size_t line_no) {
  T value{};
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ValidationError(file.string() + ":" + std::to_string(line_no) +
                          ": cannot parse '" + std::string(tok) + "'");
  }
  return value;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline Matrix read_feature_file(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  std::vector<double> data;
  std::size_t rows = 0, cols = 0, line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    auto toks = detail::split_ws(line);
    if (toks.empty()) continue;
    if (rows == 0) cols = toks.size();
    if (toks.size() != cols) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": feature row has " + std::to_string(toks.size()) +
                            " values, expected " + std::to_string(cols));
    }
    for (auto t : toks) data.push_back(detail::parse_number<double>(t, path, line_no));
    ++rows;
  }
  return Matrix(rows, cols, std::move(data));
}

inline std::vector<ClassId> read_label_file(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  std::vector<ClassId> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto toks = detail::split_ws(line);
    if (toks.empty()) continue;
    require(toks.size() == 1, path.string() + ":" + std::to_string(line_no) +
                                  ": expected one label per line");
    labels.push_back(detail::parse_number<ClassId>(toks[0], path, line_no));
  }
  return labels;
}

/// Split file: one "node<TAB>train|val|test" pair per line (dense ids).
inline std::vector<Split> read_split_file(const std::filesystem::path& path,
                                          std::size_t num_nodes) {
  auto in = detail::open_input(path);
  std::vector<Split> splits(num_nodes, Split::kNone);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto toks = detail::split_ws(line);
    if (toks.empty()) continue;
    require(toks.size() == 2, path.string() + ":" + std::to_string(line_no) +
                                  ": expected 'node split'");
    const auto v = detail::parse_number<NodeId>(toks[0], path, line_no);
    require(v < num_nodes, path.string() + ": dangling node id " + std::to_string(v));
    if (toks[1] == "train") splits[v] = Split::kTrain;
    else if (toks[1] == "val") splits[v] = Split::kVal;
    else if (toks[1] == "test") splits[v] = Split::kTest;
    else throw ValidationError(path.string() + ": unknown split '" + std::string(toks[1]) + "'");
  }
  return splits;
}

/// Edge list plus optional features/labels.
///
/// With a feature file, node ids are dense integers [0, rows) and any other id
/// is a dangling-id error. Without one, ids are arbitrary tokens remapped to
/// dense ids in order of first appearance and features are one-hot identity.
inline LoadedGraph load_edge_list_graph(const GraphSources& src) {
  const bool dense = !src.features.empty();
  Matrix features;
  std::size_t n = 0;
  if (dense) {
    features = read_feature_file(src.features);
    n = features.rows();
  }

  std::vector<Edge> edges;
  std::vector<std::string> ids;
  std::map<std::string, NodeId, std::less<>> remap;
  auto intern = [&](std::string_view tok) {
    auto it = remap.find(tok);
    if (it != remap.end()) return it->second;
    const NodeId id = ids.size();
    ids.emplace_back(tok);
    remap.emplace(std::string(tok), id);
    return id;
  };

  auto in = detail::open_input(src.graph);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto toks = detail::split_ws(line);
    if (toks.empty() || toks[0].front() == '#') continue;
    require(toks.size() == 2, src.graph.string() + ":" + std::to_string(line_no) +
                                  ": expected 'src dst'");
    if (dense) {
      edges.emplace_back(detail::parse_number<NodeId>(toks[0], src.graph, line_no),
                         detail::parse_number<NodeId>(toks[1], src.graph, line_no));
    } else {
      const NodeId u = intern(toks[0]);
      const NodeId v = intern(toks[1]);
      edges.emplace_back(u, v);
    }
  }

  if (dense) {
    ids.resize(n);
    for (NodeId v = 0; v < n; ++v) ids[v] = std::to_string(v);
  } else {
    n = ids.size();
    features = Matrix(n, n);
    for (NodeId v = 0; v < n; ++v) features(v, v) = 1.0;
  }

  std::vector<ClassId> labels;
  if (!src.labels.empty()) {
    labels = read_label_file(src.labels);
    require(labels.size() == n, "label file has " + std::to_string(labels.size()) +
                                    " rows for " + std::to_string(n) + " nodes");
  } else {
    labels.assign(n, 0);
  }

  std::vector<Split> splits;
  if (!src.splits.empty()) {
    splits = read_split_file(src.splits, n);
  } else {
    Rng rng(derive_seed(src.split_seed, 3));
    splits = stratified_split(labels, 0.6, 0.2, rng);
  }
  return {Graph::from_edges(n, edges, std::move(features), std::move(labels),
                            std::move(splits)),
          std::move(ids)};
}

inline nlohmann::json graph_to_json(const Graph& g) {
  nlohmann::json j;
  j["n"] = g.num_nodes();
  auto edges = nlohmann::json::array();
  for (const auto& [u, v] : g.edges()) edges.push_back({u, v});
  j["edges"] = std::move(edges);
  auto feats = nlohmann::json::array();
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    auto row = g.feature(v);
    feats.push_back(std::vector<double>(row.begin(), row.end()));
  }
  j["features"] = std::move(feats);
  j["labels"] = g.labels();
  j["masks"] = {{"train", g.nodes_in(Split::kTrain)},
                {"val", g.nodes_in(Split::kVal)},
                {"test", g.nodes_in(Split::kTest)}};
  return j;
}

inline Graph graph_from_json(const nlohmann::json& j) {
  try {
    const auto n = j.at("n").get<std::size_t>();
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) {
      require(e.is_array() && e.size() == 2, "edge entries must be [u, v] pairs");
      edges.emplace_back(e[0].get<NodeId>(), e[1].get<NodeId>());
    }
    const auto& fj = j.at("features");
    require(fj.size() == n, "features array has " + std::to_string(fj.size()) +
                                " rows for " + std::to_string(n) + " nodes");
    const std::size_t dim = n == 0 ? 0 : fj[0].size();
    Matrix features(n, dim);
    for (NodeId v = 0; v < n; ++v) {
      require(fj[v].size() == dim, "feature-dimension mismatch at row " + std::to_string(v));
      for (std::size_t k = 0; k < dim; ++k) features(v, k) = fj[v][k].get<double>();
    }
    std::vector<ClassId> labels;
    if (j.contains("labels")) labels = j["labels"].get<std::vector<ClassId>>();
    std::vector<Split> splits(n, Split::kNone);
    if (j.contains("masks")) {
      for (auto [name, which] : {std::pair{"train", Split::kTrain},
                                 std::pair{"val", Split::kVal},
                                 std::pair{"test", Split::kTest}}) {
        if (!j["masks"].contains(name)) continue;
        const auto& m = j["masks"][name];
        const bool boolean = !m.empty() && m[0].is_boolean();
        if (boolean) require(m.size() == n, std::string(name) + " mask length != n");
        for (std::size_t i = 0; i < m.size(); ++i) {
          NodeId v = i;
          if (boolean) {
            if (!m[i].get<bool>()) continue;
          } else {
            v = m[i].get<NodeId>();
            require(v < n, std::string(name) + " mask has dangling id " + std::to_string(v));
          }
          require(splits[v] == Split::kNone, "masks overlap at node " + std::to_string(v));
          splits[v] = which;
        }
      }
    }
    return Graph::from_edges(n, edges, std::move(features), std::move(labels),
                             std::move(splits));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed graph json: ") + e.what());
  }
}

inline Graph load_json_graph(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return graph_from_json(j);
}

inline LoadedGraph load_graph(const GraphSources& src, GraphFormat format) {
  if (format == GraphFormat::kEdgeList) return load_edge_list_graph(src);
  LoadedGraph out{load_json_graph(src.graph), {}};
  for (NodeId v = 0; v < out.graph.num_nodes(); ++v) out.original_ids.push_back(std::to_string(v));
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = detail::open_output(path);
  out << text;
  if (!out) throw RuntimeFailure("write failed: " + path.string());
}

inline void save_json_graph(const Graph& g, const std::filesystem::path& path) {
  write_text(path, graph_to_json(g).dump() + "\n");
}

inline std::string edge_list_text(std::span<const Edge> edges) {
  std::string s;
  for (const auto& [u, v] : edges) s += std::to_string(u) + " " + std::to_string(v) + "\n";
  return s;
}

/// Writes edges.txt, features.tsv and labels.txt under `dir`.
inline void save_edge_list_graph(const Graph& g, const std::filesystem::path& dir) {
  write_text(dir / "edges.txt", edge_list_text(g.edges()));
  std::string feats;
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    auto row = g.feature(v);
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) feats += '\t';
      feats += detail::format_double(row[k]);
    }
    feats += '\n';
  }
  write_text(dir / "features.tsv", feats);
  std::string labels;
  for (ClassId c : g.labels()) labels += std::to_string(c) + "\n";
  write_text(dir / "labels.txt", labels);
  std::string splits;
  for (NodeId v = 0; v < g.num_nodes(); ++v)
    splits += std::to_string(v) + " " + split_name(g.split(v)) + "\n";
  write_text(dir / "splits.txt", splits);
}

}  // namespace gdpnet
