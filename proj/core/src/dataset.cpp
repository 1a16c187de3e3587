// SPDX-License-Identifier: Apache-2.0

#include "adagpr/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "adagpr/format.hpp"
#include "adagpr/rng.hpp"

namespace adagpr {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string_view to_string(DatasetIssue issue) {
  switch (issue) {
    case DatasetIssue::kMissingFile: return "missing-file";
    case DatasetIssue::kMalformed: return "malformed";
    case DatasetIssue::kRaggedFeatures: return "ragged-features";
    case DatasetIssue::kRowCount: return "row-count";
    case DatasetIssue::kLabelRange: return "label-range";
    case DatasetIssue::kNodeRange: return "node-range";
    case DatasetIssue::kSplit: return "split";
  }
  return "unknown";
}

namespace {

ErrorCode code_for(DatasetIssue issue) {
  switch (issue) {
    case DatasetIssue::kMissingFile: return ErrorCode::kIo;
    case DatasetIssue::kNodeRange: return ErrorCode::kStructural;
    case DatasetIssue::kSplit: return ErrorCode::kSplit;
    default: return ErrorCode::kInput;
  }
}

[[noreturn]] void reject(DatasetIssue issue, const std::string& message) {
  throw DatasetError(issue, message);
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) reject(DatasetIssue::kMissingFile, "cannot open " + path.string());
  return in;
}

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

bool blank(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

template <typename F>
auto parse_or(DatasetIssue issue, const std::string& where, F&& parse) {
  try {
    return parse();
  } catch (const Error& e) {
    reject(issue, where + ": " + e.what());
  }
}

std::vector<int> read_labels(const fs::path& path) {
  std::ifstream in = open_input(path);
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (blank(line)) continue;
    const std::string where = path.filename().string() + ":" + std::to_string(line_no);
    const long long value =
        parse_or(DatasetIssue::kMalformed, where, [&] { return parse_integer(line, "label"); });
    if (value < 0 || value > 1'000'000) {
      reject(DatasetIssue::kLabelRange, where + ": label " + std::to_string(value) + " out of range");
    }
    labels.push_back(static_cast<int>(value));
  }
  return labels;
}

Matrix read_features(const fs::path& path, std::size_t n) {
  std::ifstream in = open_input(path);
  std::vector<double> values;
  std::size_t q = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (blank(line)) continue;
    const std::string where = path.filename().string() + ":" + std::to_string(line_no);
    const auto fields = split_fields(line, ',');
    if (rows == 0) {
      q = fields.size();
    } else if (fields.size() != q) {
      reject(DatasetIssue::kRaggedFeatures, where + ": row has " + std::to_string(fields.size()) +
                                                " values, expected " + std::to_string(q));
    }
    for (std::string_view f : fields) {
      values.push_back(
          parse_or(DatasetIssue::kMalformed, where, [&] { return parse_double(f, "feature"); }));
    }
    ++rows;
  }
  if (rows != n) {
    reject(DatasetIssue::kRowCount, path.filename().string() + " has " + std::to_string(rows) +
                                        " rows but labels.csv has " + std::to_string(n));
  }
  return Matrix(rows, q, std::move(values));
}

std::vector<Edge> read_edges(const fs::path& path, std::size_t n) {
  std::ifstream in = open_input(path);
  std::vector<Edge> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (blank(line) || line.front() == '#') continue;
    const std::string where = path.filename().string() + ":" + std::to_string(line_no);
    std::istringstream fields(line);
    std::string a, b, extra;
    if (!(fields >> a >> b) || (fields >> extra)) {
      reject(DatasetIssue::kMalformed, where + ": expected 'src<TAB>dst'");
    }
    NodeId ends[2];
    const std::string* tokens[2] = {&a, &b};
    for (int i = 0; i < 2; ++i) {
      const long long id = parse_or(DatasetIssue::kMalformed, where,
                                    [&] { return parse_integer(*tokens[i], "node id"); });
      if (id < 0 || static_cast<unsigned long long>(id) >= n) {
        reject(DatasetIssue::kNodeRange,
               where + ": node id " + std::to_string(id) + " >= N = " + std::to_string(n));
      }
      ends[i] = static_cast<NodeId>(id);
    }
    edges.emplace_back(ends[0], ends[1]);
  }
  return edges;
}

std::vector<std::size_t> read_id_list(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_array()) {
    reject(DatasetIssue::kSplit, std::string("split.json: missing array '") + key + "'");
  }
  std::vector<std::size_t> ids;
  for (const json& v : doc[key]) {
    if (!v.is_number_unsigned()) {
      reject(DatasetIssue::kSplit, std::string("split.json: non-integer id in '") + key + "'");
    }
    ids.push_back(v.get<std::size_t>());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

Split read_split(const fs::path& path, std::size_t n) {
  std::ifstream in = open_input(path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    reject(DatasetIssue::kSplit, "split.json: " + std::string(e.what()));
  }
  if (!doc.is_object()) reject(DatasetIssue::kSplit, "split.json: expected an object");
  Split split{read_id_list(doc, "train"), read_id_list(doc, "val"), read_id_list(doc, "test")};
  try {
    split.validate(n);
  } catch (const Error& e) {
    reject(DatasetIssue::kSplit, std::string("split.json: ") + e.what());
  }
  return split;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  require(static_cast<bool>(out), ErrorCode::kIo, "write failed for " + path.string());
}

Dataset assemble(std::string name, std::size_t n, std::vector<Edge> edges, Matrix features,
                 std::vector<int> labels, std::size_t classes) {
  Dataset d;
  d.name = std::move(name);
  d.graph = Graph(n, edges);
  d.features = std::move(features);
  d.labels = std::move(labels);
  d.num_classes = classes;
  d.validate();
  return d;
}

}  // namespace

DatasetError::DatasetError(DatasetIssue issue, const std::string& message)
    : Error(code_for(issue), std::string(to_string(issue)) + ": " + message), issue_(issue) {}

void Dataset::validate() const {
  const std::size_t n = graph.num_nodes();
  if (features.rows() != n || labels.size() != n) {
    reject(DatasetIssue::kRowCount, "graph has " + std::to_string(n) + " nodes, features " +
                                        std::to_string(features.rows()) + " rows, labels " +
                                        std::to_string(labels.size()));
  }
  if (n == 0) reject(DatasetIssue::kRowCount, "dataset has no nodes");
  std::vector<std::size_t> counts(num_classes, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes) {
      reject(DatasetIssue::kLabelRange, "label " + std::to_string(labels[i]) + " of node " +
                                            std::to_string(i) + " outside [0, " +
                                            std::to_string(num_classes) + ")");
    }
    ++counts[static_cast<std::size_t>(labels[i])];
  }
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (counts[c] == 0) {
      reject(DatasetIssue::kLabelRange, "class " + std::to_string(c) + " has no nodes; labels must cover [0, " +
                                            std::to_string(num_classes) + ")");
    }
  }
  if (split) {
    try {
      split->validate(n);
    } catch (const Error& e) {
      reject(DatasetIssue::kSplit, e.what());
    }
  }
}

Dataset load_dataset(const fs::path& dir) {
  for (const char* file : {"graph.edges", "features.csv", "labels.csv"}) {
    if (!fs::is_regular_file(dir / file)) {
      reject(DatasetIssue::kMissingFile, "missing " + (dir / file).string());
    }
  }
  std::vector<int> labels = read_labels(dir / "labels.csv");
  const std::size_t n = labels.size();
  if (n == 0) reject(DatasetIssue::kRowCount, "labels.csv is empty");
  Matrix features = read_features(dir / "features.csv", n);
  std::vector<Edge> edges = read_edges(dir / "graph.edges", n);
  const std::size_t classes =
      static_cast<std::size_t>(*std::max_element(labels.begin(), labels.end())) + 1;

  std::string name = fs::path(dir).lexically_normal().filename().string();
  if (name.empty()) name = fs::path(dir).lexically_normal().parent_path().filename().string();
  Dataset d = assemble(name, n, std::move(edges), std::move(features), std::move(labels), classes);
  if (fs::exists(dir / "split.json")) d.split = read_split(dir / "split.json", n);
  return d;
}

void write_dataset(const Dataset& dataset, const fs::path& dir) {
  dataset.validate();
  fs::create_directories(dir);

  std::string edges;
  for (const auto& [u, v] : dataset.graph.edges()) {
    if (u < v) edges += std::to_string(u) + '\t' + std::to_string(v) + '\n';
  }
  write_text(dir / "graph.edges", edges);

  std::string features;
  for (std::size_t r = 0; r < dataset.features.rows(); ++r) {
    const auto row = dataset.features.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) features += ',';
      features += format_shortest(row[c]);
    }
    features += '\n';
  }
  write_text(dir / "features.csv", features);

  std::string labels;
  for (int y : dataset.labels) labels += std::to_string(y) + '\n';
  write_text(dir / "labels.csv", labels);

  if (dataset.split) {
    const json doc = {{"train", dataset.split->train},
                      {"val", dataset.split->val},
                      {"test", dataset.split->test}};
    write_text(dir / "split.json", doc.dump() + '\n');
  }
}

void row_normalize(Matrix& features) {
  for (std::size_t r = 0; r < features.rows(); ++r) {
    auto row = features.row(r);
    double norm = 0.0;
    for (double v : row) norm += std::abs(v);
    if (norm == 0.0) continue;
    for (double& v : row) v /= norm;
  }
}

namespace {

std::vector<Edge> sample_block_edges(const std::vector<int>& block, double p_in, double p_out,
                                     Rng& rng) {
  std::vector<Edge> edges;
  const std::size_t n = block.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double p = block[i] == block[j] ? p_in : p_out;
      if (rng.uniform() < p) edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
    }
  }
  return edges;
}

Matrix noisy_means(const std::vector<int>& labels, std::size_t dim, double noise, Rng& rng) {
  Matrix x(labels.size(), dim, 0.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    x(i, static_cast<std::size_t>(labels[i]) % dim) = 1.0;
    if (noise > 0.0) {
      for (std::size_t c = 0; c < dim; ++c) x(i, c) += noise * gauss(rng.engine());
    }
  }
  return x;
}

void check_probability(double p, const char* name) {
  require(p >= 0.0 && p <= 1.0, ErrorCode::kParameter, std::string(name) + " must lie in [0, 1]");
}

}  // namespace

Dataset generate_sbm(const SbmOptions& o) {
  require(o.n_per_block >= 1 && o.num_blocks >= 1, ErrorCode::kParameter,
          "SBM blocks must be non-empty");
  check_probability(o.p_in, "p_in");
  check_probability(o.p_out, "p_out");
  require(o.feature_dim >= o.num_blocks, ErrorCode::kParameter,
          "SBM needs feature_dim >= num_blocks");
  require(o.noise >= 0.0, ErrorCode::kParameter, "noise must be >= 0");
  Rng rng(o.seed);
  const std::size_t n = o.n_per_block * o.num_blocks;
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i / o.n_per_block);
  std::vector<Edge> edges = sample_block_edges(labels, o.p_in, o.p_out, rng);
  Matrix x = noisy_means(labels, o.feature_dim, o.noise, rng);
  return assemble("sbm", n, std::move(edges), std::move(x), std::move(labels), o.num_blocks);
}

Dataset generate_heterophilous(const HeterophilousOptions& o) {
  require(o.n >= 4, ErrorCode::kParameter, "heterophilous generator needs n >= 4");
  require(o.num_classes >= 2 && o.num_classes <= o.n, ErrorCode::kParameter,
          "heterophilous generator needs 2 <= classes <= n");
  require(o.feature_dim >= o.num_classes, ErrorCode::kParameter,
          "heterophilous generator needs feature_dim >= classes");
  require(o.degree_in >= 0.0 && o.degree_out >= 0.0 && o.noise >= 0.0, ErrorCode::kParameter,
          "degrees and noise must be >= 0");
  const double n = static_cast<double>(o.n);
  const double k = static_cast<double>(o.num_classes);
  const double per_class = n / k;
  const double p_in = std::min(1.0, o.degree_in / std::max(per_class - 1.0, 1.0));
  const double p_out = std::min(1.0, o.degree_out / (n - per_class));
  require(p_out > p_in, ErrorCode::kParameter, "heterophilous generator needs p_out > p_in");
  Rng rng(o.seed);
  std::vector<int> labels(o.n);
  for (std::size_t i = 0; i < o.n; ++i) {
    labels[i] = static_cast<int>(i * o.num_classes / o.n);
  }
  std::vector<Edge> edges = sample_block_edges(labels, p_in, p_out, rng);
  Matrix x = noisy_means(labels, o.feature_dim, o.noise, rng);
  return assemble("heterophilous", o.n, std::move(edges), std::move(x), std::move(labels),
                  o.num_classes);
}

double edge_homophily(const Dataset& dataset) {
  const auto& edges = dataset.graph.edges();
  if (edges.empty()) return 0.0;
  std::size_t same = 0;
  for (const auto& [u, v] : edges) same += dataset.labels[u] == dataset.labels[v] ? 1 : 0;
  return static_cast<double>(same) / static_cast<double>(edges.size());
}

}  // namespace adagpr
