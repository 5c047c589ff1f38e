#include "tgl/topology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "json.hpp"

namespace tgl {

using nlohmann::json;

namespace {

constexpr std::pair<Segment, std::string_view> kSegmentNames[] = {
    {Segment::fingertip, "fingertip"}, {Segment::proximal_lower, "proximal_lower"},
    {Segment::proximal_upper, "proximal_upper"}, {Segment::middle, "middle"},
    {Segment::distal, "distal"}, {Segment::palm, "palm"},
};

constexpr std::pair<Finger, std::string_view> kFingerNames[] = {
    {Finger::thumb, "thumb"}, {Finger::index, "index"}, {Finger::middle, "middle"},
    {Finger::little, "little"}, {Finger::none, "none"},
};

struct Patch {
  std::size_t first_id;
  std::size_t rows;
  std::size_t cols;
  std::size_t id(std::size_t r, std::size_t c) const { return first_id + r * cols + c; }
  std::vector<std::size_t> row(std::size_t r) const {
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < cols; ++c) out.push_back(id(r, c));
    return out;
  }
  std::vector<std::size_t> col(std::size_t c) const {
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < rows; ++r) out.push_back(id(r, c));
    return out;
  }
};

class GraphBuilder {
 public:
  Patch add_patch(Finger finger, Segment segment, std::size_t rows, std::size_t cols) {
    Patch p{nodes_.size(), rows, cols};
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        nodes_.push_back({nodes_.size(), segment, finger, static_cast<int>(r), static_cast<int>(c)});
      }
    }
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        if (c + 1 < cols) connect(p.id(r, c), p.id(r, c + 1));
        if (r + 1 < rows) connect(p.id(r, c), p.id(r + 1, c));
      }
    }
    return p;
  }

  // Pairs each chip of the longer boundary with the proportionally nearest
  // chip of the shorter one.
  void stitch(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    const auto& longer = a.size() >= b.size() ? a : b;
    const auto& shorter = a.size() >= b.size() ? b : a;
    for (std::size_t i = 0; i < longer.size(); ++i) {
      std::size_t j = 0;
      if (longer.size() > 1) {
        j = static_cast<std::size_t>(
            std::lround(static_cast<double>(i * (shorter.size() - 1)) / static_cast<double>(longer.size() - 1)));
      }
      connect(longer[i], shorter[j]);
    }
  }

  HandTopology finish() {
    return HandTopology(std::move(nodes_), std::vector<Edge>(edges_.begin(), edges_.end()));
  }

 private:
  void connect(std::size_t a, std::size_t b) {
    if (a != b) edges_.insert({std::min(a, b), std::max(a, b)});
  }

  std::vector<SensorNode> nodes_;
  std::set<Edge> edges_;
};

}  // namespace

std::string_view to_string(Segment s) {
  for (const auto& [value, name] : kSegmentNames)
    if (value == s) return name;
  return "?";
}

std::string_view to_string(Finger f) {
  for (const auto& [value, name] : kFingerNames)
    if (value == f) return name;
  return "?";
}

Segment parse_segment(std::string_view s) {
  for (const auto& [value, name] : kSegmentNames)
    if (name == s) return value;
  throw ValidationError("unknown segment '" + std::string(s) + "'");
}

Finger parse_finger(std::string_view s) {
  for (const auto& [value, name] : kFingerNames)
    if (name == s) return value;
  throw ValidationError("unknown finger '" + std::string(s) + "'");
}

HandTopology::HandTopology(std::vector<SensorNode> nodes, std::vector<Edge> edges) : nodes_(std::move(nodes)) {
  const std::size_t n = nodes_.size();
  if (n == 0) throw ValidationError("topology has no nodes");
  std::sort(nodes_.begin(), nodes_.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < n; ++i) {
    if (nodes_[i].id != i) {
      throw ValidationError("node ids must be contiguous 0.." + std::to_string(n - 1) + "; missing or repeated id near " +
                            std::to_string(i));
    }
  }
  std::set<Edge> seen;
  for (auto [a, b] : edges) {
    if (a >= n || b >= n) {
      throw ValidationError("edge (" + std::to_string(a) + ", " + std::to_string(b) + ") references a dangling node id; " +
                            std::to_string(n) + " nodes exist");
    }
    if (a == b) throw ValidationError("self-loop edge on node " + std::to_string(a));
    Edge e{std::min(a, b), std::max(a, b)};
    if (!seen.insert(e).second) {
      throw ValidationError("duplicate edge (" + std::to_string(e.first) + ", " + std::to_string(e.second) + ")");
    }
  }
  edges_.assign(seen.begin(), seen.end());
}

std::vector<std::vector<std::size_t>> HandTopology::adjacency_lists() const {
  std::vector<std::vector<std::size_t>> adj(nodes_.size());
  for (auto [a, b] : edges_) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  return adj;
}

std::string HandTopology::group_label(std::size_t id) const {
  const auto& node = nodes_.at(id);
  return std::string(to_string(node.finger)) + "/" + std::string(to_string(node.segment));
}

PropagationMatrix normalize_adjacency(const HandTopology& topology) {
  const std::size_t n = topology.size();
  PropagationMatrix p;
  p.n = n;
  p.adjacency = Tensor({n, n});
  for (auto [a, b] : topology.edges()) {
    p.adjacency.at(a, b) = 1.0;
    p.adjacency.at(b, a) = 1.0;
  }
  p.adjacency_hat = p.adjacency;
  for (std::size_t i = 0; i < n; ++i) p.adjacency_hat.at(i, i) += 1.0;
  p.degree.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) p.degree[i] += p.adjacency_hat.at(i, j);

  p.s = Tensor({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      // one sqrt of the product keeps S bitwise symmetric and exact for square degrees
      if (p.adjacency_hat.at(i, j) != 0.0)
        p.s.at(i, j) = p.adjacency_hat.at(i, j) / std::sqrt(p.degree[i] * p.degree[j]);
    }
  }
  return p;
}

HandLayout default_hand_layout() {
  const PatchSpec pp1{Segment::proximal_lower, 4, 4};
  const PatchSpec pp2{Segment::proximal_upper, 4, 4};
  const PatchSpec mp{Segment::middle, 4, 4};
  const PatchSpec dp{Segment::distal, 4, 4};
  const PatchSpec tip{Segment::fingertip, 6, 4};
  HandLayout layout;
  layout.fingers = {
      {Finger::index, {pp1, pp2, mp, tip}, 0, false},
      {Finger::middle, {pp1, pp2, mp, tip}, 1, false},
      {Finger::little, {pp1, pp2, mp, tip}, 2, false},
      {Finger::thumb, {mp, dp, tip}, 6, true},
  };
  layout.palm = {
      {0, 1, 4, 4}, {0, 2, 4, 4}, {0, 3, 4, 4}, {1, 1, 4, 4}, {1, 2, 4, 4}, {1, 3, 4, 4}, {1, 0, 4, 4},
  };
  return layout;
}

HandLayout toy_hand_layout() {
  const PatchSpec pp1{Segment::proximal_lower, 1, 2};
  const PatchSpec tip{Segment::fingertip, 1, 2};
  HandLayout layout;
  layout.fingers = {
      {Finger::index, {pp1, tip}, 0, false},
      {Finger::middle, {pp1, tip}, 1, false},
      {Finger::little, {pp1, tip}, 1, false},
      {Finger::thumb, {pp1, tip}, 0, true},
  };
  layout.palm = {{0, 0, 2, 2}, {0, 1, 2, 2}};
  return layout;
}

HandTopology build_hand(const HandLayout& layout) {
  GraphBuilder g;
  std::vector<Patch> finger_bases;
  for (const auto& finger : layout.fingers) {
    if (finger.chain.empty()) throw ValidationError("finger with no sensor patches");
    std::optional<Patch> prev;
    for (const auto& spec : finger.chain) {
      Patch p = g.add_patch(finger.finger, spec.segment, spec.rows, spec.cols);
      if (prev) {
        g.stitch(prev->row(prev->rows - 1), p.row(0));
      } else {
        finger_bases.push_back(p);
      }
      prev = p;
    }
  }
  std::vector<Patch> palm;
  for (const auto& spec : layout.palm) palm.push_back(g.add_patch(Finger::none, Segment::palm, spec.rows, spec.cols));

  for (std::size_t a = 0; a < palm.size(); ++a) {
    for (std::size_t b = 0; b < palm.size(); ++b) {
      const auto& sa = layout.palm[a];
      const auto& sb = layout.palm[b];
      if (sa.grid_row == sb.grid_row && sa.grid_col + 1 == sb.grid_col) {
        g.stitch(palm[a].col(palm[a].cols - 1), palm[b].col(0));
      }
      if (sa.grid_col == sb.grid_col && sa.grid_row + 1 == sb.grid_row) {
        g.stitch(palm[a].row(palm[a].rows - 1), palm[b].row(0));
      }
    }
  }
  for (std::size_t f = 0; f < layout.fingers.size(); ++f) {
    const auto& spec = layout.fingers[f];
    if (spec.palm_patch >= palm.size()) throw ValidationError("finger attached to a missing palm patch");
    const Patch& target = palm[spec.palm_patch];
    g.stitch(finger_bases[f].row(0), spec.attach_to_side ? target.col(0) : target.row(0));
  }
  return g.finish();
}

HandTopology build_default_hand() { return build_hand(default_hand_layout()); }
HandTopology build_toy_hand() { return build_hand(toy_hand_layout()); }

HandTopology parse_topology(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("topology parse error: ") + e.what());
  }
  auto field = [](const json& obj, const char* key, const std::string& where) -> const json& {
    if (!obj.is_object() || !obj.contains(key)) throw ValidationError("topology: missing field " + where + "." + key);
    return obj.at(key);
  };
  std::vector<SensorNode> nodes;
  std::vector<Edge> edges;
  try {
    const json& jn = field(doc, "nodes", "$");
    if (!jn.is_array()) throw ValidationError("topology: $.nodes must be an array");
    for (std::size_t i = 0; i < jn.size(); ++i) {
      const std::string where = "nodes[" + std::to_string(i) + "]";
      const json& n = jn[i];
      const json& id = field(n, "id", where);
      if (!id.is_number_integer() || id.get<long long>() < 0) {
        throw ValidationError("topology: " + where + ".id must be a non-negative integer");
      }
      SensorNode node;
      node.id = id.get<std::size_t>();
      try {
        node.segment = parse_segment(field(n, "segment", where).get<std::string>());
        node.finger = parse_finger(field(n, "finger", where).get<std::string>());
      } catch (const ValidationError& e) {
        throw ValidationError("topology: " + where + ": " + e.what());
      }
      node.row = field(n, "row", where).get<int>();
      node.col = field(n, "col", where).get<int>();
      nodes.push_back(node);
    }
    const json& je = field(doc, "edges", "$");
    if (!je.is_array()) throw ValidationError("topology: $.edges must be an array");
    for (std::size_t i = 0; i < je.size(); ++i) {
      const json& e = je[i];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer() ||
          e[0].get<long long>() < 0 || e[1].get<long long>() < 0) {
        throw ValidationError("topology: edges[" + std::to_string(i) + "] must be a pair of non-negative integers");
      }
      edges.emplace_back(e[0].get<std::size_t>(), e[1].get<std::size_t>());
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("topology: bad field type: ") + e.what());
  }
  return HandTopology(std::move(nodes), std::move(edges));
}

HandTopology load_topology(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open topology file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_topology(buf.str());
}

std::string topology_to_json(const HandTopology& topology) {
  // One node or edge per line keeps the file diffable.
  std::string out = "{\n  \"nodes\": [\n";
  const auto& nodes = topology.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    const nlohmann::ordered_json j = {{"id", n.id},
                                      {"segment", std::string(to_string(n.segment))},
                                      {"finger", std::string(to_string(n.finger))},
                                      {"row", n.row},
                                      {"col", n.col}};
    out += "    " + j.dump() + (i + 1 < nodes.size() ? ",\n" : "\n");
  }
  out += "  ],\n  \"edges\": [\n";
  const auto& edges = topology.edges();
  for (std::size_t i = 0; i < edges.size(); ++i) {
    out += "    [" + std::to_string(edges[i].first) + ", " + std::to_string(edges[i].second) + "]" +
           (i + 1 < edges.size() ? ",\n" : "\n");
  }
  out += "  ]\n}\n";
  return out;
}

void save_topology(const HandTopology& topology, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write topology file " + path.string());
  out << topology_to_json(topology);
}

}  // namespace tgl
