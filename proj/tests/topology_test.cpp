#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <queue>
#include <set>

#include "tgl/error.hpp"
#include "tgl/random.hpp"
#include "tgl/topology.hpp"

using namespace tgl;

namespace {

HandTopology line_graph(std::size_t n, std::vector<Edge> edges) {
  std::vector<SensorNode> nodes(n);
  for (std::size_t i = 0; i < n; ++i) nodes[i].id = i;
  return HandTopology(std::move(nodes), std::move(edges));
}

HandTopology random_topology(Rng& rng, std::size_t n) {
  std::set<Edge> edges;
  const std::size_t m = rng.below(n * 2 + 1);
  for (std::size_t k = 0; k < m; ++k) {
    std::size_t a = rng.below(n), b = rng.below(n);
    if (a == b) continue;
    edges.insert({std::min(a, b), std::max(a, b)});
  }
  return line_graph(n, {edges.begin(), edges.end()});
}

std::size_t component_count(const HandTopology& t) {
  const auto adj = t.adjacency_lists();
  std::vector<bool> seen(t.size(), false);
  std::size_t count = 0;
  for (std::size_t s = 0; s < t.size(); ++s) {
    if (seen[s]) continue;
    ++count;
    std::queue<std::size_t> q;
    q.push(s);
    seen[s] = true;
    while (!q.empty()) {
      const auto u = q.front();
      q.pop();
      for (auto v : adj[u])
        if (!seen[v]) {
          seen[v] = true;
          q.push(v);
        }
    }
  }
  return count;
}

// S is symmetric, so the dominant eigenvalue magnitude is the spectral norm.
double spectral_norm(const Tensor& s) {
  const std::size_t n = s.rows();
  std::vector<double> x(n, 1.0), y(n);
  double lambda = 0.0;
  for (int it = 0; it < 2000; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = 0.0;
      for (std::size_t j = 0; j < n; ++j) y[i] += s.at(i, j) * x[j];
    }
    double norm = 0.0;
    for (double v : y) norm += v * v;
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;
    lambda = norm;
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / norm;
  }
  return lambda;
}

double asymmetry(const Tensor& s) {
  double worst = 0.0;
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t j = 0; j < s.cols(); ++j) worst = std::max(worst, std::abs(s.at(i, j) - s.at(j, i)));
  return worst;
}

}  // namespace

TEST(DefaultHand, Has384NodesInPaperPatchCounts) {
  const HandTopology t = build_default_hand();
  EXPECT_EQ(t.size(), 384u);
  EXPECT_EQ(t.size(), 4u * 24 + (11 + 7) * 16);
  std::map<Segment, std::size_t> per_segment;
  for (const auto& n : t.nodes()) ++per_segment[n.segment];
  EXPECT_EQ(per_segment[Segment::fingertip], 96u);
  EXPECT_EQ(per_segment[Segment::palm], 112u);
  const std::size_t phalanx = per_segment[Segment::proximal_lower] + per_segment[Segment::proximal_upper] +
                              per_segment[Segment::middle] + per_segment[Segment::distal];
  EXPECT_EQ(phalanx, 11u * 16);
}

TEST(DefaultHand, IsConnected) {
  EXPECT_EQ(component_count(build_default_hand()), 1u);
  EXPECT_EQ(component_count(build_toy_hand()), 1u);
}

TEST(DefaultHand, PatchInteriorNodeHasDegreeFourInsideItsPatch) {
  const HandTopology t = build_default_hand();
  const auto adj = t.adjacency_lists();
  // First patch is the index finger's 4x4 proximal_lower patch; (1,1) is interior.
  std::size_t id = 0;
  for (const auto& n : t.nodes())
    if (n.finger == Finger::index && n.segment == Segment::proximal_lower && n.row == 1 && n.col == 1) id = n.id;
  std::size_t inside = 0;
  for (auto v : adj[id]) {
    const auto& m = t.nodes()[v];
    if (m.finger == Finger::index && m.segment == Segment::proximal_lower) ++inside;
  }
  EXPECT_EQ(inside, 4u);
}

TEST(DefaultHand, EveryFingerReachesThePalm) {
  const HandTopology t = build_default_hand();
  std::set<Finger> touching;
  for (auto [a, b] : t.edges()) {
    const auto &na = t.nodes()[a], &nb = t.nodes()[b];
    if (na.segment == Segment::palm && nb.segment != Segment::palm) touching.insert(nb.finger);
    if (nb.segment == Segment::palm && na.segment != Segment::palm) touching.insert(na.finger);
  }
  EXPECT_EQ(touching, (std::set<Finger>{Finger::thumb, Finger::index, Finger::middle, Finger::little}));
}

TEST(ToyHand, Has24Nodes) {
  const HandTopology t = build_toy_hand();
  EXPECT_EQ(t.size(), 24u);
  EXPECT_EQ(t.group_label(0), "index/proximal_lower");
}

TEST(Normalize, IsolatedNodeIsOne) {
  const auto p = normalize_adjacency(line_graph(1, {}));
  EXPECT_EQ(p.s, Tensor::matrix({{1.0}}));
}

TEST(Normalize, TwoNodesExactHalf) {
  const auto p = normalize_adjacency(line_graph(2, {{0, 1}}));
  EXPECT_EQ(p.s, Tensor::matrix({{0.5, 0.5}, {0.5, 0.5}}));
  EXPECT_EQ(p.adjacency_hat, Tensor::matrix({{1, 1}, {1, 1}}));
  EXPECT_EQ(p.degree, (std::vector<double>{2.0, 2.0}));
}

TEST(Normalize, PathOfThreeByHand) {
  const auto p = normalize_adjacency(line_graph(3, {{0, 1}, {1, 2}}));
  EXPECT_NEAR(p.s.at(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(p.s.at(0, 1), 1.0 / std::sqrt(6.0), 1e-15);
  EXPECT_NEAR(p.s.at(1, 1), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(p.s.at(0, 2), 0.0);
}

TEST(Normalize, FullHandSymmetricAndContractive) {
  const auto p = normalize_adjacency(build_default_hand());
  EXPECT_EQ(p.s.shape(), (Shape{384, 384}));
  EXPECT_LE(asymmetry(p.s), 1e-12);
  EXPECT_LE(spectral_norm(p.s), 1.0 + 1e-10);
}

TEST(Normalize, RandomTopologiesSymmetricContractiveAndSparse) {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const HandTopology t = random_topology(rng, 4 + rng.below(61));
    const auto p = normalize_adjacency(t);
    EXPECT_LE(asymmetry(p.s), 1e-12);
    EXPECT_LE(spectral_norm(p.s), 1.0 + 1e-10);
    const auto adj = t.adjacency_lists();
    for (std::size_t i = 0; i < t.size(); ++i) {
      std::set<std::size_t> support(adj[i].begin(), adj[i].end());
      support.insert(i);
      for (std::size_t j = 0; j < t.size(); ++j) EXPECT_EQ(p.s.at(i, j) != 0.0, support.count(j) == 1);
    }
  }
}

TEST(Normalize, RelabelingEquivariance) {
  Rng rng(78);
  const HandTopology t = random_topology(rng, 20);
  std::vector<std::size_t> perm(20);
  for (std::size_t i = 0; i < 20; ++i) perm[i] = i;
  rng.shuffle(perm);
  std::vector<Edge> moved;
  for (auto [a, b] : t.edges()) moved.push_back({perm[a], perm[b]});
  const auto s = normalize_adjacency(t).s;
  const auto sp = normalize_adjacency(line_graph(20, moved)).s;
  for (std::size_t i = 0; i < 20; ++i)
    for (std::size_t j = 0; j < 20; ++j) EXPECT_NEAR(sp.at(perm[i], perm[j]), s.at(i, j), 1e-15);
}

TEST(Topology, ValidationErrors) {
  EXPECT_THROW(line_graph(4, {{0, 999}}), ValidationError);
  EXPECT_THROW(line_graph(3, {{1, 1}}), ValidationError);
  EXPECT_THROW(line_graph(3, {{0, 1}, {1, 0}}), ValidationError);
  std::vector<SensorNode> gap(2);
  gap[0].id = 0;
  gap[1].id = 2;
  EXPECT_THROW(HandTopology(gap, {}), ValidationError);
}

TEST(TopologyJson, OneNodeNoEdgesIsValid) {
  const auto t = parse_topology(R"({"nodes":[{"id":0,"segment":"palm","finger":"none","row":0,"col":0}],"edges":[]})");
  EXPECT_EQ(t.size(), 1u);
  EXPECT_TRUE(t.edges().empty());
}

TEST(TopologyJson, DanglingEdgeNamesTheId) {
  std::string doc = R"({"nodes":[)";
  for (int i = 0; i < 4; ++i) {
    doc += std::string(i ? "," : "") + R"({"id":)" + std::to_string(i) +
           R"(,"segment":"palm","finger":"none","row":0,"col":)" + std::to_string(i) + "}";
  }
  doc += R"(],"edges":[[0,999]]})";
  try {
    parse_topology(doc);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("999"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("dangling"), std::string::npos) << e.what();
  }
}

TEST(TopologyJson, FieldErrorsNameTheField) {
  try {
    parse_topology(R"({"nodes":[{"id":0,"segment":"elbow","finger":"none","row":0,"col":0}],"edges":[]})");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("nodes[0]"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_topology(R"({"nodes":[{"id":0}],"edges":[]})"), ValidationError);
  EXPECT_THROW(parse_topology("{not json"), ValidationError);
  EXPECT_THROW(load_topology("/nonexistent/hand.json"), ValidationError);
}

TEST(TopologyJson, RoundTripAndBundledFile) {
  const HandTopology t = build_default_hand();
  EXPECT_EQ(parse_topology(topology_to_json(t)), t);
  const HandTopology bundled = load_topology(std::string(TGL_DATA_DIR) + "/allegro_uskin_384.json");
  EXPECT_EQ(bundled.size(), 384u);
  EXPECT_EQ(bundled, t);
  EXPECT_EQ(load_topology(std::string(TGL_DATA_DIR) + "/toy_hand_24.json"), build_toy_hand());
}
