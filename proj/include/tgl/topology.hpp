#ifndef TGL_TOPOLOGY_HPP
#define TGL_TOPOLOGY_HPP

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tgl/tensor.hpp"

namespace tgl {

enum class Segment { fingertip, proximal_lower, proximal_upper, middle, distal, palm };
enum class Finger { thumb, index, middle, little, none };

std::string_view to_string(Segment s);
std::string_view to_string(Finger f);
Segment parse_segment(std::string_view s);
Finger parse_finger(std::string_view s);

struct SensorNode {
  std::size_t id = 0;
  Segment segment = Segment::palm;
  Finger finger = Finger::none;
  int row = 0;
  int col = 0;

  friend bool operator==(const SensorNode&, const SensorNode&) = default;
};

using Edge = std::pair<std::size_t, std::size_t>;

// Sensor graph: one node per tactile chip. Edges are unordered and stored
// with first < second; self-loops are never stored.
class HandTopology {
 public:
  HandTopology() = default;
  // Validates: ids are exactly 0..n-1, no self-loops, no duplicate or
  // dangling edges. Nodes are reordered by id and edges canonicalized.
  HandTopology(std::vector<SensorNode> nodes, std::vector<Edge> edges);

  const std::vector<SensorNode>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t size() const { return nodes_.size(); }
  std::vector<std::vector<std::size_t>> adjacency_lists() const;

  // "finger/segment", used as a cluster label.
  std::string group_label(std::size_t id) const;

  friend bool operator==(const HandTopology&, const HandTopology&) = default;

 private:
  std::vector<SensorNode> nodes_;
  std::vector<Edge> edges_;
};

// Dense normalized propagation operator S = D^-1/2 (A + I) D^-1/2.
struct PropagationMatrix {
  std::size_t n = 0;
  Tensor adjacency;             // A, binary
  Tensor adjacency_hat;         // A + I
  std::vector<double> degree;   // diagonal of D (row sums of A + I)
  Tensor s;
};

PropagationMatrix normalize_adjacency(const HandTopology& topology);

// Patch-level description of a sensorized hand.
struct PatchSpec {
  Segment segment;
  std::size_t rows;
  std::size_t cols;
};

struct FingerSpec {
  Finger finger;
  std::vector<PatchSpec> chain;  // palm side first, fingertip last
  std::size_t palm_patch;        // index into HandLayout::palm
  bool attach_to_side;           // stitch to the palm patch's first column instead of its first row
};

struct PalmPatchSpec {
  std::size_t grid_row;
  std::size_t grid_col;
  std::size_t rows;
  std::size_t cols;
};

struct HandLayout {
  std::vector<FingerSpec> fingers;
  std::vector<PalmPatchSpec> palm;
};

// 4 fingertips x 24 chips + 11 phalanx patches and 7 palm patches x 16 chips.
HandLayout default_hand_layout();
// 24-node miniature with the same finger/palm structure, for desk-scale runs.
HandLayout toy_hand_layout();

// Chips inside a patch are 4-connected on the patch grid; consecutive patches
// along a finger are stitched through their facing boundary rows; the first
// patch of each finger is stitched to its palm patch; palm patches that are
// grid neighbors are stitched through their shared boundary.
HandTopology build_hand(const HandLayout& layout);
HandTopology build_default_hand();
HandTopology build_toy_hand();

HandTopology load_topology(const std::filesystem::path& path);
HandTopology parse_topology(std::string_view json_text);
void save_topology(const HandTopology& topology, const std::filesystem::path& path);
std::string topology_to_json(const HandTopology& topology);

}  // namespace tgl

#endif  // TGL_TOPOLOGY_HPP
