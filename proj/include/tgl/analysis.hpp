#ifndef TGL_ANALYSIS_HPP
#define TGL_ANALYSIS_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tgl/dataset.hpp"
#include "tgl/model.hpp"
#include "tgl/rollout.hpp"
#include "tgl/topology.hpp"

namespace tgl {

// Half-open range of processed trial steps [begin, end).
struct StepWindow {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end > begin ? end - begin : 0; }
};

// The last `count` steps of a trial of `length` steps.
StepWindow final_steps(std::size_t length, std::size_t count);

// One row per node. Columns run trial-major, then step, then filter.
struct NodeFeatureStack {
  Tensor rows;  // [nodes x trials*steps*filters]
  std::size_t trials = 0;
  std::size_t steps = 0;
  std::size_t filters = 0;
};

// Last graph-conv layer outputs over `window` of every trial.
NodeFeatureStack extract_node_features(const ModelParams& params, const std::vector<Trial>& trials,
                                       const StepWindow& window);

struct GroupCentroid {
  std::string label;  // "finger/segment"
  double pc1 = 0.0;
  double pc2 = 0.0;
  std::size_t count = 0;
};

struct ClusterReport {
  Tensor coords;  // [nodes x 2]
  std::vector<std::string> labels;
  std::vector<GroupCentroid> centroids;  // sorted by label
  std::vector<double> explained_variance;
  std::optional<double> silhouette;  // empty when undefined
  bool zero_variance = false;
};

// Mean silhouette of `points` under `labels`. Empty unless there are between
// 2 and n-1 distinct labels. Singleton clusters score 0.
std::optional<double> silhouette_score(const Tensor& points, const std::vector<std::string>& labels);

// Two-component PCA with nodes as samples, scored by finger/segment groups.
ClusterReport pca_node_map(const NodeFeatureStack& stack, const HandTopology& topology);

struct ForceComparison {
  std::vector<double> difference;  // b - a per step
  double fraction_b_greater = 0.5;  // ties excluded, 0.5 when every step ties
  double final_quarter_mean_a = 0.0;
  double final_quarter_mean_b = 0.0;
};

// Mean over the last ceil(n/4) entries.
double final_quarter_mean(const std::vector<double>& series);

ForceComparison compare_force_traces(const std::vector<double>& a, const std::vector<double>& b);
ForceComparison compare_force_traces(const RolloutTrace& a, const RolloutTrace& b);

void write_pca_csv(const ClusterReport& report, const HandTopology& topology, const std::filesystem::path& path);
std::string pca_svg(const ClusterReport& report, const HandTopology& topology);

}  // namespace tgl

#endif  // TGL_ANALYSIS_HPP
