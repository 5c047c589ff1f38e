#include "tgl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "tgl/error.hpp"
#include "tgl/pca.hpp"

namespace tgl {

StepWindow final_steps(std::size_t length, std::size_t count) {
  if (count == 0 || count > length) {
    throw ValidationError("final-step window of " + std::to_string(count) + " does not fit a trial of " +
                          std::to_string(length) + " steps");
  }
  return {length - count, length};
}

NodeFeatureStack extract_node_features(const ModelParams& params, const std::vector<Trial>& trials,
                                       const StepWindow& window) {
  if (params.conv_weights.empty()) throw ValidationError("model has no conv features (MLP has no graph layers)");
  if (window.size() == 0) throw ValidationError("feature window is empty");
  if (trials.empty()) throw ValidationError("no trials to extract features from");
  const std::size_t n = params.node_count;
  const std::size_t filters = params.conv_weights.back().shape()[1];
  const std::size_t steps = window.size();
  const std::size_t per_trial = steps * filters;

  NodeFeatureStack stack;
  stack.trials = trials.size();
  stack.steps = steps;
  stack.filters = filters;
  stack.rows = Tensor({n, trials.size() * per_trial});
  for (std::size_t k = 0; k < trials.size(); ++k) {
    const Trial& trial = trials[k];
    if (trial.node_count() != n) {
      throw DimensionError("trial " + std::to_string(k) + " has " + std::to_string(trial.node_count()) +
                           " nodes, model expects " + std::to_string(n));
    }
    if (window.end > trial.size()) {
      throw ValidationError("feature window ends at step " + std::to_string(window.end) + " but trial " +
                            std::to_string(k) + " has " + std::to_string(trial.size()) + " steps");
    }
    ModelInput in;
    in.batch = steps;
    in.tactile = Tensor({steps * n, kTactileAxes});
    in.aux = Tensor({steps, kJointCount + kLabelCount});
    for (std::size_t s = 0; s < steps; ++s) {
      const auto& r = trial.records[window.begin + s];
      std::copy(r.tactile.begin(), r.tactile.end(), in.tactile.data().begin() + s * n * kTactileAxes);
      auto aux = in.aux.data().begin() + s * (kJointCount + kLabelCount);
      std::copy(r.joints.begin(), r.joints.end(), aux);
      std::copy(r.labels.begin(), r.labels.end(), aux + kJointCount);
    }
    ForwardCapture cap;
    forward(params, in, &cap);
    for (std::size_t s = 0; s < steps; ++s)
      for (std::size_t node = 0; node < n; ++node)
        for (std::size_t f = 0; f < filters; ++f)
          stack.rows.at(node, k * per_trial + s * filters + f) = cap.last_conv.at(s * n + node, f);
  }
  return stack;
}

std::optional<double> silhouette_score(const Tensor& points, const std::vector<std::string>& labels) {
  const std::size_t n = points.rows(), d = points.cols();
  if (labels.size() != n) throw DimensionError("silhouette: one label per point required");
  std::map<std::string, std::size_t> ids;
  for (const auto& l : labels) ids.emplace(l, ids.size());
  const std::size_t k = ids.size();
  if (k < 2 || k > n - 1) return std::nullopt;
  std::vector<std::size_t> cluster(n), sizes(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    cluster[i] = ids.at(labels[i]);
    ++sizes[cluster[i]];
  }
  double total = 0.0;
  std::vector<double> dist_sum(k);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(dist_sum.begin(), dist_sum.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = points.at(i, c) - points.at(j, c);
        s += diff * diff;
      }
      dist_sum[cluster[j]] += std::sqrt(s);
    }
    const std::size_t own = cluster[i];
    if (sizes[own] == 1) continue;  // contributes 0
    const double a = dist_sum[own] / static_cast<double>(sizes[own] - 1);
    double b = INFINITY;
    for (std::size_t c = 0; c < k; ++c) {
      if (c != own) b = std::min(b, dist_sum[c] / static_cast<double>(sizes[c]));
    }
    const double m = std::max(a, b);
    if (m > 0.0) total += (b - a) / m;
  }
  return total / static_cast<double>(n);
}

ClusterReport pca_node_map(const NodeFeatureStack& stack, const HandTopology& topology) {
  const std::size_t n = stack.rows.rows(), dims = stack.rows.cols();
  if (n != topology.size()) {
    throw DimensionError("feature stack has " + std::to_string(n) + " rows for a " + std::to_string(topology.size()) +
                         "-node hand");
  }
  if (n < 2 || dims == 0) throw ValidationError("feature stack needs at least 2 nodes and 1 feature");
  ClusterReport report;
  report.coords = Tensor({n, 2});
  for (std::size_t i = 0; i < n; ++i) report.labels.push_back(topology.group_label(i));

  const std::size_t k = std::min<std::size_t>(2, dims);
  const PcaResult fit = pca(stack.rows, k);
  report.explained_variance = fit.explained_variance;
  report.explained_variance.resize(2, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < k; ++c) report.coords.at(i, c) = fit.projected.at(i, c);
  report.zero_variance = report.explained_variance[0] == 0.0;

  std::map<std::string, GroupCentroid> groups;
  for (std::size_t i = 0; i < n; ++i) {
    auto& g = groups[report.labels[i]];
    g.label = report.labels[i];
    g.pc1 += report.coords.at(i, 0);
    g.pc2 += report.coords.at(i, 1);
    ++g.count;
  }
  for (auto& [label, g] : groups) {
    g.pc1 /= static_cast<double>(g.count);
    g.pc2 /= static_cast<double>(g.count);
    report.centroids.push_back(g);
  }
  if (!report.zero_variance) report.silhouette = silhouette_score(report.coords, report.labels);
  return report;
}

double final_quarter_mean(const std::vector<double>& series) {
  if (series.empty()) throw ValidationError("final_quarter_mean of an empty series");
  const std::size_t count = (series.size() + 3) / 4;
  double s = 0.0;
  for (std::size_t i = series.size() - count; i < series.size(); ++i) s += series[i];
  return s / static_cast<double>(count);
}

ForceComparison compare_force_traces(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw DimensionError("force traces differ in length: " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
  }
  if (a.empty()) throw ValidationError("force traces are empty");
  ForceComparison out;
  std::size_t greater = 0, decided = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.difference.push_back(b[i] - a[i]);
    if (b[i] != a[i]) {
      ++decided;
      if (b[i] > a[i]) ++greater;
    }
  }
  if (decided > 0) out.fraction_b_greater = static_cast<double>(greater) / static_cast<double>(decided);
  out.final_quarter_mean_a = final_quarter_mean(a);
  out.final_quarter_mean_b = final_quarter_mean(b);
  return out;
}

ForceComparison compare_force_traces(const RolloutTrace& a, const RolloutTrace& b) {
  return compare_force_traces(a.grip_forces(), b.grip_forces());
}

void write_pca_csv(const ClusterReport& report, const HandTopology& topology, const std::filesystem::path& path) {
  if (report.coords.rows() != topology.size()) throw DimensionError("PCA map does not match the hand");
  std::ofstream out(path);
  if (!out) throw Error("cannot write PCA map " + path.string());
  out << "node_id,finger,segment,pc1,pc2\n";
  for (const auto& node : topology.nodes()) {
    out << node.id << "," << to_string(node.finger) << "," << to_string(node.segment) << ","
        << format_double(report.coords.at(node.id, 0)) << "," << format_double(report.coords.at(node.id, 1)) << "\n";
  }
  if (!out) throw Error("failed writing PCA map " + path.string());
}

namespace {

const char* finger_color(Finger f) {
  switch (f) {
    case Finger::thumb: return "#d62728";
    case Finger::index: return "#1f77b4";
    case Finger::middle: return "#2ca02c";
    case Finger::little: return "#9467bd";
    case Finger::none: return "#7f7f7f";
  }
  return "#000000";
}

}  // namespace

std::string pca_svg(const ClusterReport& report, const HandTopology& topology) {
  if (report.coords.rows() != topology.size()) throw DimensionError("PCA map does not match the hand");
  const double size = 480.0, margin = 40.0;
  double lo[2] = {INFINITY, INFINITY}, hi[2] = {-INFINITY, -INFINITY};
  for (std::size_t i = 0; i < report.coords.rows(); ++i)
    for (int c = 0; c < 2; ++c) {
      lo[c] = std::min(lo[c], report.coords.at(i, c));
      hi[c] = std::max(hi[c], report.coords.at(i, c));
    }
  auto px = [&](double v, int c) {
    const double span = hi[c] - lo[c] > 0.0 ? hi[c] - lo[c] : 1.0;
    const double u = (v - lo[c]) / span;
    return c == 0 ? margin + u * (size - 2 * margin) : size - margin - u * (size - 2 * margin);
  };
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const auto& node : topology.nodes()) {
    const double x = px(report.coords.at(node.id, 0), 0), y = px(report.coords.at(node.id, 1), 1);
    svg << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"4\" fill=\"" << finger_color(node.finger)
        << "\" fill-opacity=\"0.7\"><title>" << node.id << " " << topology.group_label(node.id)
        << "</title></circle>\n";
  }
  for (const auto& g : report.centroids) {
    svg << "<text x=\"" << px(g.pc1, 0) + 6 << "\" y=\"" << px(g.pc2, 1) << "\" font-size=\"9\">" << g.label
        << "</text>\n";
  }
  svg << "<text x=\"" << margin << "\" y=\"" << size - 10 << "\" font-size=\"11\">pc1</text>\n";
  svg << "<text x=\"10\" y=\"" << margin << "\" font-size=\"11\">pc2</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace tgl
