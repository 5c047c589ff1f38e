#include "tgl/pca.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace tgl {

namespace {
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
}

PcaResult pca(const Tensor& data, std::size_t k) {
  const std::size_t n = data.rows(), d = data.cols();
  if (n < 2) throw ValidationError("pca needs at least 2 samples, got " + std::to_string(n));
  if (k < 1 || k > std::min(n, d)) {
    throw ValidationError("pca: k=" + std::to_string(k) + " outside [1, " + std::to_string(std::min(n, d)) + "]");
  }

  Eigen::Map<const RowMatrix> x(data.data().data(), n, d);
  Eigen::RowVectorXd mean = x.colwise().mean();
  RowMatrix centered = x.rowwise() - mean;

  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const Eigen::MatrixXd& v = svd.matrixV();

  PcaResult out;
  out.components = Tensor({k, d});
  out.mean.assign(mean.data(), mean.data() + d);
  const double scale = sigma.size() > 0 ? sigma(0) : 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    double sign = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      if (std::abs(v(j, c)) > 1e-12) {
        sign = v(j, c) < 0.0 ? -1.0 : 1.0;
        break;
      }
    }
    for (std::size_t j = 0; j < d; ++j) out.components.at(c, j) = sign * v(j, c);
    double s = c < static_cast<std::size_t>(sigma.size()) ? sigma(c) : 0.0;
    // Round-off level singular values of a rank-deficient matrix count as zero.
    if (s <= 1e-13 * std::max(scale, 1.0)) s = 0.0;
    out.explained_variance.push_back(s * s / static_cast<double>(n - 1));
  }

  Tensor centered_t({n, d}, std::vector<double>(centered.data(), centered.data() + n * d));
  out.projected = matmul(centered_t, out.components.transposed());
  return out;
}

}  // namespace tgl
