#ifndef TGL_PCA_HPP
#define TGL_PCA_HPP

#include <vector>

#include "tgl/tensor.hpp"

namespace tgl {

struct PcaResult {
  Tensor components;  // [k x dims], orthonormal rows
  Tensor projected;   // [samples x k]
  std::vector<double> explained_variance;  // non-increasing, sample variance (n - 1)
  std::vector<double> mean;                // per-dimension mean removed before the fit
};

// Thin-SVD PCA of mean-centered rows. Each component's sign is fixed so its
// first non-negligible loading is positive.
PcaResult pca(const Tensor& data, std::size_t k);

}  // namespace tgl

#endif  // TGL_PCA_HPP
