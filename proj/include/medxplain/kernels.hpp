#pragma once

// Data-parallel inner loops behind attention_core and region thresholding.
// `omp` is what the library calls; `serial` is the straight-line reference
// the tests and benchmarks compare against. Both take pre-validated input.

#include <span>
#include <vector>

#include "medxplain/grid.hpp"

namespace medxplain::kernels {

namespace serial {
std::vector<double> channel_means(const Tensor3& t);
GridD weighted_relu_sum(const Tensor3& t, std::span<const double> weights);
GridD bilinear_resize(const GridD& src, std::size_t out_h, std::size_t out_w);
void scale_inplace(GridD& g, double factor);
double max_value(const GridD& g);
Mask threshold_strict(const GridD& g, double tau);
}  // namespace serial

namespace omp {
std::vector<double> channel_means(const Tensor3& t);
GridD weighted_relu_sum(const Tensor3& t, std::span<const double> weights);
GridD bilinear_resize(const GridD& src, std::size_t out_h, std::size_t out_w);
void scale_inplace(GridD& g, double factor);
double max_value(const GridD& g);
Mask threshold_strict(const GridD& g, double tau);
}  // namespace omp

}  // namespace medxplain::kernels
