#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "medxplain/error.hpp"

namespace medxplain {

/// Dense row-major 2-D grid.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t height, std::size_t width, T fill = T{})
      : height_(height), width_(width), values_(height * width, fill) {}
  Grid(std::size_t height, std::size_t width, std::vector<T> values)
      : height_(height), width_(width), values_(std::move(values)) {
    if (values_.size() != height_ * width_) {
      throw InvalidInput("grid value count does not match dimensions");
    }
  }

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  T& operator()(std::size_t row, std::size_t col) { return values_[row * width_ + col]; }
  const T& operator()(std::size_t row, std::size_t col) const {
    return values_[row * width_ + col];
  }

  std::span<T> values() noexcept { return values_; }
  std::span<const T> values() const noexcept { return values_; }
  const std::vector<T>& raw() const noexcept { return values_; }

  bool operator==(const Grid&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<T> values_;
};

using GridD = Grid<double>;
using Mask = Grid<unsigned char>;
using LabelGrid = Grid<int>;

/// K x H x W tensor of doubles, channel-major.
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(std::size_t channels, std::size_t height, std::size_t width, double fill = 0.0)
      : channels_(channels), height_(height), width_(width),
        values_(channels * height * width, fill) {}
  Tensor3(std::size_t channels, std::size_t height, std::size_t width, std::vector<double> values)
      : channels_(channels), height_(height), width_(width), values_(std::move(values)) {
    if (values_.size() != channels_ * height_ * width_) {
      throw InvalidInput("tensor value count does not match shape");
    }
  }

  std::size_t channels() const noexcept { return channels_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t plane_size() const noexcept { return height_ * width_; }

  double& operator()(std::size_t k, std::size_t i, std::size_t j) {
    return values_[(k * height_ + i) * width_ + j];
  }
  double operator()(std::size_t k, std::size_t i, std::size_t j) const {
    return values_[(k * height_ + i) * width_ + j];
  }

  std::span<const double> channel(std::size_t k) const {
    return std::span<const double>(values_).subspan(k * plane_size(), plane_size());
  }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  bool same_shape(const Tensor3& other) const noexcept {
    return channels_ == other.channels_ && height_ == other.height_ && width_ == other.width_;
  }
  bool degenerate() const noexcept { return channels_ == 0 || height_ == 0 || width_ == 0; }

  bool operator==(const Tensor3&) const = default;

 private:
  std::size_t channels_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> values_;
};

/// Activations captured at the target layer.
class FeatureStack : public Tensor3 {
 public:
  using Tensor3::Tensor3;
};

/// Gradients of the answer target with respect to the FeatureStack.
class GradientStack : public Tensor3 {
 public:
  using Tensor3::Tensor3;
};

}  // namespace medxplain
