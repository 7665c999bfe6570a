#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pcflow {

// Row-major 2D grid; x is the column (width) index, y the row (height) index.
template <typename T>
class Grid
{
public:
  Grid() = default;
  Grid(std::size_t width, std::size_t height, T fill = T{})
    : width_(width), height_(height), data_(width * height, fill)
  {
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool same_shape(Grid const &o) const noexcept { return width_ == o.width_ && height_ == o.height_; }
  template <typename U>
  bool same_shape(Grid<U> const &o) const noexcept
  {
    return width_ == o.width() && height_ == o.height();
  }

  T &operator()(std::size_t x, std::size_t y) { return data_[y * width_ + x]; }
  T const &operator()(std::size_t x, std::size_t y) const { return data_[y * width_ + x]; }
  T &operator[](std::size_t i) { return data_[i]; }
  T const &operator[](std::size_t i) const { return data_[i]; }

  std::span<T> values() noexcept { return data_; }
  std::span<T const> values() const noexcept { return data_; }

  bool operator==(Grid const &) const = default;

private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<T> data_;
};

using RealGrid = Grid<double>;
using MaskGrid = Grid<unsigned char>;

} // namespace pcflow
