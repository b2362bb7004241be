#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ideo {

/// Raised for every precondition or input-format violation in the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Threshold below which a scale or similarity is treated as zero.
inline constexpr double kEpsNum = 1e-12;

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives an independent stream seed from a base seed and an index path,
/// e.g. derive_seed(master, {restart}) or derive_seed(seed, {particle, generation}).
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) noexcept;

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

  std::vector<double> column(std::size_t c) const;

  const std::vector<double>& data() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

/// Parses a full field as a double; throws Error mentioning `context` on failure.
double parse_double(std::string_view field, std::string_view context);

std::uint64_t parse_u64(std::string_view field, std::string_view context);

/// Splits one CSV record on commas (no quoting; fields are trimmed of a trailing CR).
std::vector<std::string_view> split_csv(std::string_view line);

/// FNV-1a 64-bit hash, rendered as 16 hex digits.
std::string content_hash(std::string_view bytes);

}  // namespace ideo
