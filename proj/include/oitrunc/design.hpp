#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oitrunc/family.hpp"

namespace oitrunc {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Raised for malformed input data. `row` is 1-based and counts the header
/// as row 1, matching what a spreadsheet shows.
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& what, std::size_t row = 0, std::string column = {})
      : std::runtime_error(what), row_(row), column_(std::move(column)) {}
  std::size_t row() const { return row_; }
  const std::string& column() const { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

/// Numeric table with named columns of equal length.
struct Dataset {
  std::vector<std::string> column_names;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  std::optional<std::size_t> index_of(const std::string& name) const;
  /// Throws DataError if the column does not exist.
  const std::vector<double>& column(const std::string& name) const;
};

Dataset read_csv(std::istream& in, const std::string& source = "<stream>");
Dataset load_csv(const std::filesystem::path& path);
/// Shortest round-trip formatting of every value.
void write_csv(const Dataset& data, std::ostream& out);

struct ModelSpec {
  Family family = Family::PP;
  std::string response;
  std::vector<std::string> x_terms;
  std::vector<std::string> z_terms;
};

/// Validated response and design matrices. X and Z carry a leading
/// intercept column; Z exists only for one-inflated families.
struct DesignData {
  std::vector<long> y;
  RowMatrix X;
  std::optional<RowMatrix> Z;
  std::vector<std::string> x_names;  // includes "(Intercept)"
  std::vector<std::string> z_names;
  std::vector<bool> x_dummy;
  std::vector<bool> z_dummy;
  std::vector<bool> ones_mask;  // y_i == 1
  std::vector<double> log_y_factorial;

  std::size_t n() const { return y.size(); }
};

inline constexpr const char* kInterceptName = "(Intercept)";

/// Builds X and Z from named columns. Columns listed in `continuous` are
/// never flagged as dummies even when their values are all 0/1.
DesignData build_design(const ModelSpec& spec, const Dataset& data,
                        const std::vector<std::string>& continuous = {});

}  // namespace oitrunc
