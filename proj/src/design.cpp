#include "oitrunc/design.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace oitrunc {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::optional<double> parse_number(std::string_view cell) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
    return std::nullopt;
  }
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

bool is_binary(const std::vector<double>& col) {
  return std::all_of(col.begin(), col.end(), [](double v) { return v == 0.0 || v == 1.0; });
}

RowMatrix with_intercept(const Dataset& data, const std::vector<std::string>& terms,
                         std::vector<std::string>& names, std::vector<bool>& dummy,
                         const std::vector<std::string>& continuous) {
  const std::size_t n = data.rows();
  RowMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(terms.size() + 1));
  m.col(0).setOnes();
  names = {kInterceptName};
  dummy = {false};
  for (std::size_t j = 0; j < terms.size(); ++j) {
    const auto& col = data.column(terms[j]);
    for (std::size_t i = 0; i < n; ++i) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j + 1)) = col[i];
    }
    names.push_back(terms[j]);
    const bool forced =
        std::find(continuous.begin(), continuous.end(), terms[j]) != continuous.end();
    dummy.push_back(!forced && is_binary(col));
  }
  return m;
}

}  // namespace

std::optional<std::size_t> Dataset::index_of(const std::string& name) const {
  const auto it = std::find(column_names.begin(), column_names.end(), name);
  if (it == column_names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - column_names.begin());
}

const std::vector<double>& Dataset::column(const std::string& name) const {
  const auto idx = index_of(name);
  if (!idx) throw DataError("unknown column '" + name + "'", 0, name);
  return columns[*idx];
}

Dataset read_csv(std::istream& in, const std::string& source) {
  Dataset data;
  std::string line;
  std::size_t row = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++row;
    std::string_view view(line);
    if (row == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (trim(view).empty()) continue;
    const auto cells = split(view);
    if (!have_header) {
      for (const auto& c : cells) {
        if (c.empty()) throw DataError(source + ": empty column name in header", row);
        data.column_names.emplace_back(c);
      }
      data.columns.resize(cells.size());
      have_header = true;
      continue;
    }
    if (cells.size() != data.column_names.size()) {
      std::ostringstream msg;
      msg << source << ": row " << row << " has " << cells.size() << " cells, expected "
          << data.column_names.size();
      throw DataError(msg.str(), row);
    }
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const auto value = parse_number(cells[j]);
      if (!value) {
        std::ostringstream msg;
        msg << source << ": non-numeric value '" << cells[j] << "' at row " << row
            << ", column '" << data.column_names[j] << "'";
        throw DataError(msg.str(), row, data.column_names[j]);
      }
      data.columns[j].push_back(*value);
    }
  }
  if (!have_header) throw DataError(source + ": file is empty");
  if (data.rows() == 0) throw DataError(source + ": no data rows after the header");
  return data;
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file '" + path.string() + "'");
  return read_csv(in, path.string());
}

void write_csv(const Dataset& data, std::ostream& out) {
  for (std::size_t j = 0; j < data.column_names.size(); ++j) {
    out << (j ? "," : "") << data.column_names[j];
  }
  out << '\n';
  char buf[64];
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < data.columns.size(); ++j) {
      const auto res = std::to_chars(buf, buf + sizeof buf, data.columns[j][i]);
      if (j) out << ',';
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

DesignData build_design(const ModelSpec& spec, const Dataset& data,
                        const std::vector<std::string>& continuous) {
  if (is_one_inflated(spec.family) == spec.z_terms.empty()) {
    throw std::invalid_argument(is_one_inflated(spec.family)
                                    ? std::string(to_string(spec.family)) + " needs z terms"
                                    : std::string(to_string(spec.family)) +
                                          " does not take z terms");
  }
  for (const auto& name : continuous) data.column(name);

  DesignData dd;
  const auto& response = data.column(spec.response);
  dd.y.reserve(response.size());
  for (std::size_t i = 0; i < response.size(); ++i) {
    const double v = response[i];
    if (v != std::floor(v)) {
      throw DataError("response '" + spec.response + "' has non-integer value " +
                          std::to_string(v) + " at row " + std::to_string(i + 2),
                      i + 2, spec.response);
    }
    if (v < 1.0) {
      throw DataError("response '" + spec.response + "' has value " + std::to_string(v) +
                          " at row " + std::to_string(i + 2) +
                          "; zero-truncated models need counts >= 1 (are the data truncated?)",
                      i + 2, spec.response);
    }
    dd.y.push_back(static_cast<long>(v));
  }

  dd.X = with_intercept(data, spec.x_terms, dd.x_names, dd.x_dummy, continuous);
  if (is_one_inflated(spec.family)) {
    dd.Z = with_intercept(data, spec.z_terms, dd.z_names, dd.z_dummy, continuous);
  }
  dd.ones_mask.reserve(dd.y.size());
  dd.log_y_factorial.reserve(dd.y.size());
  for (long v : dd.y) {
    dd.ones_mask.push_back(v == 1);
    dd.log_y_factorial.push_back(std::lgamma(static_cast<double>(v) + 1.0));
  }
  return dd;
}

}  // namespace oitrunc
