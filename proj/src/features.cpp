#include "patchclf/features.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "patchclf/error.hpp"

namespace patchclf {

FeatureMatrix FeatureMatrix::select_rows(std::span<const Eigen::Index> rows) const {
  FeatureMatrix out;
  out.names = names;
  out.X.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = rows[i];
    out.X.row(static_cast<Eigen::Index>(i)) = X.row(r);
    out.y(static_cast<Eigen::Index>(i)) = y(r);
    out.patch_ids.push_back(patch_ids[static_cast<std::size_t>(r)]);
    out.bug_ids.push_back(bug_ids[static_cast<std::size_t>(r)]);
  }
  return out;
}

void FeatureMatrix::validate() const {
  if (static_cast<Eigen::Index>(names.size()) != X.cols()) throw Error("learn", "feature name count != column count");
  if (static_cast<Eigen::Index>(patch_ids.size()) != X.rows() || static_cast<Eigen::Index>(bug_ids.size()) != X.rows() ||
      y.size() != X.rows()) {
    throw Error("learn", "row metadata does not match the feature matrix");
  }
  if (!X.allFinite()) throw Error("learn", "feature matrix contains non-finite values");
}

FeatureMatrix concat_columns(const FeatureMatrix& a, const FeatureMatrix& b) {
  if (a.rows() != b.rows()) throw Error("combine", "feature sets have different row counts");
  for (std::size_t i = 0; i < a.patch_ids.size(); ++i) {
    if (a.patch_ids[i] != b.patch_ids[i]) {
      throw Error("combine", "feature sets are not aligned at row " + std::to_string(i) + " (" + a.patch_ids[i] +
                                 " vs " + b.patch_ids[i] + ")");
    }
  }
  FeatureMatrix out;
  out.names = a.names;
  out.names.insert(out.names.end(), b.names.begin(), b.names.end());
  out.patch_ids = a.patch_ids;
  out.bug_ids = a.bug_ids;
  out.y = a.y;
  out.X.resize(a.rows(), a.cols() + b.cols());
  out.X << a.X, b.X;
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string to_csv(const FeatureMatrix& m, const nlohmann::json& provenance) {
  std::string out;
  if (!provenance.is_null()) {
    out += "# ";
    out += provenance.dump();
    out += '\n';
  }
  out += "patch_id,bug_id,label";
  for (const auto& n : m.names) {
    out += ',';
    out += n;
  }
  out += '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out += m.patch_ids[static_cast<std::size_t>(r)];
    out += ',';
    out += m.bug_ids[static_cast<std::size_t>(r)];
    out += ',';
    out += std::to_string(m.y(r));
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out += ',';
      out += format_double(m.X(r, c));
    }
    out += '\n';
  }
  return out;
}

void write_csv(const FeatureMatrix& m, const std::filesystem::path& path, const nlohmann::json& provenance) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("learn", "cannot write " + path.string());
  out << to_csv(m, provenance);
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t pos = 0;
  while (true) {
    const std::size_t end = line.find(',', pos);
    if (end == std::string_view::npos) {
      cells.push_back(line.substr(pos));
      break;
    }
    cells.push_back(line.substr(pos, end - pos));
    pos = end + 1;
  }
  return cells;
}

double parse_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error("learn", "line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

FeatureMatrix parse_csv(std::string_view text) {
  FeatureMatrix m;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  bool have_header = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto cells = split_commas(line);
    if (!have_header) {
      if (cells.size() < 3 || cells[0] != "patch_id" || cells[1] != "bug_id" || cells[2] != "label") {
        throw Error("learn", "feature CSV header must start with patch_id,bug_id,label");
      }
      for (std::size_t i = 3; i < cells.size(); ++i) m.names.emplace_back(cells[i]);
      have_header = true;
      continue;
    }
    if (cells.size() != m.names.size() + 3) {
      throw Error("learn", "line " + std::to_string(line_no) + ": expected " + std::to_string(m.names.size() + 3) +
                               " cells, got " + std::to_string(cells.size()));
    }
    m.patch_ids.emplace_back(cells[0]);
    m.bug_ids.emplace_back(cells[1]);
    labels.push_back(static_cast<int>(parse_double(cells[2], line_no)));
    std::vector<double> row(m.names.size());
    for (std::size_t i = 0; i < row.size(); ++i) row[i] = parse_double(cells[i + 3], line_no);
    rows.push_back(std::move(row));
  }
  if (!have_header) throw Error("learn", "feature CSV has no header");
  m.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m.names.size()));
  m.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      m.X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
    m.y(static_cast<Eigen::Index>(r)) = labels[r];
  }
  return m;
}

FeatureMatrix read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("learn", "cannot open " + path.string(), "run the `features` subcommand first");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

}  // namespace patchclf
