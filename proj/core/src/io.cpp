#include "gcica/io.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

#include "gcica/common.hpp"

namespace gcica {

namespace {

std::vector<std::vector<double>> parse_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view view(line);
    // Skip comment and blank lines.
    std::size_t first = view.find_first_not_of(" \t");
    if (first == std::string_view::npos || view[first] == '#') continue;

    std::vector<double> values;
    std::stringstream ss(line);
    std::string token;
    int column = 0;
    while (std::getline(ss, token, ',')) {
      ++column;
      const char* begin = token.c_str();
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(begin, &end);
      while (end && *end != '\0' && std::isspace(static_cast<unsigned char>(*end))) ++end;
      if (end == begin || (end && *end != '\0') || errno == ERANGE)
        throw ValidationError(path + ":" + std::to_string(line_no) + ": field " +
                              std::to_string(column) + " ('" + token + "') is not numeric");
      values.push_back(v);
    }
    if (values.empty())
      throw ValidationError(path + ":" + std::to_string(line_no) + ": empty row");
    if (!rows.empty() && values.size() != rows.front().size())
      throw ValidationError(path + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(rows.front().size()) + " values, found " +
                            std::to_string(values.size()));
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw ValidationError("'" + path + "' holds no data rows");
  return rows;
}

}  // namespace

Matrix load_matrix(const std::string& path) {
  const auto rows = parse_rows(path);
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  return m;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write '" + tmp.string() + "'");
    out << content;
  }
  fs::rename(tmp, target);
}

void save_matrix(const Matrix& m, const std::string& path) {
  if (static_cast<double>(m.size()) > 1e8)
    std::fprintf(stderr, "warning: writing %lld values to %s\n",
                 static_cast<long long>(m.size()), path.c_str());
  std::string out;
  out.reserve(static_cast<std::size_t>(m.size()) * 12);
  char buffer[64];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buffer, sizeof(buffer), "%.17g", m(r, c));
      if (c) out += ',';
      out += buffer;
    }
    out += '\n';
  }
  write_text_atomic(path, out);
}

Graph load_graph(const std::string& path, AdjacencyFormat format) {
  const Matrix m = load_matrix(path);
  const bool square = m.rows() == m.cols();
  bool as_edges = false;
  switch (format) {
    case AdjacencyFormat::kDense:
      as_edges = false;
      break;
    case AdjacencyFormat::kEdgeList:
      as_edges = true;
      break;
    case AdjacencyFormat::kAuto:
      as_edges = m.cols() == 3 && !square;
      break;
  }
  if (!as_edges) {
    if (!square)
      throw ValidationError("'" + path + "' is not square; pass an edge list explicitly");
    return Graph::from_dense(m);
  }
  if (m.cols() != 3) throw ValidationError("edge list '" + path + "' must have 3 columns");
  std::vector<Edge> edges;
  int n = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double fi = m(r, 0);
    const double fj = m(r, 1);
    if (fi != std::floor(fi) || fj != std::floor(fj))
      throw ValidationError("edge list '" + path + "' row " + std::to_string(r + 1) +
                            ": node indices must be integers");
    Edge e{static_cast<int>(fi), static_cast<int>(fj), m(r, 2)};
    n = std::max(n, std::max(e.i, e.j) + 1);
    edges.push_back(e);
  }
  return Graph::from_edges(n, edges);
}

}  // namespace gcica
