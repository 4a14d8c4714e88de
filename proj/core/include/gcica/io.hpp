#pragma once

#include <string>

#include "gcica/graph.hpp"
#include "gcica/linalg.hpp"

namespace gcica {

// Text matrix format: one row per line, comma-separated values, lines
// beginning with '#' are comments. Errors carry line / position info.
Matrix load_matrix(const std::string& path);

// Writes with 17 significant digits so a load round-trips bit-identically.
// Warns on stderr above 1e8 values. Atomic (temp file + rename).
void save_matrix(const Matrix& m, const std::string& path);

void write_text_atomic(const std::string& path, const std::string& content);

enum class AdjacencyFormat { kAuto, kDense, kEdgeList };

// Dense square adjacency, or a 3-column (i, j, weight) edge list. kAuto
// takes square input as dense and 3-column input as edges; a 3 x 3 file is
// read as dense.
Graph load_graph(const std::string& path, AdjacencyFormat format = AdjacencyFormat::kAuto);

}  // namespace gcica
