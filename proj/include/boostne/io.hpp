#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "boostne/boost.hpp"
#include "boostne/matrix.hpp"

namespace boostne {

struct Embedding {
  std::vector<std::string> node_ids;
  DenseMatrix vectors;
};

/// word2vec text format: a `n d` header, then `node_id v_1 ... v_d` per node
/// with six significant digits.
void write_embedding(std::ostream& out, std::span<const std::string> node_ids, const DenseMatrix& vectors);
Embedding read_embedding(std::istream& in);
Embedding read_embedding_file(const std::string& path);

/// JSON array of {level, frobenius_norm, nnz}.
void write_trace_json(std::ostream& out, std::span<const TraceEntry> trace);

}  // namespace boostne
