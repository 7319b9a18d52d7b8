#include "boostne/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "boostne/errors.hpp"

namespace boostne {

void write_embedding(std::ostream& out, std::span<const std::string> node_ids, const DenseMatrix& vectors) {
  if (node_ids.size() != vectors.rows()) throw UsageError("one node id per embedding row is required");
  out << vectors.rows() << ' ' << vectors.cols() << '\n';
  char buf[32];
  std::string line;
  for (std::size_t i = 0; i < vectors.rows(); ++i) {
    line = node_ids[i];
    for (const double v : vectors.row(i)) {
      const int len = std::snprintf(buf, sizeof(buf), " %.6g", v);
      line.append(buf, static_cast<std::size_t>(len));
    }
    line.push_back('\n');
    out << line;
  }
  if (!out) throw DataError("failed writing embedding");
}

Embedding read_embedding(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(line_no, "missing 'n d' header");
  std::istringstream header(line);
  std::size_t n = 0, d = 0;
  if (!(header >> n >> d)) throw ParseError(line_no, "malformed 'n d' header");

  Embedding e;
  e.vectors = DenseMatrix(n, d);
  e.node_ids.reserve(n);
  std::size_t row = 0;
  while (row < n && std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream tokens(line);
    std::string id;
    tokens >> id;
    std::string value;
    for (std::size_t j = 0; j < d; ++j) {
      if (!(tokens >> value)) throw ParseError(line_no, "expected " + std::to_string(d) + " values");
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw ParseError(line_no, "non-numeric value '" + value + "'");
      }
      e.vectors(row, j) = v;
    }
    if (tokens >> value) throw ParseError(line_no, "more than " + std::to_string(d) + " values");
    e.node_ids.push_back(std::move(id));
    ++row;
  }
  if (row != n) throw DataError("embedding declares " + std::to_string(n) + " rows but has " + std::to_string(row));
  return e;
}

Embedding read_embedding_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding " + path);
  try {
    return read_embedding(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.detail(), path);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_trace_json(std::ostream& out, std::span<const TraceEntry> trace) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& t : trace) j.push_back({{"level", t.level}, {"frobenius_norm", t.frobenius_norm}, {"nnz", t.nnz}});
  out << j.dump(2) << '\n';
}

}  // namespace boostne
