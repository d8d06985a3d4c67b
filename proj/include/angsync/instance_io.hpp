#pragma once

// Plain-text instance files and their JSON metadata sidecar.
//
//   # comment lines and trailing comments start with '#'
//   n m
//   i j delta [g]
//
// delta is in radians, written with 17 significant digits so a round trip
// is exact. The optional g column (0 or 1) carries the ground-truth good
// flag; it is either present on every edge line or on none.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "angsync/core.hpp"

namespace angsync {

struct LoadedInstance {
  OffsetGraph graph;
  std::optional<std::vector<bool>> good_mask;
};

inline void write_instance(std::ostream& os, const OffsetGraph& graph, const std::vector<bool>* good_mask = nullptr) {
  if (good_mask && good_mask->size() != graph.m()) {
    throw Error(ErrorCode::InvalidInput, "write_instance: good_mask length != m");
  }
  os << graph.n() << ' ' << graph.m() << '\n';
  const auto old_precision = os.precision(17);
  for (std::size_t k = 0; k < graph.m(); ++k) {
    const auto& e = graph.edge(k);
    os << e.i << ' ' << e.j << ' ' << e.delta;
    if (good_mask) os << ' ' << ((*good_mask)[k] ? 1 : 0);
    os << '\n';
  }
  os.precision(old_precision);
}

inline LoadedInstance read_instance(std::istream& is) {
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) -> Error {
    return Error(ErrorCode::InvalidInput, "line " + std::to_string(line_no) + ": " + msg);
  };
  auto next_tokens = [&](std::vector<std::string>& toks) {
    while (std::getline(is, line)) {
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      std::istringstream ss(line);
      toks.clear();
      for (std::string t; ss >> t;) toks.push_back(t);
      if (!toks.empty()) return true;
    }
    return false;
  };
  auto to_size = [&](const std::string& t) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      if (!t.empty() && t[0] == '-') throw std::invalid_argument("negative");
      v = std::stoull(t, &pos);
    } catch (const std::exception&) {
      throw fail("expected a non-negative integer, got '" + t + "'");
    }
    if (pos != t.size()) throw fail("expected a non-negative integer, got '" + t + "'");
    return static_cast<std::size_t>(v);
  };
  auto to_double = [&](const std::string& t) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(t, &pos);
    } catch (const std::exception&) {
      throw fail("expected a number, got '" + t + "'");
    }
    if (pos != t.size()) throw fail("expected a number, got '" + t + "'");
    return v;
  };

  std::vector<std::string> toks;
  if (!next_tokens(toks)) throw Error(ErrorCode::InvalidInput, "instance: missing header");
  if (toks.size() != 2) throw fail("header must be 'n m'");
  const std::size_t n = to_size(toks[0]);
  const std::size_t m = to_size(toks[1]);

  std::vector<Edge> edges;
  edges.reserve(m);
  std::vector<bool> good;
  std::optional<bool> has_flags;
  for (std::size_t k = 0; k < m; ++k) {
    if (!next_tokens(toks)) throw Error(ErrorCode::InvalidInput, "instance: expected " + std::to_string(m) + " edges, found " + std::to_string(k));
    if (toks.size() != 3 && toks.size() != 4) throw fail("edge line must be 'i j delta [g]'");
    const bool flagged = toks.size() == 4;
    if (has_flags && *has_flags != flagged) throw fail("good flag column must be present on all edges or none");
    has_flags = flagged;
    edges.push_back({to_size(toks[0]), to_size(toks[1]), to_double(toks[2])});
    if (flagged) {
      if (toks[3] != "0" && toks[3] != "1") throw fail("good flag must be 0 or 1");
      good.push_back(toks[3] == "1");
    }
  }
  if (next_tokens(toks)) throw fail("trailing data after " + std::to_string(m) + " edges");

  LoadedInstance out{OffsetGraph(n, std::move(edges)), std::nullopt};
  if (has_flags.value_or(false)) out.good_mask = std::move(good);
  return out;
}

inline void save_instance(const std::filesystem::path& path, const OffsetGraph& graph,
                          const std::vector<bool>* good_mask = nullptr) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  write_instance(os, graph, good_mask);
  if (!os) throw Error(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

inline LoadedInstance load_instance(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  return read_instance(is);
}

/// Sidecar path for an instance file: "<instance>.json".
inline std::filesystem::path metadata_path(const std::filesystem::path& instance_path) {
  return std::filesystem::path(instance_path.string() + ".json");
}

inline void save_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  os << std::setw(2) << j << '\n';
}

inline nlohmann::json load_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Io, "malformed JSON in '" + path.string() + "': " + e.what());
  }
}

}  // namespace angsync
