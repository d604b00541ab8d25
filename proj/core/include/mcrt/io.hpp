#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mcrt/map_builder.hpp"
#include "mcrt/walk.hpp"

namespace mcrt {

/// Binary walk file, little-endian: magic "MCRTWALK", version u32 = 1, then
/// gamma f64, window_n u64, mesh_k u32, seed u64, followed by both coordinate
/// arrays as raw f64 (l first, then r). Loading validates magic, version, and
/// that the payload length matches the declared window exactly; any mismatch
/// throws format_error and nothing is returned partially.
void save_walk(const CorrelatedWalk& walk, std::ostream& out);
void save_walk(const CorrelatedWalk& walk, const std::string& path);
CorrelatedWalk load_walk(std::istream& in);
CorrelatedWalk load_walk(const std::string& path);

/// Binary graph file, little-endian: magic "MCRTGRAF", version u32 = 1, then
/// window_n u64, mesh_k u32, gamma f64, seed u64, vertex count u64, the
/// adjacency offset array as u64, and one (vertex id i64, label u8) pair per
/// edge end. Vertex ids are the integer cell times, so the file is
/// self-describing given window_n; saving requires the graph's vertex range
/// to be the standard window (first vertex = 1 - window_n). The
/// window-visibility flags are not part of the format: a loaded graph carries
/// none, and consumers that need contamination flags rebuild from the stored
/// provenance instead.
void save_graph(const MatedCrtGraph& g, std::ostream& out);
void save_graph(const MatedCrtGraph& g, const std::string& path);
MatedCrtGraph load_graph(std::istream& in);
MatedCrtGraph load_graph(const std::string& path);

/// Plot-ready table: '#'-commented header line, comma-separated numeric rows,
/// every value rendered with "%.17g" so bodies are byte-stable across runs.
std::string csv_body(std::span<const std::string> header,
                     const std::vector<std::vector<double>>& rows);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

}  // namespace mcrt
