#pragma once

#include <stdexcept>
#include <string>

namespace mcrt {

/// Malformed or unrecognized file content (bad magic, truncated payload, parse failure).
struct format_error : std::runtime_error {
    explicit format_error(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative solver failed to reach its tolerance within its iteration cap.
struct convergence_error : std::runtime_error {
    explicit convergence_error(const std::string& what) : std::runtime_error(what) {}
};

/// Internal structural invariant violated (e.g. crossing chords in a rotation system).
struct consistency_error : std::runtime_error {
    explicit consistency_error(const std::string& what) : std::runtime_error(what) {}
};

/// An experiment sample cannot produce a valid measurement (e.g. window contamination).
struct validity_error : std::runtime_error {
    explicit validity_error(const std::string& what) : std::runtime_error(what) {}
};

/// A graph-shape precondition failed (e.g. source and sink in different components).
struct topology_error : std::runtime_error {
    explicit topology_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace mcrt
