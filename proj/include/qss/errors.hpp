#pragma once

#include <stdexcept>
#include <string>

namespace qss {

/// Malformed caller input (bad bit string, mismatched lengths, duplicate qubit id).
class InputError : public std::invalid_argument {
public:
    explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// Operation on a qubit that is no longer available (already consumed).
class StateError : public std::logic_error {
public:
    explicit StateError(const std::string& what) : std::logic_error(what) {}
};

/// A strategy hook broke the simulation rules, e.g. touched a qubit its party does not hold.
/// Distinct from a protocol-level detection.
class SimulationFault : public std::logic_error {
public:
    explicit SimulationFault(const std::string& what) : std::logic_error(what) {}
};

class IncompleteTranscript : public std::runtime_error {
public:
    explicit IncompleteTranscript(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qss
