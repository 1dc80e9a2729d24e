#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bpnet {

// Position of a token in a text input, 1-based.
struct SourceSpan {
  std::size_t line = 1;
  std::size_t column = 1;
};

// Raised by the text-format readers. Carries the location of the first
// offending token.
class ParseError : public std::runtime_error {
 public:
  ParseError(SourceSpan span, const std::string& message)
      : std::runtime_error(message), span_(span) {}

  const SourceSpan& span() const { return span_; }

  std::string located_message() const {
    return std::to_string(span_.line) + ":" + std::to_string(span_.column) +
           ": " + what();
  }

 private:
  SourceSpan span_;
};

// Graph-shape violations: directed cycles where none are allowed, a loopy
// network handed to the polytree engine, or an internal scheduling bug.
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An engine produced an all-zero message or belief: the evidence assigns
// zero mass to every completion it touches.
class InconsistentEvidenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The evidence has zero total weight under the full joint.
class ImpossibleEvidenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The joint state space exceeds the enumeration bound of the oracle.
class EnumerationLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bpnet
