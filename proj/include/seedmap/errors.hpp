#pragma once

#include <stdexcept>
#include <string>

namespace seedmap {

// Malformed input files (FASTA/FASTQ/index format).
class ParseError : public std::runtime_error {
  public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem / stream failures.
class IoError : public std::runtime_error {
  public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Internal contract violations (out-of-range arguments, broken invariants).
class InvariantError : public std::logic_error {
  public:
    explicit InvariantError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace seedmap
