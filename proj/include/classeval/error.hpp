#ifndef CLASSEVAL_ERROR_HPP
#define CLASSEVAL_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace classeval {

/// Base for every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnknownScript : public Error {
public:
    explicit UnknownScript(const std::string& name)
        : Error("unknown script: " + name) {}
};

/// A combining sign (matra, virama, diacritic) with no base to attach to.
class MalformedText : public Error {
public:
    MalformedText(std::size_t offset, const std::string& what)
        : Error("malformed text at byte " + std::to_string(offset) + ": " + what),
          offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class EmptyCorpus : public Error {
public:
    EmptyCorpus() : Error("corpus is empty") {}
};

/// Error tied to a line of an input file (1-based line number, 0 if unknown).
class LineError : public Error {
public:
    LineError(const std::string& kind, std::size_t line, const std::string& reason)
        : Error(kind + " at line " + std::to_string(line) + ": " + reason), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ParseError : public LineError {
public:
    ParseError(std::size_t line, const std::string& reason)
        : LineError("parse error", line, reason) {}
};

class SchemaError : public LineError {
public:
    SchemaError(std::size_t line, const std::string& reason)
        : LineError("schema error", line, reason) {}
};

class DimMismatch : public LineError {
public:
    DimMismatch(std::size_t line, std::size_t expected, std::size_t got)
        : LineError("dimension mismatch", line,
                    "expected " + std::to_string(expected) + " components, got " +
                        std::to_string(got)) {}
};

class IoError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace classeval

#endif  // CLASSEVAL_ERROR_HPP
