#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace gmkcf {

// File content that cannot be parsed. Carries the offending line when known.
class parse_error : public std::runtime_error {
public:
    parse_error(std::string file, std::int64_t line, const std::string& what)
        : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
          file_(std::move(file)),
          line_(line) {}

    parse_error(std::string file, const std::string& what)
        : std::runtime_error(file + ": " + what), file_(std::move(file)), line_(-1) {}

    const std::string& file() const { return file_; }
    std::int64_t line() const { return line_; }

private:
    std::string file_;
    std::int64_t line_;
};

class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure inside an iterative solver.
class solver_error : public std::runtime_error {
public:
    solver_error(int iteration, const std::string& what)
        : std::runtime_error("iteration " + std::to_string(iteration) + ": " + what),
          iteration_(iteration) {}

    int iteration() const { return iteration_; }

private:
    int iteration_;
};

}  // namespace gmkcf
