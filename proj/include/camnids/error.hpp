#ifndef CAMNIDS_ERROR_HPP
#define CAMNIDS_ERROR_HPP

#include <stdexcept>
#include <string>

namespace camnids {

enum class ErrorKind {
    Parse,     // rule-file or document syntax
    Data,      // semantic violation in otherwise well-formed input
    Capacity,  // compiled tables exceed the configured hardware
    Io,        // filesystem
    Invalid    // bad argument / configuration
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string msg)
        : std::runtime_error(std::move(msg)), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
    throw Error(kind, msg);
}

}  // namespace camnids

#endif
