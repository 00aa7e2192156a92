#ifndef COHART_ERRORS_HPP
#define COHART_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <utility>

namespace cohart {

// Exit codes used by the CLI: 2 config, 3 data, 4 non-convergence.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& msg, int exit_code)
        : std::runtime_error(code + ": " + msg),
          code_(std::move(code)),
          exit_code_(exit_code) {}

    const std::string& code() const noexcept { return code_; }
    int exit_code() const noexcept { return exit_code_; }

private:
    std::string code_;
    int exit_code_;
};

struct ConfigError : Error {
    ConfigError(const std::string& msg) : Error("E_CONFIG", msg, 2) {}
};

struct DomainError : Error {
    DomainError(const std::string& msg) : Error("E_DOMAIN", msg, 2) {}
};

struct DataError : Error {
    DataError(const std::string& msg) : Error("E_DATA", msg, 3) {}
};

struct ConvergenceError : Error {
    ConvergenceError(const std::string& msg) : Error("E_NONCONVERGENCE", msg, 4) {}
};

} // namespace cohart

#endif
