#ifndef CHELM_ERROR_HPP
#define CHELM_ERROR_HPP

#include <stdexcept>
#include <string>

namespace chelm {

// Stable error categories, mirrored one-to-one by the C API status codes.
enum class Status : int {
    ok = 0,
    invalid_argument = 1,
    level_exhausted = 2,
    key_missing = 3,
    scale_mismatch = 4,
    io_error = 5,
    checksum_mismatch = 6,
    parse_error = 7,
    internal = 8,
};

class Error : public std::runtime_error {
  public:
    Error(Status status, const std::string& what)
        : std::runtime_error(what), status_(status) {}

    Status status() const noexcept { return status_; }

  private:
    Status status_;
};

[[noreturn]] inline void raise(Status status, const std::string& what) {
    throw Error(status, what);
}

inline void require(bool cond, Status status, const std::string& what) {
    if (!cond) raise(status, what);
}

}  // namespace chelm

#endif
