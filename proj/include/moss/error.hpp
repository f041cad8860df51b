#pragma once

#include <stdexcept>
#include <string>

namespace moss {

// Mirrors the moss_status codes of the C API one-to-one.
enum class ErrorCode : int {
    InvalidArgument = 1,
    Config = 2,
    Io = 3,
    State = 4,
    Training = 5,
    Internal = 6,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

const char* error_code_name(ErrorCode code);

}  // namespace moss
