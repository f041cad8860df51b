#include "moss/rng.hpp"

#include <sstream>

#include "moss/error.hpp"

namespace moss {

std::uint64_t Rng::uniform_index(std::uint64_t n) {
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "uniform_index: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r = next_u64();
    while (r >= limit) r = next_u64();
    return r % n;
}

std::string Rng::serialize() const {
    std::ostringstream out;
    out << engine_;
    return out.str();
}

void Rng::deserialize(const std::string& text) {
    std::istringstream in(text);
    in >> engine_;
    if (in.fail()) throw Error(ErrorCode::State, "Rng::deserialize: malformed engine state");
}

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid_argument";
        case ErrorCode::Config: return "config_error";
        case ErrorCode::Io: return "io_error";
        case ErrorCode::State: return "state_error";
        case ErrorCode::Training: return "training_error";
        case ErrorCode::Internal: return "internal_error";
    }
    return "unknown_error";
}

}  // namespace moss
