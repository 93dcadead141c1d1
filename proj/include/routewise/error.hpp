#pragma once

#include <stdexcept>
#include <string>

namespace routewise {

enum class ErrorCode {
    invalid_argument = 1,
    empty_context,
    inconsistent_embeddings,
    ensemble_too_small,
    degenerate_triplet,
    neighborhood_too_large,
    empty_pool,
    duplicate_id,
    parse_error,
    io_error,
    undefined_value,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so the
// C layer can map it onto a status value without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace routewise
