#pragma once

#include <stdexcept>
#include <string>

namespace proxsim {

/// Base of every error raised by the library. `code()` is the short,
/// stable identifier used on the wire and in CLI diagnostics.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

#define PROXSIM_DEFINE_ERROR(Name, Code)                                   \
    class Name : public Error {                                            \
    public:                                                                \
        explicit Name(const std::string& what) : Error(Code, what) {}      \
    }

// geo
PROXSIM_DEFINE_ERROR(ValidationError, "validation");
PROXSIM_DEFINE_ERROR(RegimeError, "regime");
// mlat
PROXSIM_DEFINE_ERROR(EmptySamplesError, "empty_samples");
PROXSIM_DEFINE_ERROR(UnderdeterminedError, "underdetermined");
PROXSIM_DEFINE_ERROR(DegenerateGeometryError, "degenerate_geometry");
// world
PROXSIM_DEFINE_ERROR(OutOfSpanError, "out_of_span");
// service (codes match the wire protocol)
PROXSIM_DEFINE_ERROR(AuthError, "auth");
PROXSIM_DEFINE_ERROR(NotFoundError, "not_found");
PROXSIM_DEFINE_ERROR(RateError, "rate");
PROXSIM_DEFINE_ERROR(BadRequestError, "bad_request");
// attacker
PROXSIM_DEFINE_ERROR(PolicyError, "policy");
// socialgraph
PROXSIM_DEFINE_ERROR(InsufficientSelectorsError, "insufficient_selectors");
// hypergraph
PROXSIM_DEFINE_ERROR(DuplicateIdError, "duplicate_id");
PROXSIM_DEFINE_ERROR(UnknownSelectorError, "unknown_selector");
// report / cli
PROXSIM_DEFINE_ERROR(IoError, "io");
PROXSIM_DEFINE_ERROR(ConfigError, "config");

#undef PROXSIM_DEFINE_ERROR

} // namespace proxsim
