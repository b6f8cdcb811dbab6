#include "isotherm/error.hpp"

namespace isotherm {

const char* to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::coverage: return "coverage error";
    case ErrorKind::unsupported_kind: return "unsupported kind";
    case ErrorKind::off_surface: return "off-surface error";
    case ErrorKind::geometry: return "geometry error";
    case ErrorKind::domain: return "domain error";
    case ErrorKind::solver: return "solver error";
    case ErrorKind::configuration: return "configuration error";
    case ErrorKind::schedule: return "schedule error";
    case ErrorKind::resolution: return "resolution error";
    case ErrorKind::precondition: return "precondition error";
    case ErrorKind::inconsistency: return "inconsistency error";
    case ErrorKind::transfer_undefined: return "transfer undefined";
    case ErrorKind::undefined_profile: return "undefined profile";
    case ErrorKind::theorem_inapplicable: return "theorem inapplicable";
    case ErrorKind::schema: return "schema error";
    case ErrorKind::io: return "io error";
    }
    return "error";
}

}  // namespace isotherm
