#pragma once

#include <stdexcept>
#include <string>

namespace toric {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define TORIC_ERROR_TYPE(Name)                                          \
    struct Name : Error {                                               \
        explicit Name(const std::string& msg = #Name) : Error(msg) {}   \
    }

TORIC_ERROR_TYPE(UnboundedPolytope);
TORIC_ERROR_TYPE(DegeneratePolytope);
TORIC_ERROR_TYPE(NotNormalized);
TORIC_ERROR_TYPE(NotAVertex);
TORIC_ERROR_TYPE(NotDelzant);
TORIC_ERROR_TYPE(UnknownCatalogName);
TORIC_ERROR_TYPE(MissingOriginVertex);
TORIC_ERROR_TYPE(SymbolicKernel);
TORIC_ERROR_TYPE(MissingAssignment);
TORIC_ERROR_TYPE(DimensionTooLarge);
TORIC_ERROR_TYPE(NonPositiveSamplePoint);
TORIC_ERROR_TYPE(NonPositiveInput);
TORIC_ERROR_TYPE(SupportMismatch);
TORIC_ERROR_TYPE(NonIntegralMultiple);
TORIC_ERROR_TYPE(NormalizationNotFound);
TORIC_ERROR_TYPE(MalformedCertificate);
TORIC_ERROR_TYPE(ParseError);

#undef TORIC_ERROR_TYPE

}  // namespace toric
