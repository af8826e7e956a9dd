#pragma once

#include <stdexcept>
#include <string>

namespace multiauto {

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define MULTIAUTO_ERROR(Name)                                        \
    struct Name : Error {                                            \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
    }

MULTIAUTO_ERROR(DimensionMismatch);
MULTIAUTO_ERROR(SingularPoint);
MULTIAUTO_ERROR(SupBoundViolated);
MULTIAUTO_ERROR(MissingBound);
MULTIAUTO_ERROR(EmptyList);
MULTIAUTO_ERROR(ParseError);
MULTIAUTO_ERROR(NoConvergentSubsequence);
MULTIAUTO_ERROR(FamilyNotUnbounded);
MULTIAUTO_ERROR(TruncationUnstable);
MULTIAUTO_ERROR(NegativeKernel);
MULTIAUTO_ERROR(E1Violated);
MULTIAUTO_ERROR(CertificateInvalid);
MULTIAUTO_ERROR(EmptyInterior);
MULTIAUTO_ERROR(InsufficientSweeps);
MULTIAUTO_ERROR(StepUnstable);
MULTIAUTO_ERROR(NoDecay);
MULTIAUTO_ERROR(HorizonExceedsTable);
MULTIAUTO_ERROR(NonpositiveTime);
MULTIAUTO_ERROR(ConfigError);

#undef MULTIAUTO_ERROR

} // namespace multiauto
