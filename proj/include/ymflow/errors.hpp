/// @file errors.hpp
/// @brief Exception hierarchy shared by every ymflow module.
#pragma once

#include <stdexcept>
#include <string>

namespace ymflow {

/// Base of all ymflow errors. Catch this to handle any library failure.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define YMFLOW_DEFINE_ERROR(Name)                                   \
    class Name : public Error {                                     \
    public:                                                         \
        explicit Name(const std::string& what) : Error(what) {}     \
    }

// radial core
YMFLOW_DEFINE_ERROR(DimensionOutOfRange);
YMFLOW_DEFINE_ERROR(DomainError);
YMFLOW_DEFINE_ERROR(TimeOrderError);
YMFLOW_DEFINE_ERROR(GridTooCoarse);
YMFLOW_DEFINE_ERROR(OriginRegularityError);
YMFLOW_DEFINE_ERROR(InvalidProfile);

// flow integrator
YMFLOW_DEFINE_ERROR(InvalidConfig);
YMFLOW_DEFINE_ERROR(NumericalFailure);
YMFLOW_DEFINE_ERROR(NoBlowup);

// blow-up analysis
YMFLOW_DEFINE_ERROR(TimeNotBracketed);
YMFLOW_DEFINE_ERROR(ScaleTooSmall);

// monotonicity
YMFLOW_DEFINE_ERROR(OffsetUnsupported);

// bundle oracle
YMFLOW_DEFINE_ERROR(IndexOutOfRange);
YMFLOW_DEFINE_ERROR(OriginSingularity);
YMFLOW_DEFINE_ERROR(StepTooLarge);
YMFLOW_DEFINE_ERROR(NotOrthogonal);

#undef YMFLOW_DEFINE_ERROR

}  // namespace ymflow
