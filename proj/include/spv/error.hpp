#pragma once

#include <stdexcept>
#include <string>

namespace spv {

/// Base for every error raised by the toolkit. The CLI maps any of these to a
/// nonzero exit status.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define SPV_DEFINE_ERROR(Name)          \
    class Name : public Error {         \
    public:                             \
        using Error::Error;             \
    };

SPV_DEFINE_ERROR(DimensionError)
SPV_DEFINE_ERROR(GeometryError)
SPV_DEFINE_ERROR(IngestionError)
SPV_DEFINE_ERROR(FormatError)
SPV_DEFINE_ERROR(PreconditionError)
SPV_DEFINE_ERROR(FovError)
SPV_DEFINE_ERROR(LengthError)
SPV_DEFINE_ERROR(PipelineError)
SPV_DEFINE_ERROR(CatalogError)
SPV_DEFINE_ERROR(ProtocolError)
SPV_DEFINE_ERROR(ConsistencyError)
SPV_DEFINE_ERROR(InsufficientDataError)
SPV_DEFINE_ERROR(ConfigError)

#undef SPV_DEFINE_ERROR

} // namespace spv
