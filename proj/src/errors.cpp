#include "qrng/errors.hpp"

namespace qrng {

ConfigurationError::ConfigurationError(std::string field, const std::string& message)
    : Error(field + ": " + message), field_(std::move(field)) {}

}  // namespace qrng
