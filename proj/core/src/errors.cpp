#include "rencoal/errors.hpp"

namespace rencoal::detail {

void throw_invalid(const std::string& what) { throw InvalidArgument(what); }

void throw_data(const std::string& what) { throw DataError(what); }

}  // namespace rencoal::detail
