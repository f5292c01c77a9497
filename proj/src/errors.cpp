#include "iac/errors.hpp"

#include <utility>

namespace iac {

UnknownSymbolError::UnknownSymbolError(std::string symbol, std::string nearest)
    : Error("unknown symbol '" + symbol + "'" +
            (nearest.empty() ? std::string()
                             : "; did you mean '" + nearest + "'?")),
      symbol_(std::move(symbol)),
      nearest_(std::move(nearest)) {}

}  // namespace iac
