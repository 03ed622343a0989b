#pragma once

#include <string>

#include "json.hpp"

#include "linctl/types.hpp"

namespace linctl::detail {

using Json = nlohmann::ordered_json;

/// Pretty JSON with two-space indentation. Floats use %.17g, scalar-only
/// arrays stay on one line, and non-finite floats become null.
std::string emit_json(const Json& value);

Json to_json(const Matrix& M);
Json to_json(const Vector& v);
Json to_json(const Complex& z);
Json to_json(const ComplexList& values);

}  // namespace linctl::detail
