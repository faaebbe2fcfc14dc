#include "lanebench/dynamics.hpp"

// Header-only on purpose: step() sits in every hot loop. The TU exists so the
// module has a home in the library and room for non-inline additions.

namespace lanebench {}
