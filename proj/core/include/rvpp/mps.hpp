#pragma once

#include <string>

#include "rvpp/model_ir.hpp"

namespace rvpp {

// Renders the model as fixed-format MPS text. The file always minimizes:
// objective coefficients are the negated maximize-form coefficients, so an
// external solver's optimum equals the negated optimum of `model` (the header
// comment in the output restates this). Columns are emitted in declaration
// order under canonical names X1..Xn, rows as R1..Rm plus the OBJ row, and
// binaries sit inside INTORG/INTEND markers with BV bounds, which keeps the
// text byte-stable for golden comparisons.
std::string export_mps(const ModelIR& model);

}  // namespace rvpp
