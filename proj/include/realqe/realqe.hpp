#pragma once

#include "realqe/error.hpp"
#include "realqe/rational.hpp"
#include "realqe/polynomial.hpp"
#include "realqe/formula.hpp"
#include "realqe/parser.hpp"
#include "realqe/formula_ops.hpp"
#include "realqe/sign_table.hpp"
#include "realqe/qe.hpp"
#include "realqe/reductions.hpp"
#include "realqe/geometry.hpp"

namespace realqe {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace realqe
