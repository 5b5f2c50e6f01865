#pragma once

// Everything in one include.

#include "sreach/count.hpp"
#include "sreach/errors.hpp"
#include "sreach/format.hpp"
#include "sreach/generate.hpp"
#include "sreach/model.hpp"
#include "sreach/oracle.hpp"
#include "sreach/preprocess.hpp"
#include "sreach/reach.hpp"
#include "sreach/reach_io.hpp"
#include "sreach/reduce.hpp"
#include "sreach/sexpr.hpp"
#include "sreach/solve.hpp"
#include "sreach/tree.hpp"
#include "sreach/validate.hpp"
