#pragma once

#include "mcsp/error.hpp"
#include "mcsp/structures.hpp"
#include "mcsp/algebra.hpp"
#include "mcsp/colour.hpp"
#include "mcsp/binarize.hpp"
#include "mcsp/propagate.hpp"
#include "mcsp/reduce.hpp"
#include "mcsp/linear_system.hpp"
#include "mcsp/affine.hpp"
#include "mcsp/oracle.hpp"
#include "mcsp/io.hpp"
#include "mcsp/generate.hpp"
#include "mcsp/compare.hpp"
#include "mcsp/report.hpp"
