#pragma once

#include "kfunc/constraint.hpp"
#include "kfunc/decompose.hpp"
#include "kfunc/error.hpp"
#include "kfunc/flow.hpp"
#include "kfunc/functionals.hpp"
#include "kfunc/gateaux.hpp"
#include "kfunc/grid.hpp"
#include "kfunc/kderiv.hpp"
