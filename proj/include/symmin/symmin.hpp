#pragma once

#include "symmin/compacton.hpp"
#include "symmin/density.hpp"
#include "symmin/errors.hpp"
#include "symmin/field.hpp"
#include "symmin/functional.hpp"
#include "symmin/geometry.hpp"
#include "symmin/io.hpp"
#include "symmin/linalg.hpp"
#include "symmin/ode.hpp"
#include "symmin/optimize.hpp"
#include "symmin/problems.hpp"
#include "symmin/splitting.hpp"
#include "symmin/symmetry.hpp"
