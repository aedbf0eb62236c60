#pragma once

#include "hardyop/errors.hpp"
#include "hardyop/quadrature.hpp"
#include "hardyop/roots.hpp"
#include "hardyop/interval_set.hpp"
#include "hardyop/measure.hpp"
#include "hardyop/phi.hpp"
#include "hardyop/transform.hpp"
#include "hardyop/levelset.hpp"
#include "hardyop/clark.hpp"
#include "hardyop/parallel.hpp"
#include "hardyop/range.hpp"
#include "hardyop/similarity.hpp"
