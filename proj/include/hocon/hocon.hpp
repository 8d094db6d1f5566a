#pragma once

#include "hocon/errors.hpp"
#include "hocon/dual.hpp"
#include "hocon/autodiff.hpp"
#include "hocon/finite_difference.hpp"
#include "hocon/core.hpp"
#include "hocon/assembler.hpp"
#include "hocon/integrator.hpp"
#include "hocon/reduction.hpp"
#include "hocon/models.hpp"
#include "hocon/scenario.hpp"
#include "hocon/verify.hpp"
