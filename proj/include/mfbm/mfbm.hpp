#pragma once

#include "mfbm/error.hpp"
#include "mfbm/specfun.hpp"
#include "mfbm/quadrature.hpp"
#include "mfbm/kernel.hpp"
#include "mfbm/mercer.hpp"
#include "mfbm/rng.hpp"
#include "mfbm/modes.hpp"
#include "mfbm/field.hpp"
#include "mfbm/rkhs.hpp"
#include "mfbm/limits.hpp"
#include "mfbm/config.hpp"
#include "mfbm/io.hpp"
