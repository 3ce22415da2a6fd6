// SPDX-License-Identifier: MIT
//
// Umbrella header for the pamor library.

#pragma once

#include "pamor/contractive.hpp"
#include "pamor/dense_linalg.hpp"
#include "pamor/kyp.hpp"
#include "pamor/lti_core.hpp"
#include "pamor/models_io.hpp"
#include "pamor/reducers.hpp"
#include "pamor/spectral_factor_mor.hpp"
#include "pamor/types.hpp"

