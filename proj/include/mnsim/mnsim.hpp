#pragma once

#include "mnsim/errors.hpp"
#include "mnsim/grid.hpp"
#include "mnsim/spectral_field.hpp"
#include "mnsim/free_propagator.hpp"
#include "mnsim/charge_profile.hpp"
#include "mnsim/charge_model.hpp"
#include "mnsim/dynamics.hpp"
#include "mnsim/system_state.hpp"
#include "mnsim/chebyshev.hpp"
#include "mnsim/growth.hpp"
#include "mnsim/picard.hpp"
#include "mnsim/constraints.hpp"
#include "mnsim/diagnostics.hpp"
#include "mnsim/reference_oracle.hpp"
#include "mnsim/random_fields.hpp"
#include "mnsim/state_file.hpp"
#include "mnsim/config.hpp"
#include "mnsim/run.hpp"
