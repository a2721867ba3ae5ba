#pragma once

#include "adaptwin/belief.hpp"
#include "adaptwin/config.hpp"
#include "adaptwin/environment.hpp"
#include "adaptwin/error.hpp"
#include "adaptwin/harness.hpp"
#include "adaptwin/io.hpp"
#include "adaptwin/observation.hpp"
#include "adaptwin/planner.hpp"
#include "adaptwin/policy.hpp"
#include "adaptwin/state_space.hpp"
#include "adaptwin/transition_model.hpp"
