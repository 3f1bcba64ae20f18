#pragma once

#include "omegastop/simulate/ensemble.hpp"
#include "omegastop/simulate/estimators.hpp"
#include "omegastop/simulate/killed_path.hpp"
#include "omegastop/simulate/rng.hpp"
#include "omegastop/simulate/stable_sampler.hpp"
