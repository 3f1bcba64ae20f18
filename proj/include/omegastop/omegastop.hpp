#pragma once

#include "omegastop/errors.hpp"
#include "omegastop/levy.hpp"
#include "omegastop/model.hpp"
#include "omegastop/numerics.hpp"
#include "omegastop/simulate.hpp"
#include "omegastop/stopping.hpp"
#include "omegastop/version.hpp"
