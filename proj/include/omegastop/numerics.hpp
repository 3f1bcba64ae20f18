#pragma once

#include "omegastop/numerics/gamma.hpp"
#include "omegastop/numerics/hypergeometric.hpp"
#include "omegastop/numerics/quadrature.hpp"
