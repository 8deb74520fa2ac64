#pragma once

#include "dispersion/atomic_model.hpp"
#include "dispersion/error.hpp"
#include "dispersion/field_spectrum.hpp"
#include "dispersion/green_tensor.hpp"
#include "dispersion/potentials.hpp"
#include "dispersion/quadrature.hpp"
