#pragma once

#include "levykac/clt.hpp"
#include "levykac/convolution.hpp"
#include "levykac/densities.hpp"
#include "levykac/divergences.hpp"
#include "levykac/errors.hpp"
#include "levykac/kac_sphere.hpp"
#include "levykac/quadrature.hpp"
#include "levykac/spectral.hpp"
#include "levykac/stable.hpp"
