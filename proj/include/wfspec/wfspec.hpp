#pragma once

#include "errors.hpp"
#include "parallel.hpp"
#include "index_space.hpp"
#include "univariate_jacobi.hpp"
#include "simplex_coords.hpp"
#include "sparse.hpp"
#include "multivariate_jacobi.hpp"
#include "model.hpp"
#include "extended_eigen.hpp"
#include "spectral.hpp"
#include "density.hpp"
#include "oracles.hpp"
#include "io.hpp"
#include "config.hpp"
#include "validation.hpp"
#include "cli.hpp"
