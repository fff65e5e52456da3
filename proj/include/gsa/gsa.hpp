#pragma once

// Umbrella header for the global sensitivity analysis library.

#include "gsa/campaign.hpp"
#include "gsa/dist.hpp"
#include "gsa/errors.hpp"
#include "gsa/linalg.hpp"
#include "gsa/models.hpp"
#include "gsa/orthopoly.hpp"
#include "gsa/rng.hpp"
#include "gsa/sampling.hpp"
#include "gsa/sensitivity.hpp"
#include "gsa/surrogate.hpp"
#include "gsa/transform.hpp"
