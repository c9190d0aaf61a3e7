#pragma once

#include "ciid/diagnostics.hpp"
#include "ciid/errors.hpp"
#include "ciid/extreme_value.hpp"
#include "ciid/io.hpp"
#include "ciid/lack_of_memory.hpp"
#include "ciid/mixing_law.hpp"
#include "ciid/mixtures.hpp"
#include "ciid/moments.hpp"
#include "ciid/numerics.hpp"
#include "ciid/rng.hpp"
#include "ciid/shock_models.hpp"
