#pragma once
// Convenience umbrella: pulls in the whole library.

#include "drf/combiners.hpp"
#include "drf/core.hpp"
#include "drf/data.hpp"
#include "drf/graph.hpp"
#include "drf/primitive.hpp"
#include "drf/rng.hpp"
#include "drf/structures.hpp"
#include "drf/verify.hpp"
