#pragma once

// Runtime support for generated inference programs.

#include "blogc/runtime/distributions.hpp"
#include "blogc/runtime/program.hpp"
#include "blogc/runtime/rng.hpp"
#include "blogc/runtime/stats.hpp"
#include "blogc/runtime/world.hpp"
