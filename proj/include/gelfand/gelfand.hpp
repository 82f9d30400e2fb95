// Umbrella header.
#pragma once

#include "gelfand/lie.hpp"
#include "gelfand/stats.hpp"
#include "gelfand/spherical.hpp"
#include "gelfand/transform.hpp"
#include "gelfand/levy.hpp"
#include "gelfand/verify.hpp"
