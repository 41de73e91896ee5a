#pragma once

#include "fadecap/bounds.hpp"
#include "fadecap/capacity.hpp"
#include "fadecap/channel.hpp"
#include "fadecap/constellations.hpp"
#include "fadecap/curves.hpp"
#include "fadecap/errors.hpp"
#include "fadecap/exact_mi.hpp"
#include "fadecap/mc_oracle.hpp"
#include "fadecap/numerics.hpp"
#include "fadecap/rng.hpp"
#include "fadecap/validate.hpp"
