#pragma once

#include "angle.hpp"
#include "boettcher.hpp"
#include "continuation.hpp"
#include "cycles.hpp"
#include "digits.hpp"
#include "hyperbolic.hpp"
#include "io.hpp"
#include "lamination.hpp"
#include "local_boettcher.hpp"
#include "poly.hpp"
#include "puzzle.hpp"
#include "rays.hpp"
#include "render.hpp"
#include "report.hpp"
#include "roots.hpp"
#include "sector.hpp"
