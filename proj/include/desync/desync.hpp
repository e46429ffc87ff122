#pragma once

#include "desync/core.hpp"
#include "desync/dwarf.hpp"
#include "desync/error.hpp"
#include "desync/io.hpp"
#include "desync/jacobian.hpp"
#include "desync/mdwarf.hpp"
#include "desync/sim.hpp"
#include "desync/spectral.hpp"
