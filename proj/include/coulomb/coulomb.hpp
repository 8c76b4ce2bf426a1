#pragma once

#include "allocator.hpp"
#include "cli.hpp"
#include "errors.hpp"
#include "formation.hpp"
#include "linalg.hpp"
#include "scenario.hpp"
#include "sdp.hpp"
#include "sim.hpp"
