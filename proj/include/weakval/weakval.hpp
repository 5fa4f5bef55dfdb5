// weakval.hpp
// Umbrella header.

#pragma once

#include "channel.hpp"
#include "counting.hpp"
#include "counting_io.hpp"
#include "device.hpp"
#include "error.hpp"
#include "fock.hpp"
#include "format.hpp"
#include "imperfection.hpp"
#include "linalg.hpp"
#include "tomography.hpp"
#include "types.hpp"
#include "version.hpp"
#include "weak_values.hpp"
