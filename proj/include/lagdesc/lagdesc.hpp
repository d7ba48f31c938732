#pragma once

#include "lagdesc/analysis.hpp"
#include "lagdesc/config.hpp"
#include "lagdesc/descriptor.hpp"
#include "lagdesc/error.hpp"
#include "lagdesc/frames.hpp"
#include "lagdesc/integrator.hpp"
#include "lagdesc/io.hpp"
#include "lagdesc/parallel.hpp"
#include "lagdesc/point.hpp"
#include "lagdesc/systems.hpp"
