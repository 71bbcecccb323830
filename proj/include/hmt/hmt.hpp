#pragma once

#include "hmt/error.hpp"
#include "hmt/grid.hpp"
#include "hmt/radial_function.hpp"
#include "hmt/functionals.hpp"
#include "hmt/fem.hpp"
#include "hmt/rearrange.hpp"
#include "hmt/hardy_operator.hpp"
#include "hmt/green.hpp"
#include "hmt/extremal.hpp"
#include "hmt/blowup.hpp"
#include "hmt/profiles.hpp"
#include "hmt/report.hpp"
#include "hmt/suites.hpp"
