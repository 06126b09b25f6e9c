#pragma once

#include "tlgerm/errors.hpp"
#include "tlgerm/piecewise_linear.hpp"
#include "tlgerm/periodic.hpp"
#include "tlgerm/flux.hpp"
#include "tlgerm/signal.hpp"
#include "tlgerm/germ.hpp"
#include "tlgerm/effective.hpp"
#include "tlgerm/hj.hpp"
#include "tlgerm/fvm.hpp"
#include "tlgerm/tolerances.hpp"
#include "tlgerm/examples.hpp"
#include "tlgerm/io.hpp"
#include "tlgerm/battery.hpp"
