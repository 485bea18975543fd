#pragma once

#include "odekit/adapt.hpp"
#include "odekit/events.hpp"
#include "odekit/linalg.hpp"
#include "odekit/monitor.hpp"
#include "odekit/newton.hpp"
#include "odekit/problem.hpp"
#include "odekit/sensitivity.hpp"
#include "odekit/solve.hpp"
#include "odekit/steppers.hpp"
#include "odekit/tableaux.hpp"
#include "odekit/types.hpp"
