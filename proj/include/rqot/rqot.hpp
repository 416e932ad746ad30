#pragma once

#include "rqot/units.hpp"
#include "rqot/curves.hpp"
#include "rqot/fiber.hpp"
#include "rqot/plan.hpp"
#include "rqot/scenario.hpp"
#include "rqot/ode.hpp"
#include "rqot/raman.hpp"
#include "rqot/lm.hpp"
#include "rqot/fit.hpp"
#include "rqot/closed_form.hpp"
#include "rqot/quadrature.hpp"
#include "rqot/integral.hpp"
#include "rqot/identities.hpp"
#include "rqot/pump_optimizer.hpp"
