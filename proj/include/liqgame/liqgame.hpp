#pragma once

#include "liqgame/constrained_nash.hpp"
#include "liqgame/error.hpp"
#include "liqgame/fbsde_oracle.hpp"
#include "liqgame/market_model.hpp"
#include "liqgame/stackelberg.hpp"
#include "liqgame/unconstrained_nash.hpp"
