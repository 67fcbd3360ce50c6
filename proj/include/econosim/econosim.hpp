#pragma once

#include "econosim/banking.hpp"
#include "econosim/criticality.hpp"
#include "econosim/economy_graph.hpp"
#include "econosim/errors.hpp"
#include "econosim/geometry.hpp"
#include "econosim/io.hpp"
#include "econosim/rng.hpp"
#include "econosim/tail_stats.hpp"
#include "econosim/trade_dynamics.hpp"
#include "econosim/version.hpp"
