#pragma once

#include "wsn/adversary.hpp"
#include "wsn/attack_matrix.hpp"
#include "wsn/control.hpp"
#include "wsn/crypto.hpp"
#include "wsn/detection.hpp"
#include "wsn/energy.hpp"
#include "wsn/experiments.hpp"
#include "wsn/mutesla.hpp"
#include "wsn/report.hpp"
#include "wsn/rng.hpp"
#include "wsn/routing.hpp"
#include "wsn/scenario.hpp"
#include "wsn/simulator.hpp"
#include "wsn/snep.hpp"
#include "wsn/topology.hpp"
#include "wsn/wire.hpp"
